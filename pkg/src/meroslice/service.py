"""HTTP service: tile pyramid, point queries, centers, S_* traces, inversion.

All responses are deterministic functions of the query (content-addressed by
spec digest), so every body is cacheable.  Complex numbers travel as "re,im"
decimal strings.  Errors: 400 malformed parameters, 422 singular parameters
(lambda in {0, rho/2}), 503 when the bounded tile-render queue is full.
"""

from __future__ import annotations

import math
import threading
from pathlib import Path

from fastapi import FastAPI, Query, Response
from fastapi.responses import JSONResponse

from . import _mathcore as mc
from .centers import Rect, enumerate_centers, format_center_record
from .classifier import DEFAULT_BUDGET, Kind, classify, _refine_cycle, cycle_itinerary
from .errors import (
    BranchAmbiguity,
    DomainError,
    MerosliceError,
    NotShiftLocus,
    SingularParameter,
    TraceLost,
)
from .family import EPS_POLE, MAX_PERIOD, OrbitRecord, ParamPoint, Verdict, iterate
from .koenigs import s_partition, trace_s_star
from .render import (
    RenderSpec,
    Viewport,
    png_bytes,
    render_dynamic_plane,
    render_tile,
)

MAX_REPORTED_ORBIT = 256


def _cstr(z: complex) -> str:
    return f"{z.real!r},{z.imag!r}"


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 're,im', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def _parse_rho(text: str) -> complex:
    rho = _parse_complex(text)
    if not 0.0 < abs(rho) < 1.0:
        raise ValueError("rho outside punctured unit disk")
    return rho


def _orbit_json(rec: OrbitRecord) -> dict:
    pts = rec.points[:MAX_REPORTED_ORBIT]
    out = {
        "seed": _cstr(rec.seed),
        "verdict": rec.verdict.value,
        "iterations_used": rec.iterations_used,
        "points": [_cstr(z) for z in pts],
        "truncated": len(rec.points) > len(pts),
    }
    if rec.pole_index is not None:
        out["pole_index"] = rec.pole_index
    if rec.tract_side is not None:
        out["tract_side"] = rec.tract_side
    return out


def _center_json(c) -> dict:
    return {
        "order": c.order,
        "marked_av": c.marked_av.value,
        "itinerary": list(c.itinerary.entries),
        "location": _cstr(c.location),
        "residual": c.residual,
        "transversality_abs": abs(c.transversality),
        "record": format_center_record(c),
    }


def point_report(rho: complex, lam: complex, centers_cache: dict | None = None) -> dict:
    p = ParamPoint(rho, lam)
    budget = DEFAULT_BUDGET
    pc = classify(p, budget)
    orbit_lam = iterate(p, p.lam, budget.max_iter)
    orbit_mu = iterate(p, p.mu, budget.max_iter)
    report = {
        "rho": _cstr(p.rho),
        "lambda": _cstr(p.lam),
        "mu": _cstr(p.mu),
        "class": {
            "kind": pc.kind.value,
            "period": pc.period,
            "multiplier": _cstr(pc.multiplier) if pc.multiplier is not None else None,
            "lambda_orbit_len": pc.lambda_orbit_len,
            "mu_orbit_len": pc.mu_orbit_len,
        },
        "orbit_lambda": _orbit_json(orbit_lam),
        "orbit_mu": _orbit_json(orbit_mu),
        "s_partition": None,
        "itinerary": None,
        "nearest_center": None,
    }
    if pc.kind is Kind.SHIFT_LOCUS:
        try:
            report["s_partition"] = s_partition(p, budget).value
        except (NotShiftLocus, MerosliceError):
            pass
    if pc.kind in (Kind.M_LAMBDA, Kind.M_MU) and pc.period is not None:
        seed_av = p.lam if pc.kind is Kind.M_LAMBDA else p.mu
        code, per, _, rep, _, _ = mc.fate_raw(p.rho, p.lam, p.mu, seed_av,
                                              budget.max_iter, budget.eps_zero,
                                              budget.eps_cycle, MAX_PERIOD, EPS_POLE)
        if code == mc.FATE_CYCLE:
            cyc = _refine_cycle(p, rep, per, budget.eps_cycle)
            if cyc is not None:
                try:
                    report["itinerary"] = list(cycle_itinerary(p, cyc).entries)
                except BranchAmbiguity:
                    pass
    if centers_cache:
        best = None
        for c in centers_cache.values():
            d = abs(c.location - lam)
            if best is None or d < best[0]:
                best = (d, c)
        if best is not None:
            report["nearest_center"] = dict(_center_json(best[1]), distance=best[0])
    return report


class _TileStore:
    """Content-addressed tile cache with a bounded render admission counter."""

    def __init__(self, root: Path | None, queue_limit: int):
        self.root = root
        self.queue_limit = queue_limit
        self.mem: dict[tuple, bytes] = {}
        self.lock = threading.Lock()
        self.inflight = 0

    def get(self, key: tuple) -> bytes | None:
        data = self.mem.get(key)
        if data is not None:
            return data
        if self.root is not None:
            path = self._path(key)
            if path.exists():
                data = path.read_bytes()
                self.mem[key] = data
                return data
        return None

    def put(self, key: tuple, data: bytes) -> None:
        self.mem[key] = data
        if self.root is not None:
            path = self._path(key)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)

    def _path(self, key: tuple) -> Path:
        digest, z, x, y = key
        return self.root / str(digest) / str(z) / str(x) / f"{y}.png"

    def admit(self) -> bool:
        with self.lock:
            if self.inflight >= self.queue_limit:
                return False
            self.inflight += 1
            return True

    def release(self) -> None:
        with self.lock:
            self.inflight -= 1


def _bad_request(msg: str) -> JSONResponse:
    return JSONResponse({"error": msg}, status_code=400)


def _unprocessable(msg: str) -> JSONResponse:
    return JSONResponse({"error": msg}, status_code=422)


def default_parameter_spec(rho: complex, px: int = 512) -> RenderSpec:
    return RenderSpec("param", rho, viewport=Viewport(2.25 * rho, 7.5 * abs(rho)),
                      resolution=(px, px))


def create_app(presets: list[complex] | None = None,
               tile_cache_dir: str | Path | None = None,
               queue_limit: int = 256,
               workers: int = 1,
               frontend_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="meroslice", docs_url=None, redoc_url=None)
    if frontend_dir is not None:
        root = Path(frontend_dir)
        index = root / "index.html"
        dist = root / "dist"
        if index.exists():
            @app.get("/")
            def index_route():
                return Response(content=index.read_bytes(), media_type="text/html")
        if dist.is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/dist", StaticFiles(directory=dist), name="dist")
    presets = [complex(r) for r in (presets or [complex(2.0 / 3.0)])]
    store = _TileStore(Path(tile_cache_dir) if tile_cache_dir else None, queue_limit)
    registry: dict[str, RenderSpec] = {}
    centers_caches: dict[str, dict] = {}
    preset_rows = []
    for i, rho in enumerate(presets):
        spec = default_parameter_spec(rho)
        registry[spec.digest()] = spec
        preset_rows.append({
            "id": f"preset-{i}",
            "rho": _cstr(rho),
            "plane": "param",
            "digest": spec.digest(),
            "viewport": {"center": _cstr(spec.viewport.center),
                         "width": spec.viewport.width},
            "tile_url": f"/tiles/param/{spec.digest()}/{{z}}/{{x}}/{{y}}.png",
        })

    @app.get("/presets")
    def presets_route():
        return JSONResponse({"presets": preset_rows})

    @app.get("/tiles/{plane}/{digest}/{z}/{x}/{y}.png")
    def tiles_route(plane: str, digest: str, z: int, x: int, y: int):
        spec = registry.get(digest)
        if spec is None:
            return JSONResponse({"error": "unknown spec digest"}, status_code=404)
        if plane != spec.plane:
            return _bad_request("plane does not match digest")
        if not (0 <= z <= 40 and 0 <= x < (1 << z) and 0 <= y < (1 << z)):
            return _bad_request("tile coordinates out of range")
        key = (digest, z, x, y)
        data = store.get(key)
        if data is None:
            if not store.admit():
                return Response(status_code=503, headers={"Retry-After": "1"},
                                content=b"tile queue full")
            try:
                tile = render_tile(spec, z, x, y, workers=workers)
                data = png_bytes(tile.pixels)
                store.put(key, data)
            finally:
                store.release()
        return Response(content=data, media_type="image/png",
                        headers={"Cache-Control": "public, max-age=31536000",
                                 "X-Spec-Digest": digest})

    @app.get("/render/dynamic")
    def render_dynamic_route(rho: str, lam: str = Query("", alias="lambda"),
                             px: int = 512, center: str = "0,0",
                             width: float = 8.0, overlays: str = "",
                             budget: int = 0):
        try:
            rho_c = _parse_rho(rho)
            lam_c = _parse_complex(lam)
            center_c = _parse_complex(center)
            ov = frozenset(s for s in overlays.split(",") if s)
            b = DEFAULT_BUDGET if budget <= 0 else DEFAULT_BUDGET.__class__(
                max_iter=max(budget, DEFAULT_BUDGET.cycle_window))
            spec = RenderSpec("dyn", rho_c, lam=lam_c,
                              viewport=Viewport(center_c, width),
                              resolution=(px, px), budget=b, overlays=ov)
        except (ValueError, DomainError) as exc:
            return _bad_request(str(exc))
        except SingularParameter as exc:
            return _unprocessable(str(exc))
        key = ("dyn-image", spec.digest())
        data = store.mem.get(key)
        if data is None:
            try:
                result = render_dynamic_plane(spec, workers=workers)
            except SingularParameter as exc:
                return _unprocessable(str(exc))
            data = png_bytes(result.pixels)
            store.mem[key] = data
        return Response(content=data, media_type="image/png",
                        headers={"X-Spec-Digest": spec.digest()})

    @app.get("/classify")
    def classify_route(rho: str, lam: str = Query("", alias="lambda")):
        try:
            rho_c = _parse_rho(rho)
            lam_c = _parse_complex(lam)
        except ValueError as exc:
            return _bad_request(str(exc))
        try:
            report = point_report(rho_c, lam_c,
                                  centers_caches.get(_cstr(rho_c)))
        except SingularParameter as exc:
            return _unprocessable(str(exc))
        except DomainError as exc:
            return _bad_request(str(exc))
        return JSONResponse(report)

    @app.get("/centers")
    def centers_route(rho: str, bbox: str = "", max_order: int = 3):
        try:
            rho_c = _parse_rho(rho)
            parts = [float(s) for s in bbox.split(",")]
            if len(parts) != 4:
                raise ValueError("bbox must be re0,re1,im0,im1")
            window = Rect(*parts)
            if max_order < 2 or max_order > 8:
                raise ValueError("max_order must be in [2, 8]")
        except (ValueError, DomainError) as exc:
            return _bad_request(str(exc))
        res = enumerate_centers(rho_c, window, max_order=max_order)
        cache = centers_caches.setdefault(_cstr(rho_c), {})
        for c in res.centers:
            cache[(c.marked_av, c.itinerary.entries)] = c
        return JSONResponse({
            "rho": _cstr(rho_c),
            "max_order": max_order,
            "count": len(res.centers),
            "centers": [_center_json(c) for c in res.centers],
        })

    @app.get("/sstar")
    def sstar_route(rho: str, n: int = 64):
        try:
            rho_c = _parse_rho(rho)
            if not 4 <= n <= 4096:
                raise ValueError("n must be in [4, 4096]")
        except ValueError as exc:
            return _bad_request(str(exc))
        try:
            pts = trace_s_star(rho_c, n)
        except TraceLost as exc:
            return JSONResponse({"rho": _cstr(rho_c), "n": n, "error": str(exc),
                                 "partial": [_cstr(z) for z in exc.partial]},
                                status_code=500)
        return JSONResponse({"rho": _cstr(rho_c), "n": n, "closed": True,
                             "points": [_cstr(z) for z in pts]})

    @app.get("/invert")
    def invert_route(rho: str, lam: str = Query("", alias="lambda")):
        try:
            rho_c = _parse_rho(rho)
            lam_c = _parse_complex(lam)
        except ValueError as exc:
            return _bad_request(str(exc))
        try:
            p = ParamPoint(rho_c, lam_c)
        except SingularParameter as exc:
            return _unprocessable(str(exc))
        except DomainError as exc:
            return _bad_request(str(exc))
        return JSONResponse({"rho": _cstr(rho_c), "lambda": _cstr(lam_c),
                             "inverted": _cstr(-p.mu)})

    return app
