"""Tile-based rendering of parameter and dynamic planes.

Parameter pixels are colored by the classifier (shift locus green, shell
components by period, undetermined black); dynamic pixels by orbit fate
(basin of 0 yellow, basin of a non-zero attracting cycle blue, rest black).
Pixel coordinates always come from the global-index formula over the base
viewport, so a tile render is bit-identical to the matching crop of a
monolithic render and results do not depend on the worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from PIL import Image

from . import _mathcore as mc
from .classifier import DEFAULT_BUDGET, ClassifierBudget
from .errors import DomainError
from .family import EPS_POLE, MAX_PERIOD, ParamPoint

TILE_SIZE = 256

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class Viewport:
    center: complex
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("viewport width must be positive")


@dataclass(frozen=True)
class ColorMap:
    period_colors: dict = field(default_factory=lambda: dict(_DEFAULT_PERIOD_COLORS))
    shift_color: RGB = (0, 160, 0)
    undetermined_color: RGB = (0, 0, 0)
    singular_color: RGB = (255, 255, 255)
    basin_zero: RGB = (255, 255, 0)
    basin_cycle: RGB = (0, 0, 255)
    basin_other: RGB = (0, 0, 0)
    overlay_color: RGB = (255, 255, 255)

    def period_color(self, period: int) -> RGB:
        return self.period_colors.get(period, self.undetermined_color)


_DEFAULT_PERIOD_COLORS = {
    1: (255, 255, 0),    # yellow
    2: (0, 255, 255),    # cyan
    3: (255, 0, 0),      # red
    4: (255, 0, 255),
    5: (255, 140, 0),
    6: (70, 130, 255),
    7: (170, 70, 255),
    8: (255, 120, 160),
    9: (150, 255, 70),
    10: (0, 255, 150),
}

PALETTES: dict[str, ColorMap] = {"default": ColorMap()}


@dataclass(frozen=True)
class RenderSpec:
    plane: str                     # "param" or "dyn"
    rho: complex
    lam: complex | None = None     # dynamic plane only
    viewport: Viewport = Viewport(1.5 + 0j, 5.0)
    resolution: tuple[int, int] = (512, 512)
    budget: ClassifierBudget = DEFAULT_BUDGET
    palette: str = "default"
    overlays: frozenset = frozenset()

    def __post_init__(self):
        if self.plane not in ("param", "dyn"):
            raise DomainError(f"unknown plane {self.plane!r}")
        if self.plane == "dyn" and self.lam is None:
            raise DomainError("dynamic plane needs lambda")
        w, h = self.resolution
        if not (16 <= w <= 16384 and 16 <= h <= 16384):
            raise DomainError("resolution out of range [16, 16384]")
        if self.palette not in PALETTES:
            raise DomainError(f"unknown palette {self.palette!r}")
        known = {"centers", "sstar", "c0circle", "poles", "fixedpoints"}
        bad = set(self.overlays) - known
        if bad:
            raise DomainError(f"unknown overlays {sorted(bad)}")

    def digest(self) -> str:
        payload = {
            "plane": self.plane,
            "rho": _cstr(self.rho),
            "lambda": _cstr(self.lam) if self.lam is not None else None,
            "center": _cstr(self.viewport.center),
            "width": repr(self.viewport.width),
            "resolution": list(self.resolution),
            "budget": [self.budget.max_iter, self.budget.cycle_window,
                       repr(self.budget.eps_cycle), repr(self.budget.eps_zero)],
            "palette": self.palette,
            "overlays": sorted(self.overlays),
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _cstr(z: complex) -> str:
    return f"{z.real!r},{z.imag!r}"


@dataclass(frozen=True)
class RenderResult:
    spec: RenderSpec
    pixels: np.ndarray          # (H, W, 3) uint8
    kind: np.ndarray            # (H, W) int8: classification / fate codes
    period: np.ndarray | None   # (H, W) int16 on parameter renders
    digest: str
    wall_time: float


@dataclass(frozen=True)
class Tile:
    key: tuple[str, int, int, int]   # (spec digest, zoom, x, y)
    pixels: np.ndarray               # (256, 256, 3) uint8
    provenance: str                  # spec digest


def _grid(viewport: Viewport, total_w: int, total_h: int,
          gi0: int, gj0: int, w: int, h: int) -> np.ndarray:
    """Complex coordinates of a pixel block by global index (bit-stable)."""
    step = viewport.width / total_w
    height_units = step * total_h
    gi = np.arange(gi0, gi0 + w, dtype=np.float64)
    gj = np.arange(gj0, gj0 + h, dtype=np.float64)
    re = viewport.center.real - viewport.width / 2.0 + (gi + 0.5) * step
    im = viewport.center.imag + height_units / 2.0 - (gj + 0.5) * step
    return re[np.newaxis, :] + 1j * im[:, np.newaxis]


def _run_rows(task, h: int, workers: int) -> None:
    """Dispatch row bands to a thread pool (kernels release the GIL)."""
    if workers <= 1:
        task(0, h)
        return
    band = max(8, h // (workers * 4))
    starts = list(range(0, h, band))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, s, min(band, h - s)) for s in starts]
        for f in futures:
            f.result()


def _classify_block(rho: complex, lams: np.ndarray, budget: ClassifierBudget,
                    workers: int) -> tuple[np.ndarray, np.ndarray]:
    h, w = lams.shape
    kinds = np.empty((h, w), dtype=np.int8)
    periods = np.empty((h, w), dtype=np.int16)

    def task(row0: int, rows: int) -> None:
        flat = np.ascontiguousarray(lams[row0:row0 + rows]).ravel()
        k = np.empty(flat.shape[0], dtype=np.int8)
        pr = np.empty(flat.shape[0], dtype=np.int16)
        mc.classify_grid_raw(rho, flat, budget.max_iter, budget.eps_zero,
                             budget.eps_cycle, MAX_PERIOD, EPS_POLE, k, pr)
        kinds[row0:row0 + rows] = k.reshape(rows, w)
        periods[row0:row0 + rows] = pr.reshape(rows, w)

    _run_rows(task, h, workers)
    return kinds, periods


def _fate_block(p: ParamPoint, zs: np.ndarray, budget: ClassifierBudget,
                workers: int) -> np.ndarray:
    h, w = zs.shape
    codes = np.empty((h, w), dtype=np.int8)

    def task(row0: int, rows: int) -> None:
        flat = np.ascontiguousarray(zs[row0:row0 + rows]).ravel()
        c = np.empty(flat.shape[0], dtype=np.int8)
        mc.dynamic_grid_raw(p.rho, p.lam, p.mu, flat, budget.max_iter,
                            budget.eps_zero, budget.eps_cycle, MAX_PERIOD,
                            EPS_POLE, c)
        codes[row0:row0 + rows] = c.reshape(rows, w)

    _run_rows(task, h, workers)
    return codes


def _param_colors(kinds: np.ndarray, periods: np.ndarray, cmap: ColorMap) -> np.ndarray:
    h, w = kinds.shape
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[kinds == mc.KIND_SHIFT] = cmap.shift_color
    img[kinds == mc.KIND_UNDETERMINED] = cmap.undetermined_color
    img[kinds == mc.KIND_SINGULAR] = cmap.singular_color
    shell = (kinds == mc.KIND_MLAMBDA) | (kinds == mc.KIND_MMU)
    for period in np.unique(periods[shell]):
        sel = shell & (periods == period)
        img[sel] = cmap.period_color(int(period))
    return img


def _dyn_colors(codes: np.ndarray, cmap: ColorMap) -> np.ndarray:
    h, w = codes.shape
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[:] = cmap.basin_other
    img[codes == mc.FATE_ZERO] = cmap.basin_zero
    img[codes == mc.FATE_CYCLE] = cmap.basin_cycle
    return img


def render_parameter_plane(spec: RenderSpec, workers: int = 1,
                           overlay_data: "OverlayData | None" = None) -> RenderResult:
    if spec.plane != "param":
        raise DomainError("spec is not a parameter-plane spec")
    t0 = time.perf_counter()
    w, h = spec.resolution
    lams = _grid(spec.viewport, w, h, 0, 0, w, h)
    kinds, periods = _classify_block(spec.rho, lams, spec.budget, workers)
    img = _param_colors(kinds, periods, PALETTES[spec.palette])
    _mark_singular_pixels(img, spec, w, h)
    if spec.overlays:
        _draw_param_overlays(img, spec, overlay_data)
    return RenderResult(spec, img, kinds, periods, spec.digest(),
                        time.perf_counter() - t0)


def render_dynamic_plane(spec: RenderSpec, workers: int = 1) -> RenderResult:
    if spec.plane != "dyn":
        raise DomainError("spec is not a dynamic-plane spec")
    t0 = time.perf_counter()
    p = ParamPoint(spec.rho, spec.lam)
    w, h = spec.resolution
    zs = _grid(spec.viewport, w, h, 0, 0, w, h)
    codes = _fate_block(p, zs, spec.budget, workers)
    img = _dyn_colors(codes, PALETTES[spec.palette])
    if spec.overlays:
        _draw_dyn_overlays(img, spec, p)
    return RenderResult(spec, img, codes, None, spec.digest(),
                        time.perf_counter() - t0)


def render_tile(spec: RenderSpec, zoom: int, x: int, y: int,
                workers: int = 1) -> Tile:
    """One 256x256 tile of the power-of-two pyramid over the base viewport.

    The iteration budget grows with zoom (deep zooms sit near the bifurcation
    locus); pixel values equal the corresponding crop of a monolithic render
    at the same effective resolution and budget.
    """
    if not 0 <= zoom <= 40:
        raise DomainError("zoom out of range [0, 40]")
    n_tiles = 1 << zoom
    if not (0 <= x < n_tiles and 0 <= y < n_tiles):
        raise DomainError("tile index out of range")
    total = TILE_SIZE * n_tiles
    budget = spec.budget.scaled(1.0 + zoom / 8.0)
    block = _grid(spec.viewport, total, total, x * TILE_SIZE, y * TILE_SIZE,
                  TILE_SIZE, TILE_SIZE)
    cmap = PALETTES[spec.palette]
    if spec.plane == "param":
        kinds, periods = _classify_block(spec.rho, block, budget, workers)
        img = _param_colors(kinds, periods, cmap)
        _mark_singular_pixels(img, spec, total, total,
                              offset=(x * TILE_SIZE, y * TILE_SIZE))
    else:
        p = ParamPoint(spec.rho, spec.lam)
        codes = _fate_block(p, block, budget, workers)
        img = _dyn_colors(codes, cmap)
    return Tile((spec.digest(), zoom, x, y), img, spec.digest())


def _pixel_of(spec: RenderSpec, z: complex,
              total_w: int | None = None, total_h: int | None = None) -> tuple[int, int]:
    w, h = spec.resolution
    total_w = total_w or w
    total_h = total_h or h
    step = spec.viewport.width / total_w
    height_units = step * total_h
    px = (z.real - (spec.viewport.center.real - spec.viewport.width / 2.0)) / step - 0.5
    py = ((spec.viewport.center.imag + height_units / 2.0) - z.imag) / step - 0.5
    return int(round(px)), int(round(py))


def _mark_singular_pixels(img: np.ndarray, spec: RenderSpec, total_w: int, total_h: int,
                          offset: tuple[int, int] = (0, 0)) -> None:
    cmap = PALETTES[spec.palette]
    h, w, _ = img.shape
    for z in (0j, spec.rho / 2.0):
        px, py = _pixel_of(spec, z, total_w, total_h)
        px -= offset[0]
        py -= offset[1]
        if 0 <= px < w and 0 <= py < h:
            img[py, px] = cmap.singular_color


def _draw_disk(img: np.ndarray, px: int, py: int, radius: int, color: RGB) -> None:
    h, w, _ = img.shape
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy <= radius * radius:
                x, y = px + dx, py + dy
                if 0 <= x < w and 0 <= y < h:
                    img[y, x] = color


def _draw_star(img: np.ndarray, px: int, py: int, arm: int, color: RGB) -> None:
    h, w, _ = img.shape
    for d in range(-arm, arm + 1):
        for x, y in ((px + d, py), (px, py + d), (px + d, py + d), (px + d, py - d)):
            if 0 <= x < w and 0 <= y < h:
                img[y, x] = color


def _draw_polyline(img: np.ndarray, pts: list[tuple[int, int]], color: RGB,
                   closed: bool = False) -> None:
    h, w, _ = img.shape
    segs = list(zip(pts, pts[1:] + ([pts[0]] if closed else [])))
    for (x0, y0), (x1, y1) in segs:
        steps = max(abs(x1 - x0), abs(y1 - y0), 1)
        for s in range(steps + 1):
            x = round(x0 + (x1 - x0) * s / steps)
            y = round(y0 + (y1 - y0) * s / steps)
            if 0 <= x < w and 0 <= y < h:
                img[y, x] = color


@dataclass(frozen=True)
class OverlayData:
    centers: tuple = ()
    sstar: tuple = ()


def _draw_param_overlays(img: np.ndarray, spec: RenderSpec,
                         data: OverlayData | None) -> None:
    cmap = PALETTES[spec.palette]
    color = cmap.overlay_color
    if "c0circle" in spec.overlays:
        c = spec.rho / 2.0
        r = abs(spec.rho) / 2.0
        pts = [_pixel_of(spec, c + r * np.exp(1j * t))
               for t in np.linspace(0.0, 2.0 * math.pi, 512)]
        _draw_polyline(img, pts, color, closed=True)
    if "sstar" in spec.overlays and data is not None and data.sstar:
        pts = [_pixel_of(spec, z) for z in data.sstar]
        _draw_polyline(img, pts, color, closed=True)
    if "centers" in spec.overlays and data is not None:
        for c in data.centers:
            px, py = _pixel_of(spec, c.location)
            _draw_disk(img, px, py, 2, color)


def _draw_dyn_overlays(img: np.ndarray, spec: RenderSpec, p: ParamPoint) -> None:
    cmap = PALETTES[spec.palette]
    w, h = spec.resolution
    if "poles" in spec.overlays:
        p0 = mc.pole_base_raw(p.rho, p.lam)
        height_units = spec.viewport.width / w * h
        im_lo = spec.viewport.center.imag - height_units / 2.0
        im_hi = spec.viewport.center.imag + height_units / 2.0
        k_lo = math.floor((im_lo - p0.imag) / math.pi) - 1
        k_hi = math.ceil((im_hi - p0.imag) / math.pi) + 1
        for k in range(k_lo, k_hi + 1):
            px, py = _pixel_of(spec, p0 + 1j * math.pi * k)
            _draw_disk(img, px, py, 3, (0, 0, 0))
    if "fixedpoints" in spec.overlays:
        from .classifier import Kind, classify
        _draw_star(img, *_pixel_of(spec, 0j), 4, (255, 0, 0))
        pc = classify(p, spec.budget)
        if pc.kind in (Kind.M_LAMBDA, Kind.M_MU) and pc.period == 1:
            code, per, _, rep, _, _ = mc.fate_raw(
                p.rho, p.lam, p.mu, p.lam if pc.kind is Kind.M_LAMBDA else p.mu,
                spec.budget.max_iter, spec.budget.eps_zero, spec.budget.eps_cycle,
                MAX_PERIOD, EPS_POLE)
            if code == mc.FATE_CYCLE:
                _draw_star(img, *_pixel_of(spec, rep), 4, (255, 0, 0))


def png_bytes(pixels: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(pixels, "RGB").save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def save_render(result: RenderResult, png_path) -> dict:
    """Write the PNG plus a JSON sidecar; returns the metadata dict."""
    data = png_bytes(result.pixels)
    with open(png_path, "wb") as fh:
        fh.write(data)
    meta = {
        "digest": result.digest,
        "plane": result.spec.plane,
        "rho": _cstr(result.spec.rho),
        "lambda": _cstr(result.spec.lam) if result.spec.lam is not None else None,
        "viewport": {"center": _cstr(result.spec.viewport.center),
                     "width": result.spec.viewport.width},
        "resolution": list(result.spec.resolution),
        "budget": {"max_iter": result.spec.budget.max_iter,
                   "cycle_window": result.spec.budget.cycle_window,
                   "eps_cycle": result.spec.budget.eps_cycle,
                   "eps_zero": result.spec.budget.eps_zero},
        "palette": result.spec.palette,
        "overlays": sorted(result.spec.overlays),
        "wall_time_s": result.wall_time,
        "file": str(png_path),
    }
    meta_path = str(png_path) + ".json"
    with open(meta_path, "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
