"""Command-line surface: renders, center enumeration, S_* traces, service.

Complex values are always given as "re,im" decimal pairs.  A plain-text
key=value config file can supply any long option; explicit flags win.
Exit code 0 on success, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .centers import Rect, enumerate_centers, write_center_records
from .classifier import ClassifierBudget
from .errors import MerosliceError
from .render import RenderSpec, Viewport, render_dynamic_plane, render_parameter_plane, save_render


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_rect(text: str) -> Rect:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected 're0,re1,im0,im1', got {text!r}")
    try:
        return Rect(*(float(p) for p in parts))
    except (ValueError, MerosliceError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _check_rho(rho: complex) -> complex:
    if not 0.0 < abs(rho) < 1.0:
        raise argparse.ArgumentTypeError("rho outside punctured unit disk")
    return rho


def parse_rho(text: str) -> complex:
    return _check_rho(parse_complex(text))


def _load_config(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill options still at None from the config file, converting types."""
    if not getattr(args, "config", None):
        return
    cfg = _load_config(args.config)
    converters = {a.dest: a.type for a in parser._actions}
    for key, raw in cfg.items():
        if not hasattr(args, key) or getattr(args, key) is not None:
            continue
        conv = converters.get(key)
        setattr(args, key, conv(raw) if conv else raw)


def _budget(args) -> ClassifierBudget:
    if getattr(args, "budget", None):
        return ClassifierBudget(max_iter=args.budget)
    return ClassifierBudget()


def _common_render_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--center", type=parse_complex, default=None)
    sub.add_argument("--width", type=float, default=None)
    sub.add_argument("--px", type=int, default=None)
    sub.add_argument("--py", type=int, default=None)
    sub.add_argument("--budget", type=int, default=None)
    sub.add_argument("--workers", type=int, default=None)
    sub.add_argument("--overlays", type=str, default=None,
                     help="comma list: centers,sstar,c0circle,poles,fixedpoints")
    sub.add_argument("--out", type=str, default=None)
    sub.add_argument("--config", type=str, default=None)


def _overlay_set(args) -> frozenset:
    if not getattr(args, "overlays", None):
        return frozenset()
    return frozenset(s.strip() for s in args.overlays.split(",") if s.strip())


def cmd_render_param(args, parser) -> int:
    _merge_config(args, parser)
    if args.rho is None:
        parser.error("--rho is required")
    center = args.center if args.center is not None else 2.25 * args.rho
    width = args.width if args.width is not None else 7.5 * abs(args.rho)
    px = args.px or 512
    py = args.py or px
    spec = RenderSpec("param", args.rho, viewport=Viewport(center, width),
                      resolution=(px, py), budget=_budget(args),
                      overlays=_overlay_set(args))
    result = render_parameter_plane(spec, workers=args.workers or 1)
    out = Path(args.out or f"param_{result.digest}.png")
    meta = save_render(result, out)
    print(f"wrote {out} ({meta['wall_time_s']:.2f}s, digest {result.digest})")
    return 0


def cmd_render_dyn(args, parser) -> int:
    _merge_config(args, parser)
    if args.rho is None or args.lam is None:
        parser.error("--rho and --lambda are required")
    center = args.center if args.center is not None else 0j
    width = args.width if args.width is not None else 8.0
    px = args.px or 512
    py = args.py or px
    spec = RenderSpec("dyn", args.rho, lam=args.lam, viewport=Viewport(center, width),
                      resolution=(px, py), budget=_budget(args),
                      overlays=_overlay_set(args))
    result = render_dynamic_plane(spec, workers=args.workers or 1)
    out = Path(args.out or f"dyn_{result.digest}.png")
    meta = save_render(result, out)
    print(f"wrote {out} ({meta['wall_time_s']:.2f}s, digest {result.digest})")
    return 0


def cmd_centers(args, parser) -> int:
    _merge_config(args, parser)
    if args.rho is None or args.window is None:
        parser.error("--rho and --window are required")
    window: Rect = args.window
    for z, name in ((0j, "0"), (args.rho / 2.0, "rho/2")):
        if window.contains(z):
            print(f"error: window contains the singular parameter {name}", file=sys.stderr)
            return 2
    res = enumerate_centers(args.rho, window, max_order=args.max_order,
                            k_range=(args.k_min, args.k_max))
    out = Path(args.out or "centers.txt")
    write_center_records(out, res.centers)
    print(f"wrote {len(res.centers)} centers to {out} ({len(res.failures)} seed failures)")
    return 0


def cmd_sstar(args, parser) -> int:
    _merge_config(args, parser)
    if args.rho is None:
        parser.error("--rho is required")
    from .koenigs import trace_s_star

    pts = trace_s_star(args.rho, args.n)
    out = Path(args.out or "sstar.txt")
    with open(out, "w", encoding="ascii") as fh:
        for z in pts:
            fh.write(f"{z.real!r},{z.imag!r}\n")
    print(f"wrote {len(pts)} trace points to {out}")
    return 0


def cmd_serve(args, parser) -> int:
    _merge_config(args, parser)
    import uvicorn

    from .service import create_app

    presets = args.rho_preset or [complex(2.0 / 3.0)]
    frontend = args.frontend
    if frontend is None and Path("frontend/index.html").exists():
        frontend = "frontend"
    app = create_app(presets, tile_cache_dir=args.tile_cache,
                     queue_limit=args.queue_limit, frontend_dir=frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meroslice")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("render-param", help="render a parameter-plane classification")
    sp.add_argument("--rho", type=parse_rho, default=None)
    _common_render_flags(sp)
    sp.set_defaults(_subparser=sp, func=cmd_render_param)

    sd = subs.add_parser("render-dyn", help="render one map's dynamic plane")
    sd.add_argument("--rho", type=parse_rho, default=None)
    sd.add_argument("--lambda", dest="lam", type=parse_complex, default=None)
    _common_render_flags(sd)
    sd.set_defaults(_subparser=sd, func=cmd_render_dyn)

    sc = subs.add_parser("centers", help="enumerate virtual centers into a records file")
    sc.add_argument("--rho", type=parse_rho, default=None)
    sc.add_argument("--window", type=parse_rect, default=None,
                    help="re0,re1,im0,im1")
    sc.add_argument("--max-order", dest="max_order", type=int, default=3)
    sc.add_argument("--k-min", dest="k_min", type=int, default=-5)
    sc.add_argument("--k-max", dest="k_max", type=int, default=5)
    sc.add_argument("--out", type=str, default=None)
    sc.add_argument("--config", type=str, default=None)
    sc.set_defaults(_subparser=sc, func=cmd_centers)

    ss = subs.add_parser("sstar", help="trace the S_* curve")
    ss.add_argument("--rho", type=parse_rho, default=None)
    ss.add_argument("--n", type=int, default=64)
    ss.add_argument("--out", type=str, default=None)
    ss.add_argument("--config", type=str, default=None)
    ss.set_defaults(_subparser=ss, func=cmd_sstar)

    sv = subs.add_parser("serve", help="run the HTTP tile/query service")
    sv.add_argument("--host", type=str, default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8750)
    sv.add_argument("--rho-preset", dest="rho_preset", type=parse_rho,
                    action="append", default=None)
    sv.add_argument("--tile-cache", dest="tile_cache", type=str, default=None)
    sv.add_argument("--queue-limit", dest="queue_limit", type=int, default=256)
    sv.add_argument("--frontend", type=str, default=None,
                    help="directory with the built explorer (index.html + dist/)")
    sv.add_argument("--config", type=str, default=None)
    sv.set_defaults(_subparser=sv, func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, args._subparser)
    except MerosliceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
