"""hrtlab command line.

Exit codes: 0 success, 1 negative finding (extra maxima, failed checks,
not a (1,n) configuration), 2 usage or parse error, 3 numerical failure,
4 inconclusive, 5 singular or duplicate base.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from . import config as C
from . import search as S
from .checks import SUITES, run_suites
from .errors import (DegenerateConfig, DuplicatePoint, HRTLabError, InvalidSpec, NotOneN, QuadratureFailure,
                     SingularBase, TailBoundTooLarge, ZeroWindow)
from .extension import build_extension, eval_F
from .formats import (RunManifest, default_quadrature, dump_json, fmt, load_points, load_window_spec, parse_pair,
                      write_text)
from .gram import gram_matrix, independence_test
from .transform import stft
from .window import make_window

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_NUMERIC, EXIT_INCONCLUSIVE, EXIT_SINGULAR = 0, 1, 2, 3, 4, 5

_VERDICT_EXIT = {S.AT_BASE: EXIT_OK, S.EXTRA: EXIT_NEGATIVE, S.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"hrtlab: {msg}", file=sys.stderr)


# --- argument helpers ---------------------------------------------------------

def _window(args, name="window"):
    try:
        spec = load_window_spec(getattr(args, name), getattr(args, "scale", None))
        return make_window(spec)
    except (InvalidSpec, ZeroWindow, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _points(args, sort_default=False):
    try:
        pts = load_points(args.points)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if sort_default and not getattr(args, "keep_order", False):
        pts = sorted(pts)
    return pts


def _pair(text: str):
    try:
        return parse_pair(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _rect(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad --rect {text!r}") from exc
    if len(vals) == 1:
        vals = [-abs(vals[0]), abs(vals[0])] * 2
    if len(vals) != 4 or not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise UsageError("--rect needs a_min,a_max,b_min,b_max with min < max (or a single half-width)")
    return tuple(vals)


def _evaluator(args):
    g = _window(args)
    cfg = C.validate(_points(args), args.geom_tol)
    return build_extension(g, cfg, default_quadrature())


def _complex_str(z: complex) -> str:
    return f"{fmt(z.real)},{fmt(z.imag)}"


def _manifest(args, command: str) -> RunManifest:
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "threads")}
    for key in ("window", "points"):
        if key in inputs and Path(str(inputs[key])).is_file():
            inputs[key] = str(Path(inputs[key]).resolve())
    inputs["quad_abs_tol"] = default_quadrature().abs_tol
    return RunManifest(command, inputs, __version__)


# --- commands -----------------------------------------------------------------

def cmd_stft(args) -> int:
    g = _window(args)
    f = _window(args, "signal") if args.signal else g
    x, y = _pair(args.at)
    z = stft(f, g, x, y, default_quadrature(), method=args.method)
    print(_complex_str(z))
    return EXIT_OK


def cmd_gram(args) -> int:
    g = _window(args)
    cfg = C.validate(_points(args), args.geom_tol)
    q = default_quadrature()
    G = gram_matrix(g, cfg, q)
    verdict = independence_test(g, cfg, args.tol, q)
    out = dict(G.to_dict(), det=G.det(), independence=verdict.to_dict())
    text = dump_json(out)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval_f(args) -> int:
    e = _evaluator(args)
    a, b = _pair(args.at)
    v = eval_F(e, a, b)
    print(fmt(v.F))
    return EXIT_OK


def _write_grid_outputs(grid, e, maxima, outdir: Path, man: RunManifest, figure: bool, stem="field"):
    csv = write_text(outdir / f"{stem}.csv", grid.to_csv(fmt))
    man.add_output(csv)
    if figure:
        from .plotting import plot_field

        png = plot_field(grid, outdir / f"{stem}.png", e.points, maxima, title=e.window.label)
        man.add_output(png)


def cmd_scan(args) -> int:
    e = _evaluator(args)
    grid = S.scan(e, _rect(args.rect), args.step, args.threads)
    outdir = Path(args.out)
    man = _manifest(args, "scan")
    _write_grid_outputs(grid, e, (), outdir, man, not args.no_figure)
    man.write(outdir / "manifest.json")
    a, b, v = grid.argmax()
    print(f"max F = {fmt(v)} at ({fmt(a)}, {fmt(b)}); {grid.shape[1]}x{grid.shape[0]} nodes written to {outdir}")
    return EXIT_OK


def cmd_certify(args) -> int:
    e = _evaluator(args)
    cert = S.certify(e, _rect(args.rect), args.delta, args.step, args.threads)
    outdir = Path(args.out)
    man = _manifest(args, "certify")
    cjson = write_text(outdir / "certificate.json", dump_json(cert.to_dict()))
    man.add_output(cjson)
    _write_grid_outputs(cert.grid, e, cert.maximizers, outdir, man, not args.no_figure)
    man.write(outdir / "manifest.json")
    print(f"{cert.verdict}: {len(cert.maximizers)} maximizer cluster(s); escape radius "
          f"{fmt(cert.escape_radius)}{'' if cert.escape_radius_certified else ' (uncertified)'}")
    return _VERDICT_EXIT[cert.verdict]


def cmd_verify(args) -> int:
    names = [s.strip() for s in args.suite.split(",") if s.strip()]
    bad = [n for n in names if n != "all" and n not in SUITES]
    if bad or not names:
        raise UsageError(f"unknown suite(s) {', '.join(bad) or '(none)'}; choose from all, {', '.join(SUITES)}")
    e = _evaluator(args)
    checks = run_suites(e, names)
    report = {
        "window": e.window.label,
        "points": e.base.as_lists(),
        "suites": names,
        "checks": [c.to_dict() for c in checks],
        "passed": all(c.passed for c in checks),
    }
    text = dump_json(report)
    if args.out:
        write_text(args.out, text)
    for c in checks:
        val = "-" if c.value is None else fmt(c.value)
        tol = "-" if c.tol is None else fmt(c.tol)
        print(f"{c.status.upper():4s} {c.suite:9s} {c.name}: {val} (tol {tol}) {c.detail}".rstrip())
    failed = [c for c in checks if not c.passed]
    if failed:
        _err(f"{len(failed)} check(s) failed: " + "; ".join(f"{c.suite}/{c.name}" for c in failed))
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = C.validate(_points(args, sort_default=True), args.geom_tol)
    cls = C.classify(cfg)
    print(str(cls))
    sys.stdout.write(dump_json({"points": cfg.as_lists(), "classification": cls.to_dict()}))
    return EXIT_OK


def cmd_normalize(args) -> int:
    cfg = C.validate(_points(args, sort_default=True), args.geom_tol)
    form = args.as_
    if form == "auto":
        form = "three" if len(cfg) == 3 else "1n"
    try:
        m, img = C.normalize_three(cfg) if form == "three" else C.normalize_1n(cfg)
    except NotOneN as exc:
        _err(str(exc))
        return EXIT_NEGATIVE
    except (DegenerateConfig, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(dump_json({
        "form": form,
        "input": cfg.as_lists(),
        "map": m.to_dict(),
        "normal_form": img.as_lists(),
        "classification": C.classify(cfg).to_dict(),
    }))
    return EXIT_OK


def cmd_escape_radius(args) -> int:
    e = _evaluator(args)
    res = S.escape_search(e, args.delta)
    print(f"{fmt(res.radius)}{'' if res.certified else ' uncertified'}")
    return EXIT_OK if res.certified else EXIT_INCONCLUSIVE


# --- parser -------------------------------------------------------------------

def _add_window(p, required=True):
    p.add_argument("--window", required=required,
                   help="window kind (gaussian, exp, rational) or a window spec file")
    p.add_argument("--scale", type=float, default=None, help="dilation of the window")


def _add_points(p):
    p.add_argument("--points", required=True, help="points file or inline list like '0,0;0,1'")
    p.add_argument("--geom-tol", type=float, default=1e-9, help="minimum distance between points")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hrtlab", description="Gramians and extension functions of finite Gabor systems.")
    ap.add_argument("--version", action="version", version=f"hrtlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stft", help="evaluate V_g f(x, y)")
    _add_window(p)
    p.add_argument("--signal", help="analysed function f (defaults to the window)")
    p.add_argument("--at", required=True, help="x,y")
    p.add_argument("--method", choices=["auto", "quadrature"], default="auto")
    p.set_defaults(func=cmd_stft)

    p = sub.add_parser("gram", help="Gramian and independence verdict as JSON")
    _add_window(p)
    _add_points(p)
    p.add_argument("--tol", type=float, default=1e-8, help="independence threshold on the smallest eigenvalue")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("eval-f", help="evaluate F(a, b)")
    _add_window(p)
    _add_points(p)
    p.add_argument("--at", required=True, help="a,b")
    p.set_defaults(func=cmd_eval_f)

    for name, func, helptext in (("scan", cmd_scan, "sample F on a grid"),
                                 ("certify", cmd_certify, "locate the maximizers of F and issue a verdict")):
        p = sub.add_parser(name, help=helptext)
        _add_window(p)
        _add_points(p)
        p.add_argument("--rect", default="-4,4,-4,4", help="a_min,a_max,b_min,b_max")
        p.add_argument("--step", type=float, default=0.05)
        if name == "certify":
            p.add_argument("--delta", type=float, default=S.DEFAULT_DELTA)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
        p.add_argument("--no-figure", action="store_true", help="skip the PNG heatmap")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="run residual suites")
    _add_window(p)
    _add_points(p)
    p.add_argument("--suite", default="all", help=f"comma-separated: all, {', '.join(SUITES)}")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="collinear, (n,m) configuration or general")
    _add_points(p)
    p.add_argument("--keep-order", action="store_true", help="do not sort the points")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("normalize", help="symplectic normal form")
    _add_points(p)
    p.add_argument("--as", dest="as_", choices=["auto", "three", "1n"], default="auto")
    p.add_argument("--keep-order", action="store_true", help="do not sort the points")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("escape-radius", help="radius beyond which F < 1 - delta")
    _add_window(p)
    _add_points(p)
    p.add_argument("--delta", type=float, default=S.DEFAULT_DELTA)
    p.set_defaults(func=cmd_escape_radius)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except (SingularBase, DuplicatePoint) as exc:
        _err(str(exc))
        return EXIT_SINGULAR
    except (QuadratureFailure, TailBoundTooLarge) as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    except (InvalidSpec, DegenerateConfig, ValueError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except HRTLabError as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    except ArithmeticError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
