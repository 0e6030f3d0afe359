"""Command-line front end.

Exit codes: 0 pass, 1 failed claim, 2 input or schema error, 3 resource error.
Reports are JSON documents on stdout (or ``--out``); human summaries go to
stderr.  ``--format table`` emits comma-separated tables instead.
Relative ``--out`` paths are resolved against ``$SPHERECONE_OUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import complex as cx
from . import conformal as cf
from . import geodesics as geo
from . import verify as vf
from .errors import ResourceError, SchemaError, ValidationError

OUT_DIR_ENV = "SPHERECONE_OUT_DIR"

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


# -- argument helpers --------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _tolerance(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {key!r} needs a number, got {val!r}") from None


def _out_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, out) -> None:
    if out:
        _out_path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(doc) -> str:
    return json.dumps(vf._clean(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _envelope(command: str, config: dict) -> dict:
    return {"tool": "spherecone", "version": __version__, "command": command, "config": config}


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _cone_lines(c: cx.SurfaceComplex) -> list[str]:
    lines = []
    for e in c.cone_report().singular:
        lines.append(f"  cone {e.name}: {e.angle:.12g} rad ({math.degrees(e.angle):.6g} deg), atom {e.atom:.6g}")
    return lines


# -- commands -------------------------------------------------------------------


def cmd_build(args) -> int:
    params = {}
    if args.kind == "join-double":
        params["N"] = 10.0 if args.n is None else args.n
    elif args.kind == "triangle-double":
        params["eps"] = 0.2 if args.eps is None else args.eps
    elif args.n is not None or args.eps is not None:
        raise ValidationError("octahedron takes no parameters")
    c = vf.build_construction(args.kind, params)
    _emit(cx.serialize(c), args.out)
    _say(f"{args.kind}: {c.n_triangles} triangles, {c.n_vertices} vertices, area {cx.area(c):.12g}")
    for line in _cone_lines(c):
        _say(line)
    _say(f"  Gauss-Bonnet residual {cx.gauss_bonnet_check(c):.3e}")
    return EXIT_PASS


def _load_surface(path: str) -> cx.SurfaceComplex:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return cx.deserialize(text)


def cmd_analyze(args) -> int:
    c = _load_surface(args.surface)
    depths = args.depths or [3, 4, 5]
    cfg = {"surface": str(args.surface), "depths": depths, "seed": args.seed, "max_nodes": args.max_nodes}
    rep = c.cone_report()
    doc = _envelope("analyze", cfg)
    doc["area"] = cx.area(c)
    doc["gauss_bonnet_residual"] = cx.gauss_bonnet_check(c)
    doc["cone_angles"] = [{"vertex": e.name, "angle": e.angle, "atom": e.atom} for e in rep.singular]
    est = geo.diameter_estimate(c, depths, seed=args.seed, max_nodes=args.max_nodes)
    doc["diameter"] = est.as_dict()
    _say(f"area {doc['area']:.12g}, Gauss-Bonnet residual {doc['gauss_bonnet_residual']:.3e}")
    for line in _cone_lines(c):
        _say(line)
    _say(f"  diameter {est.extrapolated_diameter:.6f} +- {est.error_band:.2e} (graph {est.graph_diameter:.6f})")
    growth = None
    if args.growth:
        if args.growth not in c.labels:
            raise ValidationError(f"no vertex labeled {args.growth!r}; labels: {sorted(c.labels)}")
        gd = vf.GROWTH_DEFAULTS.get(c.meta.get("kind"), {})
        radii = args.radii or list(gd.get("radii", (0.1, 0.15, 0.2, 0.25, 0.3)))
        gdepths = args.depths or list(gd.get("depths", (4, 5)))
        growth = geo.growth_extrapolated(c, args.growth, radii, gdepths, max_nodes=args.max_nodes)
        theta = rep.angle(args.growth)
        doc["growth"] = {
            "vertex": args.growth,
            "theta": theta,
            "radii": list(radii),
            "depths": list(gdepths),
            "boundary_limit": growth.boundary_limit,
            "boundary_band": growth.boundary_band,
            "area_limit": growth.area_limit,
            "area_band": growth.area_band,
            "table": growth.as_rows(),
        }
        _say(
            f"  growth at {args.growth}: theta {theta:.6f} ({math.degrees(theta):.4g} deg), "
            f"L/r -> {growth.boundary_limit:.6f}, 2A/r^2 -> {growth.area_limit:.6f}"
        )
    if args.format == "table":
        if growth is None:
            rows = [(e.name, e.angle, e.atom) for e in rep.singular]
            _emit(_csv(["vertex", "angle", "atom"], rows), args.out)
        else:
            rows = [(r["r"], r["boundary_over_r"], r["two_area_over_r2"]) for r in growth.as_rows()]
            _emit(_csv(["r", "boundary_over_r", "two_area_over_r2"], rows), args.out)
    else:
        _emit(_dump(doc), args.out)
    return EXIT_PASS


def _metric(ident: str) -> cf.ConformalMetric:
    p = Path(ident)
    if ident.endswith(".json") or p.is_file():
        if not p.is_file():
            raise ValidationError(f"grid file {ident} not found")
        return cf.load_grid(p)
    return cf.catalog_metric(ident)


def _points(values) -> list[tuple[float, float]]:
    pts = []
    for v in values:
        xy = _floats(v)
        if len(xy) != 2:
            raise ValidationError(f"point {v!r} must be x,y")
        pts.append((xy[0], xy[1]))
    return pts


def cmd_conformal(args) -> int:
    m = _metric(args.metric)
    sub = args.action
    cfg = {"metric": m.describe(), "action": sub, "values": list(args.values), "radius": args.radius}
    doc = _envelope("conformal", cfg)
    header, rows = None, []
    if sub == "area":
        R = math.inf if args.radius is None else args.radius
        res = cf.area(m, R)
        doc["area"] = res.as_dict()
        header = ["r_inner", "r_outer", "contribution"]
        rows = list(res.shells)
        state = "converged" if res.converged else f"NOT converged ({res.message})"
        _say(f"{m.describe()}: area {res.value:.12g} ({state})")
    elif sub == "curvature":
        pts = _points(args.values) if args.values else [(0.5, 0.0), (0.0, 1.0)]
        ks = [float(cf.gauss_curvature(m, x, y)) for x, y in pts]
        R = math.inf if args.radius is None else args.radius
        tot = cf.total_curvature(m, R)
        doc["points"] = [{"x": x, "y": y, "K": k} for (x, y), k in zip(pts, ks)]
        doc["total_curvature"] = tot.as_dict()
        doc["note"] = cf.CURVATURE_SIGN_NOTE
        header = ["x", "y", "K"]
        rows = [(x, y, k) for (x, y), k in zip(pts, ks)]
        _say(f"{m.describe()}: total curvature {tot.value:.12g}")
        _say(f"  note: {cf.CURVATURE_SIGN_NOTE}")
    elif sub == "residual":
        ext = 2.0 if args.radius is None else args.radius
        rr = cf.supersolution_residual(m, cf.GridSpec(-ext, ext, -ext, ext, args.grid_n))
        doc["residual"] = {
            "max": rr.max_residual,
            "tolerance": rr.tolerance,
            "n_points": rr.n_points,
            "n_violations": len(rr.violations),
            "violations": rr.violations[:100],
        }
        header = ["x", "y", "residual"]
        rows = rr.violations
        _say(f"{m.describe()}: max residual {rr.max_residual:.3e}, {len(rr.violations)} violations over {rr.n_points} points")
    elif sub == "circles":
        radii = [float(v) for v in args.values] or args.radii or [0.5, 1.0, 2.0, 4.0]
        lengths = [cf.circle_length(m, r) for r in radii]
        doc["circles"] = [{"r": r, "length": ell} for r, ell in zip(radii, lengths)]
        header = ["r", "length"]
        rows = list(zip(radii, lengths))
    elif sub == "diagnose":
        sched = args.radii or list(np.geomspace(0.1, 1000.0, 24))
        d = cf.completion_diagnostic(m, sched)
        doc["diagnostic"] = d.as_dict()
        header = ["r", "length"]
        rows = list(zip(d.radii, d.circle_lengths))
        _say(f"{m.describe()}: {d.verdict}; Hoelder integral {d.hoelder_integral:.10g} vs area {d.area:.10g}")
    elif sub == "romney-growth":
        if not isinstance(m, cf.RomneyMetric):
            raise ValidationError("romney-growth applies to the romney metric only")
        rs = [float(v) for v in args.values] or args.radii or [0.2, 0.1, 0.05]
        table = cf.romney_ball_growth(rs)
        doc["growth"] = [
            {"r": t.r, "rho": t.rho, "ball_area": t.ball_area, "ratio": t.ratio, "quadrature_area": t.quadrature_area}
            for t in table
        ]
        header = ["r", "rho", "ball_area", "ratio", "quadrature_area"]
        rows = [(t.r, t.rho, t.ball_area, t.ratio, t.quadrature_area) for t in table]
    if args.format == "table":
        _emit(_csv(header, rows), args.out)
    else:
        _emit(_dump(doc), args.out)
    return EXIT_PASS


def _suite_kwargs(suite: str, args) -> dict:
    kw = {}
    tol = dict(args.tolerance or [])
    if tol:
        vf.resolve_tolerances(tol)
        kw["tolerances"] = tol
    if suite == "prop-diameter":
        if args.eps is not None:
            kw["eps"] = args.eps
        if args.depths:
            kw["depths"] = args.depths
        kw["max_nodes"] = args.max_nodes
    elif suite == "prop-area":
        if args.n is not None:
            kw["N"] = args.n
    elif suite == "corollary":
        if args.eps is not None:
            kw["eps_q"] = args.eps
        if args.n is not None:
            kw["N"] = args.n
        if args.depths:
            kw["depths"] = args.depths
    elif suite == "theorem-complete":
        if args.profile:
            kw["profile_id"] = args.profile
    elif suite == "angle-growth":
        kw["construction"] = args.construction
        params = {}
        if args.n is not None:
            params["N"] = args.n
        if args.eps is not None:
            params["eps"] = args.eps
        kw["params"] = params
        if args.vertex:
            kw["vertex"] = args.vertex
        if args.radii:
            kw["radii"] = args.radii
        if args.depths:
            kw["depths"] = args.depths
        kw["max_nodes"] = args.max_nodes
    elif suite == "smoothing":
        if args.s is not None:
            kw["s"] = args.s
        if args.delta is not None:
            kw["delta"] = args.delta
    return kw


def cmd_verify(args) -> int:
    if args.suite == "all":
        tol = dict(args.tolerance or [])
        reports = vf.run_all(tolerances=tol or None)
    else:
        reports = [vf.SUITES[args.suite](**_suite_kwargs(args.suite, args))]
    for r in reports:
        _say(r.summary())
    ok = all(r.passed for r in reports)
    if args.suite == "all":
        doc = _envelope("verify", {"suite": "all"})
        doc["reports"] = [r.to_document() for r in reports]
        doc["verdict"] = "pass" if ok else "fail"
        text = _dump(doc)
    else:
        doc = reports[0].to_document()
        doc["command"] = "verify"
        text = _dump(doc)
    if args.format == "table":
        rows = [(r.claim_id, c.name, c.computed, c.target, c.tolerance, c.relation, c.passed) for r in reports for c in r.checks]
        text = _csv(["claim", "check", "computed", "target", "tolerance", "relation", "passed"], rows)
    _emit(text, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spherecone", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sp = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", help="write the document here instead of stdout")
        if fmt:
            p.add_argument("--format", choices=["report", "table"], default="report")

    b = sp.add_parser("build", help="build a construction and write its surface document")
    b.add_argument("kind", choices=["join-double", "triangle-double", "octahedron"])
    b.add_argument("--n", type=float, help="interval length N (join-double)")
    b.add_argument("--eps", type=float, help="short side eps (triangle-double)")
    common(b, fmt=False)
    b.set_defaults(func=cmd_build)

    a = sp.add_parser("analyze", help="area, cone angles, diameter and optional growth of a surface file")
    a.add_argument("surface")
    a.add_argument("--depths", type=_ints)
    a.add_argument("--depth", type=int, help="single depth (shorthand for --depths d)")
    a.add_argument("--growth", metavar="VERTEX")
    a.add_argument("--radii", type=_floats)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--max-nodes", type=int, default=geo.MAX_NODES)
    common(a)
    a.set_defaults(func=cmd_analyze)

    c = sp.add_parser("conformal", help="quadrature and diagnostics for conformal metrics")
    c.add_argument("metric", help="round, flat, romney, scaled-round(lam), finger(n, seed) or a grid file")
    c.add_argument("action", choices=["area", "curvature", "residual", "circles", "diagnose", "romney-growth"])
    c.add_argument("values", nargs="*", help="radii, or x,y points for curvature")
    c.add_argument("--radius", type=float, help="outer radius (area, curvature) or half-width (residual)")
    c.add_argument("--radii", type=_floats)
    c.add_argument("--n", dest="grid_n", type=int, default=200, help="residual grid size per side")
    common(c)
    c.set_defaults(func=cmd_conformal)

    v = sp.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=list(vf.SUITES) + ["all"])
    v.add_argument("--eps", type=float, help="eps (prop-diameter, triangle-double) or eps_q (corollary)")
    v.add_argument("--n", type=float, help="N (prop-area, corollary, join-double)")
    v.add_argument("--depths", type=_ints)
    v.add_argument("--depth", type=int)
    v.add_argument("--radii", type=_floats)
    v.add_argument("--construction", default="join-double", choices=list(vf.GROWTH_DEFAULTS))
    v.add_argument("--vertex")
    v.add_argument("--profile")
    v.add_argument("--s", type=float)
    v.add_argument("--delta", type=float)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--max-nodes", type=int, default=geo.MAX_NODES)
    v.add_argument("--tolerance", type=_tolerance, action="append", metavar="KEY=VALUE")
    common(v)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "depth", None) is not None:
        if args.depths:
            _say("error: give --depth or --depths, not both")
            return EXIT_INPUT
        args.depths = [args.depth]
    try:
        return args.func(args)
    except SchemaError as exc:
        _say(f"error: schema: {exc}")
        return EXIT_INPUT
    except ValidationError as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT
    except ResourceError as exc:
        _say(f"error: resources: {exc}")
        return EXIT_RESOURCE
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
