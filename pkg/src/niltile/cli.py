"""Command-line front end.

Every command reads and writes versioned JSON documents of the form
``{"schema_version": 1, "kind": ..., "data": ..., "checks": {...}}``.
Exit status: 0 when every check passed, 2 for malformed input, 3 for a
failed check or a library invariant error, 4 when a resource cap is hit.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import bundle, complex as cpx, corpus, cutproject, delaunay, shape
from .cohomology import cohomology as cellular_cohomology, pe_cohomology_periodic
from .nilgroup import Group, StructureError
from .render import svg_points, svg_tiling
from .scalar import as_exact, exact_sign, format_scalar, parse_scalar

SCHEMA_VERSION = 1
KINDS = ("tiling", "complex", "shape", "pointset", "lattice", "report")


class SchemaError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


# -- documents ----------------------------------------------------------------


def _clean(x):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def make_doc(kind, data, checks=None):
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "data": data, "checks": dict(checks or {})}


def dump_doc(doc) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def load_doc(path, kinds=None):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise SchemaError(f"{path}: missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema_version {doc['schema_version']!r}")
    if doc.get("kind") not in KINDS or "data" not in doc:
        raise SchemaError(f"{path}: bad or missing kind/data")
    if kinds is not None and doc["kind"] not in kinds:
        raise SchemaError(f"{path}: expected a {' or '.join(kinds)} document, got {doc['kind']}")
    return doc


def _decode(what, fn, data):
    try:
        return fn(data)
    except (KeyError, TypeError, IndexError, AttributeError) as exc:
        raise SchemaError(f"malformed {what}: {exc!r}") from exc
    except ValueError as exc:
        if isinstance(exc, (cpx.TilingError, StructureError)):
            raise
        raise SchemaError(f"malformed {what}: {exc}") from exc


def load_tiling(path):
    return _decode("tiling", cpx.TilingInstance.from_json, load_doc(path, ["tiling"])["data"])


def load_pointset(path):
    data = load_doc(path, ["pointset"])["data"]
    ps = _decode("pointset", delaunay.PointSet.from_json, data)
    if data.get("region") is not None:
        ps.region = _decode("region", lambda r: tuple((parse_scalar(a), parse_scalar(b)) for a, b in r),
                            data["region"])
    return ps


def load_shape(path):
    data = load_doc(path, ["shape"])["data"]
    s = _decode("shape", shape.ShapeFunction.from_json, data["shape"] if "shape" in data else data)
    cx = _decode("complex", cpx.CellComplex.from_json, data["complex"]) if "complex" in data else None
    return s, cx


def tiling_data(t):
    return t.to_json()


def pointset_data(ps, extra=None):
    d = ps.to_json()
    if ps.region is not None:
        d["region"] = [[format_scalar(lo), format_scalar(hi)] for lo, hi in ps.region]
    d.update(extra or {})
    return d


def shape_data(s, cx, extra=None):
    d = {"shape": s.to_json(), "complex": cx.to_json()}
    d.update(extra or {})
    return d


def _split(checks):
    """Boolean entries are checks; anything else is a measurement."""
    bools = {k: bool(v) for k, v in checks.items() if isinstance(v, bool)}
    other = {k: v for k, v in checks.items() if not isinstance(v, bool)}
    return bools, other


def exact_arg(text):
    try:
        return parse_scalar(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact scalar: {text!r}") from exc


# -- commands -------------------------------------------------------------------


def cmd_gen_periodic(a):
    if a.corpus:
        if a.corpus not in corpus.CORPUS:
            raise SchemaError(f"unknown corpus tiling {a.corpus!r}; choose from {sorted(corpus.CORPUS)}")
        t = corpus.CORPUS[a.corpus]()
    elif a.group == "heis":
        t = cpx.heisenberg_cube_tiling(a.size, a.size, a.nz or 2 * a.size - 1)
    elif a.group == "square":
        t = cpx.square_tiling(a.size, a.size, triangulated=not a.plain)
    else:
        t = cpx.interval_tiling(a.size)
    if a.svg:
        _write(a.svg, svg_tiling(t))
    counts = [len(t.cell_vertices[k]) for k in range(1, t.dim + 1)]
    return make_doc("tiling", tiling_data(t), {"nonempty": bool(t.vertices) and all(counts)})


def cmd_gen_cutproject(a):
    if a.region:
        region = _decode("region", cutproject.parse_region, a.region)
    else:
        h = a.width / 2
        region = ((-h, h),) * 3
    spec = cutproject.ModelSetSpec(region, a.window)
    ps = cutproject.generate(spec)
    in_window = all(
        exact_sign(c + spec.w) >= 0 and exact_sign(spec.w - c) >= 0
        for p in cutproject.model_set_points(spec) for c in p.star)
    if a.svg:
        _write(a.svg, svg_points(ps.points, title="cut-and-project set"))
    return make_doc("pointset", pointset_data(ps, {"window": format_scalar(spec.w)}),
                    {"star_in_window": in_window})


def _region_of(ps, text):
    if text:
        return _decode("region", cutproject.parse_region, text)
    if ps.region is None:
        raise SchemaError("point set has no region; pass --region")
    return ps.region


def cmd_check_net(a):
    ps = load_pointset(a.input)
    rep = delaunay.check_net(ps, a.mu, a.eps, _region_of(ps, a.region))
    return make_doc("report", {"net": rep.to_json(), "mu": format_scalar(a.mu), "eps": format_scalar(a.eps)},
                    {"discrete": rep.is_discrete, "dense": rep.is_dense})


def cmd_check_flc(a):
    ps = load_pointset(a.input)
    rep = cutproject.flc_census(ps, a.r, _region_of(ps, a.region))
    data = rep.to_json()
    if not a.representatives:
        data.pop("representatives")
    data["r"] = format_scalar(a.r)
    return make_doc("report", {"census": data}, {"has_centers": rep.centers > 0})


def cmd_check_generic(a):
    ps = load_pointset(a.input)
    res = delaunay.delaunay_complex(ps)
    bad = delaunay.unprotected_simplices(ps, res, a.delta)
    data = {"simplices": len(res.simplices), "min_protection": res.min_protection,
            "unprotected": [list(s) for s in bad], "delta": format_scalar(a.delta),
            "cospherical_groups": [sorted(g) for g in res.cospherical_groups]}
    return make_doc("report", data, {"non_degenerate": not res.degenerate, "delta_protected": not bad})


def cmd_triangulate(a):
    doc = load_doc(a.input, ["pointset", "tiling"])
    if doc["kind"] == "tiling":
        t = _decode("tiling", cpx.TilingInstance.from_json, doc["data"])
        mesh = None
        if a.eps is not None:
            eps = a.eps
            mesh = delaunay.MeshParams(a.mu, eps, a.delta if a.delta is not None else eps / 1000,
                                       a.rho if a.rho is not None else eps / 8)
        res = delaunay.triangulate_collared_prototiles(
            t, mesh, enforce_epsilon=not a.relaxed, r_factor=a.r_factor,
            max_points=a.max_points, seed=a.seed)
        checks, extra = _split(res.checks)
        data = res.to_json()
        data["checks"] = extra
        return make_doc("report", data, checks)
    ps = load_pointset(a.input)
    mesh = delaunay.MeshParams(a.mu, a.eps if a.eps is not None else 1,
                               a.delta if a.delta is not None else as_exact("1/1000"),
                               a.rho if a.rho is not None else as_exact("1/10"))
    pert = delaunay.perturb_until_generic(ps, mesh, seed=a.seed)
    res = delaunay.delaunay_complex(pert.points)
    rho2 = mesh.rho * mesh.rho
    close = all(
        exact_sign(sum((x - y) * (x - y) for x, y in zip(p, q)) - rho2) < 0
        for p, q in zip(ps.points, pert.points.points))
    bad = delaunay.unprotected_simplices(pert.points, res, mesh.delta)
    data = {"points": pointset_data(pert.points), "moved": sorted(pert.moved),
            "simplices": [list(s) for s in res.simplices], "complex": res.complex.to_json(),
            "min_protection": res.min_protection, "seed": a.seed}
    return make_doc("complex", data, {"displacement_below_rho": close, "delta_protected": not bad,
                                      "non_degenerate": not res.degenerate})


def cmd_gahler(a):
    t = load_tiling(a.input)
    cx, proj = cpx.gahler_complex(t, a.n)
    data = cx.to_json()
    data["level"] = a.n
    data["tile_classes"] = len(proj.class_keys)
    return make_doc("complex", data, {"boundary_squared_zero": cx.boundary_squares_vanish()})


def cmd_shape_extract(a):
    t = load_tiling(a.input)
    cx, proj = cpx.gahler_complex(t, a.n)
    s = shape.extract_shape(t, (cx, proj))
    ok, bad = shape.verify_cocycle(s, cx)
    return make_doc("shape", shape_data(s, cx, {"level": a.n, "witness": bad}), {"cocycle": ok})


def _need_complex(cx, path):
    if cx is None:
        raise SchemaError(f"{path}: shape document carries no complex")
    return cx


def cmd_shape_verify(a):
    s, cx = load_shape(a.input)
    ok, bad = shape.verify_cocycle(s, _need_complex(cx, a.input))
    return make_doc("report", {"witness": bad, "rational": s.is_rational()}, {"cocycle": ok})


def cmd_shape_rationalize(a):
    s, cx = load_shape(a.input)
    sq, rep = shape.rationalize(s, _need_complex(cx, a.input), a.rho, max_attempts=a.max_attempts)
    r = rep.to_json()
    checks = {k: r.pop(k) for k in ("cocycle", "rational", "within_rho")}
    r["rho"] = format_scalar(a.rho)
    return make_doc("shape", shape_data(sq, cx, {"report": r}), checks)


def cmd_deform(a):
    t = load_tiling(a.tiling)
    sigma, cx_doc = load_shape(a.shape)
    cx, proj = cpx.gahler_complex(t, a.n)
    if cx_doc is not None and cx_doc.cells != cx.cells:
        raise SchemaError("shape complex does not match the tiling's collared complex")
    res = shape.deform(t, sigma, a.rho, gamma=(cx, proj), seed=a.seed, paths=a.paths)
    checks, extra = _split(res.checks)
    if a.svg:
        _write(a.svg, svg_tiling(res.tiling))
    data = tiling_data(res.tiling)
    data["measurements"] = extra
    return make_doc("tiling", data, checks)


def _elements(group, texts):
    return [_decode("element", lambda s: bundle.parse_element(group, s), x) for x in texts]


def cmd_bundle_lattice(a):
    if a.shape:
        s, _ = load_shape(a.shape)
        if not s.is_rational():
            raise CheckFailed("shape function is not rational; rationalize it first")
        lat = bundle.lattice_for_shape(s.values)
    else:
        if not a.generators:
            raise SchemaError("give generators or --shape")
        group = Group.heisenberg() if a.group == "heis" else Group.euclidean(a.dim)
        lat = bundle.lattice_containing(_elements(group, a.generators))
    return make_doc("lattice", lat.to_json(), {"closed": lat.check_closure()})


def cmd_bundle_project(a):
    t = load_tiling(a.input)
    if a.lattice:
        lat = _decode("lattice", bundle.Lattice.from_json, load_doc(a.lattice, ["lattice"])["data"])
    else:
        s = shape.extract_shape(t)
        if not s.is_rational():
            raise CheckFailed("tiling shape is not rational; pass --lattice or deform first")
        lat = bundle.lattice_for_shape(s.values)
    rep = bundle.verify_constant_fiber(t, lat)
    return make_doc("report", {"fiber": rep.to_json(), "lattice": lat.to_json()},
                    {"constant_fiber": rep.constant})


def cmd_cohomology(a):
    doc = load_doc(a.input, ["tiling", "complex"])
    extra = {}
    if doc["kind"] == "tiling":
        t = _decode("tiling", cpx.TilingInstance.from_json, doc["data"])
        if a.periodic:
            groups, extra = pe_cohomology_periodic(t, a.n, a.coeff)
            cx = None
        else:
            cx = cpx.gahler_complex(t, a.n)[0]
    else:
        cx = _decode("complex", cpx.CellComplex.from_json, doc["data"])
    checks = {}
    if cx is not None:
        checks["boundary_squared_zero"] = cx.boundary_squares_vanish()
        groups = cellular_cohomology(cx, a.coeff)
    alt = sum((-1) ** k * r for k, r in enumerate(groups.ranks))
    checks["euler_characteristic"] = cx is None or alt == cx.euler_characteristic()
    data = {"coefficients": a.coeff, "groups": groups.to_json(),
            "describe": [groups.describe(k) for k in range(len(groups.ranks))], "extra": extra}
    return make_doc("report", data, checks)


def cmd_distance(a):
    t1, t2 = load_tiling(a.t1), load_tiling(a.t2)
    d = cpx.tiling_distance(t1, t2, offset_radius=a.offset_radius, pitch=a.pitch)
    lo, hi = d.get("lower"), d.get("upper")
    return make_doc("report", {"distance": d}, {"bracket_ordered": lo is None or hi is None or lo <= hi})


# -- plumbing -------------------------------------------------------------------


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="niltile", description="Exact tilings of nilpotent groups.")
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("--out", "-o", help="output path (default stdout)")
        return sp

    gen = sub.add_parser("gen", help="generate tilings and point sets").add_subparsers(dest="what", required=True)
    g = out(gen.add_parser("periodic", help="periodic or corpus tiling"))
    g.add_argument("--group", choices=["heis", "square", "interval"], default="square")
    g.add_argument("--size", type=int, default=4)
    g.add_argument("--nz", type=int, help="layers in z for the Heisenberg tiling")
    g.add_argument("--plain", action="store_true", help="square cells instead of triangles")
    g.add_argument("--corpus", help="named fixture tiling")
    g.add_argument("--svg")
    g.set_defaults(func=cmd_gen_periodic)
    g = out(gen.add_parser("cutproject", help="cut-and-project set in the Heisenberg group"))
    g.add_argument("--region", help="x0,x1,y0,y1,z0,z1 (exact scalars)")
    g.add_argument("--width", type=exact_arg, default=as_exact(8), help="cube side when no region is given")
    g.add_argument("--window", type=exact_arg, default=as_exact("1/2"), help="window half-width")
    g.add_argument("--svg")
    g.set_defaults(func=cmd_gen_cutproject)

    chk = sub.add_parser("check", help="point set diagnostics").add_subparsers(dest="what", required=True)
    c = out(chk.add_parser("net", help="discreteness and density"))
    c.add_argument("input")
    c.add_argument("--mu", type=exact_arg, default=as_exact(1))
    c.add_argument("--eps", type=exact_arg, required=True)
    c.add_argument("--region")
    c.set_defaults(func=cmd_check_net)
    c = out(chk.add_parser("flc", help="patch classes up to translation"))
    c.add_argument("input")
    c.add_argument("--r", type=exact_arg, required=True)
    c.add_argument("--region")
    c.add_argument("--representatives", action="store_true")
    c.set_defaults(func=cmd_check_flc)
    c = out(chk.add_parser("generic", help="degeneracy and protection"))
    c.add_argument("input")
    c.add_argument("--delta", type=exact_arg, default=as_exact(0))
    c.set_defaults(func=cmd_check_generic)

    c = out(sub.add_parser("triangulate", help="generic Delaunay triangulation"))
    c.add_argument("input", help="pointset or planar tiling document")
    c.add_argument("--mu", type=exact_arg, default=as_exact(1))
    c.add_argument("--eps", type=exact_arg)
    c.add_argument("--delta", type=exact_arg)
    c.add_argument("--rho", type=exact_arg)
    c.add_argument("--r-factor", type=exact_arg, default=as_exact(10))
    c.add_argument("--relaxed", action="store_true", help="skip the mesh-size precondition")
    c.add_argument("--max-points", type=int, default=200_000)
    c.add_argument("--seed", type=int, required=True)
    c.set_defaults(func=cmd_triangulate)

    c = out(sub.add_parser("gahler", help="collared prototile complex"))
    c.add_argument("input")
    c.add_argument("--n", type=int, default=1)
    c.set_defaults(func=cmd_gahler)

    sh = sub.add_parser("shape", help="shape cocycles").add_subparsers(dest="what", required=True)
    c = out(sh.add_parser("extract"))
    c.add_argument("input")
    c.add_argument("--n", type=int, default=1)
    c.set_defaults(func=cmd_shape_extract)
    c = out(sh.add_parser("verify"))
    c.add_argument("input")
    c.set_defaults(func=cmd_shape_verify)
    c = out(sh.add_parser("rationalize"))
    c.add_argument("input")
    c.add_argument("--rho", type=exact_arg, required=True)
    c.add_argument("--max-attempts", type=int, default=8)
    c.set_defaults(func=cmd_shape_rationalize)

    c = out(sub.add_parser("deform", help="rebuild a tiling from a shape cocycle"))
    c.add_argument("tiling")
    c.add_argument("shape")
    c.add_argument("--rho", type=exact_arg, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--paths", type=int, default=100)
    c.add_argument("--svg")
    c.set_defaults(func=cmd_deform)

    bd = sub.add_parser("bundle", help="lattices and projections").add_subparsers(dest="what", required=True)
    c = out(bd.add_parser("lattice"))
    c.add_argument("generators", nargs="*", help="comma-separated coordinates")
    c.add_argument("--group", choices=["heis", "euclidean"], default="heis")
    c.add_argument("--dim", type=int, default=2)
    c.add_argument("--shape", help="rational shape document")
    c.set_defaults(func=cmd_bundle_lattice)
    c = out(bd.add_parser("project"))
    c.add_argument("input")
    c.add_argument("--lattice")
    c.set_defaults(func=cmd_bundle_project)

    c = out(sub.add_parser("cohomology", help="cellular cohomology"))
    c.add_argument("input", help="tiling or complex document")
    c.add_argument("--coeff", choices=["Z", "R"], default="Z")
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--periodic", action="store_true", help="check stability across collar levels")
    c.set_defaults(func=cmd_cohomology)

    c = out(sub.add_parser("distance", help="tiling metric bracket"))
    c.add_argument("t1")
    c.add_argument("t2")
    c.add_argument("--offset-radius", type=exact_arg, default=as_exact(1))
    c.add_argument("--pitch", type=exact_arg, default=as_exact("1/8"))
    c.set_defaults(func=cmd_distance)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except delaunay.ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 4
    except (CheckFailed, ValueError, ArithmeticError) as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    text = dump_doc(doc)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    failed = sorted(k for k, v in doc["checks"].items() if v is not True)
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
