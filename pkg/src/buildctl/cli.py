"""buildctl: command-line recognition and generation of building complexes.

Exit codes: 0 certified / success, 1 diagnosed failure, 2 undecided
(unknown pi_1 or unverified global curvature), 3 input or usage error.
Budgets can be overridden through the BUILDCTL_BUDGETS environment variable,
a JSON object such as {"B_group": 100000, "B_apt": 10000}.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import corpus
from .angles import parse_length
from .complexes import (ComplexError, InvalidComplexError, load_path,
                        validate)
from .coxeter import (B_GROUP_DEFAULT, CoxeterError, CoxeterMatrix, classify,
                      coxeter_complex, named_matrix)
from .geodesics import GeodesicError, propagate_apartment, shoot
from .metric_graph import GraphPoint, MetricGraph
from .recognizer import (B_APT_DEFAULT, BuildingCertificate, Diagnosis,
                         check_euclidean, check_spherical, recognize_dim1)

EXIT_OK = 0
EXIT_DIAGNOSED = 1
EXIT_UNDECIDED = 2
EXIT_INPUT = 3

UNDECIDED_MARKERS = ("global_cat1_unverified", "unknown_pi1",
                     "apartment_axiom2_unverified", "apartments_sampled")


def budgets() -> dict:
    out = {"B_group": B_GROUP_DEFAULT, "B_apt": B_APT_DEFAULT,
           "branch_budget": 64, "shoot_grid": 720}
    raw = os.environ.get("BUILDCTL_BUDGETS")
    if raw:
        try:
            out.update(json.loads(raw))
        except json.JSONDecodeError as exc:
            raise ComplexError(f"bad BUILDCTL_BUDGETS: {exc}") from exc
    return out


def emit(obj: dict, mode: str, out=None) -> None:
    out = out or sys.stdout
    if mode == "json":
        out.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        _emit_text(obj, out)


def _emit_text(obj: dict, out, indent: int = 0) -> None:
    pad = "  " * indent
    for k in sorted(obj):
        v = obj[k]
        if isinstance(v, dict):
            out.write(f"{pad}{k}:\n")
            _emit_text(v, out, indent + 1)
        else:
            out.write(f"{pad}{k}: {v}\n")


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_point(g: MetricGraph, spec: str) -> GraphPoint:
    """e:t syntax: edge id and offset in pi units ('3:1/4'), or a vertex name."""
    if ":" in spec:
        e, t = spec.split(":", 1)
        tv = Fraction(t) if "/" in t or t.isdigit() else float(t)
        return g.point(int(e), tv)
    return GraphPoint(vertex=g.vertices.index(spec))


def report_of(result, extra: dict | None = None) -> dict:
    if isinstance(result, Diagnosis):
        rep = {"schema": 1, "verdict": None, "diagnosis": result.to_json()}
    else:
        rep = result.to_report()
    if extra:
        rep.update(extra)
    return rep


def exit_code_of(result) -> int:
    if isinstance(result, Diagnosis):
        # an undecided fundamental group is not a diagnosed failure
        if result.condition == "unknown_pi1":
            return EXIT_UNDECIDED
        return EXIT_DIAGNOSED
    if any(any(f.startswith(m) for m in UNDECIDED_MARKERS) for f in result.flags):
        return EXIT_UNDECIDED
    return EXIT_OK


def cmd_gen(args) -> int:
    kind = args.kind
    if kind == "coxeter-complex":
        if args.matrix:
            with open(args.matrix, encoding="utf-8") as fh:
                M = CoxeterMatrix.from_json_dict(json.load(fh))
        else:
            M = named_matrix(args.type or "A3")
        cx = coxeter_complex(M, budget=budgets()["B_group"]).complex
    elif kind == "suspension":
        if not args.base:
            raise ComplexError("gen suspension needs --base FILE")
        cx = corpus.gen_suspension(load_path(args.base))
    elif kind in corpus.GENERATORS:
        kwargs = {}
        if args.length:
            kwargs["length"] = parse_length(args.length)
        if args.s is not None:
            kwargs["s"] = args.s
        if args.t is not None:
            kwargs["t"] = args.t
        if args.q is not None:
            kwargs["q"] = args.q
        if args.radius is not None:
            kwargs["radius"] = args.radius
        cx = corpus.GENERATORS[kind](**kwargs)
    else:
        raise ComplexError(f"unknown generator {kind!r}")
    _write_output(cx.dumps(), args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    cx = load_path(args.file)
    rep = validate(cx)
    emit({"schema": 1, **rep.to_json()}, args.report)
    return EXIT_OK if rep.ok else EXIT_DIAGNOSED


def cmd_check(args) -> int:
    cx = load_path(args.file)
    cx.require_valid()
    b = budgets()
    geometry = args.geometry
    if geometry == "auto":
        geometry = cx.geometry
    if geometry == "euclidean":
        result = check_euclidean(cx, args.boundary, budget=b["B_apt"])
    elif cx.dimension == 1:
        result = recognize_dim1(cx, budget=b["B_apt"])
    else:
        result = check_spherical(cx, budget=b["B_apt"])
    emit(report_of(result), args.report)
    return exit_code_of(result)


def cmd_graph(args) -> int:
    cx = load_path(args.file)
    g = MetricGraph.from_complex(cx)
    if args.op == "diameter":
        d, wit = g.diameter()
        emit({"schema": 1, "diameter_pi_units": float(d),
              "exact": isinstance(d, Fraction),
              "witness": None if wit is None else [g.point_name(wit[0]),
                                                   g.point_name(wit[1])]},
             args.report)
    elif args.op == "systole":
        s, cyc = g.systole()
        emit({"schema": 1,
              "systole_pi_units": None if s == float("inf") else float(s),
              "cycle": None if cyc is None else
              [g.vertices[v] for v in g.cycle_vertices(cyc)]}, args.report)
    else:
        p = _parse_point(g, args.point) if args.point else GraphPoint(vertex=0)
        ant = g.antipode_set(p)
        emit({"schema": 1, "nonempty": ant.nonempty, "discrete": ant.discrete,
              "points": [g.point_name(q) for q in ant.points],
              "intervals": [[e, float(lo), float(hi)] for e, lo, hi in ant.intervals]},
             args.report)
    return EXIT_OK


def cmd_coxeter(args) -> int:
    if args.type:
        M = named_matrix(args.type)
    else:
        with open(args.file, encoding="utf-8") as fh:
            M = CoxeterMatrix.from_json_dict(json.load(fh))
    if args.op == "classify":
        cls = classify(M, budget=budgets()["B_group"])
        emit({"schema": 1, **cls.to_json()}, args.report)
        return EXIT_OK
    model = coxeter_complex(M, budget=budgets()["B_group"])
    if args.output:
        _write_output(model.complex.dumps(), args.output)
    else:
        emit({"schema": 1, "chambers": len(model.complex.top_cells),
              "vertices": len(model.complex.vertices),
              "group_order": len(model.elements)}, args.report)
    return EXIT_OK


def cmd_geodesic(args) -> int:
    cx = load_path(args.file)
    from .complexes import vertex_link
    vi = cx.vertex_index(args.from_)
    lk = vertex_link(cx, vi)
    g = MetricGraph.from_complex(lk)
    if args.dir.startswith("v:"):
        dp = GraphPoint(vertex=lk.vertices.index(args.dir[2:]))
    else:
        dp = _parse_point(g, args.dir)
    length = parse_length(args.len).radians
    geos = shoot(cx, vi, dp, length, branch_budget=budgets()["branch_budget"])
    emit({"schema": 1, "count": len(geos),
          "geodesics": [geo.describe() for geo in geos]}, args.report)
    return EXIT_OK


def cmd_apartment(args) -> int:
    cx = load_path(args.file)
    res = propagate_apartment(cx, args.from_, args.cycle, y=args.to)
    if hasattr(res, "cells"):
        emit({"schema": 1, "ok": True, "cells":
              [[cx.vertices[v] for v in cell] for cell in res.cells],
              "euler_characteristic": res.euler,
              "antipode": None if res.antipode_of_base is None
              else cx.vertices[res.antipode_of_base]}, args.report)
        return EXIT_OK
    emit({"schema": 1, "ok": False, "reason": res.reason, "witness": res.witness},
         args.report)
    return EXIT_DIAGNOSED


def cmd_decompose(args) -> int:
    cx = load_path(args.file)
    from .decompose import join_decompose, suspension_factor
    if cx.geometry == "euclidean":
        raise ComplexError("decompose handles spherical complexes; "
                           "Euclidean factor hints are part of `check`")
    result = recognize_dim1(cx) if cx.dimension <= 1 else check_spherical(cx)
    if isinstance(result, Diagnosis):
        emit(report_of(result), args.report)
        return EXIT_DIAGNOSED
    out = {"schema": 1, "verdict": result.verdict, "factors": [], "suspension": None}
    tower = suspension_factor(cx, result)
    if tower is not None:
        out["suspension"] = {
            "pole_pairs": [list(p) for p in tower.pole_pairs],
            "base_vertices": None if tower.base is None
            else list(tower.base.vertices)}
    if result.coxeter_matrix is not None:
        for f in join_decompose(cx, result):
            out["factors"].append({
                "vertices": list(f.complex.vertices),
                "dimension": f.complex.dimension,
                "verdict": f.certificate.verdict
                if isinstance(f.certificate, BuildingCertificate)
                else {"diagnosis": f.certificate.to_json()},
                "component": list(f.generator_component)})
    emit(out, args.report)
    return exit_code_of(result)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="buildctl",
        description="Recognize, diagnose and generate metric building complexes.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a corpus complex as JSON")
    g.add_argument("kind", help="complete-bipartite | projective-plane | "
                                "generalized-quadrangle | octahedron | petersen | k4 | "
                                "short-lune | punctured-octahedron | a2-window | "
                                "perturbed-a2-window | coxeter-complex | suspension")
    g.add_argument("--length", help="edge length: pi/3, 2pi/3, or radians")
    g.add_argument("--s", type=int)
    g.add_argument("--t", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--radius", type=int)
    g.add_argument("--type", help="Coxeter type name, e.g. A3, I2(5)")
    g.add_argument("--matrix", help="Coxeter matrix JSON file")
    g.add_argument("--base", help="base complex for suspension")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", help="structural validation report")
    v.add_argument("file")
    v.add_argument("--report", choices=("json", "text"), default="json")
    v.set_defaults(func=cmd_validate)

    ck = sub.add_parser("check", help="run the building recognizer")
    ck.add_argument("file")
    ck.add_argument("--geometry", choices=("auto", "spherical", "euclidean"),
                    default="auto")
    ck.add_argument("--boundary", choices=("strict", "window"), default="strict")
    ck.add_argument("--report", choices=("json", "text"), default="json")
    ck.set_defaults(func=cmd_check)

    gr = sub.add_parser("graph", help="exact metric-graph analysis")
    gr.add_argument("op", choices=("diameter", "systole", "antipodes"))
    gr.add_argument("file")
    gr.add_argument("--point", help="base point e:t (edge id, offset in pi units) "
                                    "or vertex name")
    gr.add_argument("--report", choices=("json", "text"), default="json")
    gr.set_defaults(func=cmd_graph)

    cx = sub.add_parser("coxeter", help="classify or realize a Coxeter matrix")
    cx.add_argument("op", choices=("classify", "complex"))
    cx.add_argument("file", nargs="?")
    cx.add_argument("--type", help="named system instead of a file")
    cx.add_argument("-o", "--output", help="write the complex JSON here")
    cx.add_argument("--report", choices=("json", "text"), default="json")
    cx.set_defaults(func=cmd_coxeter)

    ge = sub.add_parser("geodesic", help="shoot geodesics from a vertex")
    ge.add_argument("file")
    ge.add_argument("--from", dest="from_", required=True, help="vertex name")
    ge.add_argument("--dir", required=True,
                    help="link direction: e:t (link edge id, offset in pi units) "
                         "or v:NAME (link vertex)")
    ge.add_argument("--len", default="pi", help="target length (default pi)")
    ge.add_argument("--report", choices=("json", "text"), default="json")
    ge.set_defaults(func=cmd_geodesic)

    apart = sub.add_parser("apartment", help="propagate an apartment from a vertex")
    apart.add_argument("file")
    apart.add_argument("--from", dest="from_", required=True)
    apart.add_argument("--cycle", nargs="+", required=True,
                       help="link-cycle vertex names around the base vertex")
    apart.add_argument("--to", help="expected antipodal vertex")
    apart.add_argument("--report", choices=("json", "text"), default="json")
    apart.set_defaults(func=cmd_apartment)

    de = sub.add_parser("decompose", help="suspension and join factors")
    de.add_argument("file")
    de.add_argument("--report", choices=("json", "text"), default="json")
    de.set_defaults(func=cmd_decompose)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ComplexError, InvalidComplexError, CoxeterError, GeodesicError,
            FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        sys.stderr.write(f"buildctl: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
