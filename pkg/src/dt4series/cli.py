"""Command-line driver: named series, class dumps, verification, benchmarks.

Model files are small JSON documents; the built-in "generic" model carries a
single middle-degree label with a symbolic pairing row, which is all the
closed-form theory depends on (only the derived exponent and the ranks
matter).  Identical invocations produce byte-identical artifacts, with or
without worker parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from .exactarith import ParamPoly
from .genera import genus_by_name
from .series import PowerSeries
from .va import GeometryModel, InsertionClass, PairingTables, VAState, lie_bracket
from .wallcross import (ClassCache, InsertionSpec, TANGENT, build_hilb_class,
                        build_hilb_class_bracket, build_nnp,
                        build_quot_class_surface, invariant_series_pipeline,
                        render_class)
from . import acceptance, invariants


def _parse_value(v):
    if isinstance(v, (int, float)):
        return ParamPoly.const(int(v))
    if isinstance(v, str):
        try:
            return ParamPoly.const(Fraction(v))
        except ValueError:
            return ParamPoly.var(v)
    raise ValueError(f"cannot parse model value {v!r}")


def load_model(path: str | None) -> GeometryModel:
    """Load a model file, or the built-in generic fourfold model."""
    if path is None or path == "generic":
        return invariants._cy4_model([1], ["g"])
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    kind = data.get("kind", "CY4")
    classes = [InsertionClass.make(int(c.get("rank", 1)),
                                   {k: _parse_value(v)
                                    for k, v in c.get("pairing", {}).items()})
               for c in data.get("classes", [])]
    if kind == "CY4":
        weights = {k: _parse_value(v) for k, v in data.get("c3", {}).items()}
        model = GeometryModel.cy4(weights, classes,
                                  euler_o=int(data.get("eulerO", 2)))
    elif kind == "Surface":
        weights = {k: _parse_value(v) for k, v in data.get("c1", {}).items()}
        inter = {}
        for key, val in data.get("intersect", {}).items():
            a, _, b = key.partition(",")
            inter[(a.strip(), b.strip())] = Fraction(val)
        model = GeometryModel.surface(weights, classes,
                                      pair_multiplicity=int(data.get("pairN", 1)),
                                      intersect=inter)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    # validates gamma consistency: derived exponents must be well-defined
    for cls in model.classes:
        model.gamma_of(cls)
    return model


SERIES_NAMES = ("cao_kool", "segre", "nekrasov", "verlinde", "verlinde_sqrt",
                "z_series", "lambert_z", "quot_surface", "taut")


def _emit_series(name: str, series: PowerSeries, params: dict, fmt: str,
                 out) -> None:
    if fmt == "json":
        out.write(invariants.series_report(name, series, params) + "\n")
    elif fmt == "csv":
        out.write("n,coefficient\n")
        for n, c in enumerate(series.coefficients):
            out.write(f"{n},\"{c.render()}\"\n")
    else:
        out.write(f"# {name} {params}\n")
        out.write(repr(series) + "\n")


def cmd_series(args, out) -> int:
    gamma = args.gamma
    try:
        gamma = int(gamma)
    except (TypeError, ValueError):
        pass
    order = args.order
    name = args.name
    if name == "cao_kool":
        s = invariants.cao_kool_series(gamma, order)
    elif name == "segre":
        s = invariants.segre_series([args.rank], [gamma], order=order)
    elif name == "nekrasov":
        s = invariants.nekrasov_series([args.rank], [gamma], order)
    elif name == "verlinde":
        s = invariants.verlinde_series(args.rank, gamma, order, sqrt=False)
    elif name == "verlinde_sqrt":
        s = invariants.verlinde_series(args.rank, gamma, order, sqrt=True)
    elif name == "z_series":
        s = invariants.z_series(gamma, order)
    elif name == "lambert_z":
        s = invariants.z_series_paper_form(gamma, order)
    elif name == "quot_surface":
        s = invariants.quot_surface_series(args.pair_multiplicity, args.rank,
                                           gamma, order)
    else:
        raise ValueError(f"unknown series {name!r}")
    _emit_series(name, s, {"gamma": str(args.gamma), "rank": args.rank,
                           "order": order,
                           "pair_multiplicity": args.pair_multiplicity},
                 args.format, out)
    return 0


def cmd_vfc(args, out) -> int:
    model = load_model(args.model)
    if args.kind == "quot" and model.kind != "Surface":
        if args.model not in (None, "generic"):
            raise ValueError("quot classes need a Surface model")
        model = invariants._surface_model([1], ["g"],
                                          N=args.pair_multiplicity)
    cache = None
    cache_dir = args.cache_dir or os.environ.get("DT4SERIES_CACHE")
    if cache_dir:
        cache = ClassCache(cache_dir, verify=args.verify_cache)

    def build():
        if args.kind == "nnp":
            return build_nnp(model, args.n)
        if args.kind == "quot":
            return build_quot_class_surface(model, args.pair_multiplicity,
                                            args.n)
        if args.bracket:
            return build_hilb_class_bracket(model, args.n)
        return build_hilb_class(model, args.n, parallel=args.parallel)

    tag = f"{'bracket' if args.bracket else 'closed'}-q{args.pair_multiplicity}"
    if cache is not None:
        vc, blob = cache.get_or_build(model, args.kind, args.n, tag, build)
    else:
        vc = build()
        blob = render_class(vc)
    if args.format == "json":
        out.write(blob + "\n")
    else:
        out.write(vc.state.render() + "\n")
    return 0


def cmd_verify(args, out) -> int:
    ids = acceptance.all_check_ids() if args.check == "all" else [args.check]
    kwargs = {}
    if args.order is not None:
        kwargs["order"] = args.order
    status = 0
    for cid in ids:
        started = time.time()
        rep = acceptance.run_check(cid, **kwargs)
        took = time.time() - started
        out.write(f"{rep['status'].upper():4s} {cid} ({took:.2f}s)\n")
        if rep["status"] != "pass":
            status = 1
            out.write(json.dumps(rep.get("detail", {}), indent=2,
                                 default=str) + "\n")
    return status


def cmd_bench(args, out) -> int:
    orders = [int(x) for x in args.orders.split(",")]
    out.write("kernel,order,seconds\n")
    rows = []
    for order in orders:
        g = ParamPoly.var("g")
        a = PowerSeries([ParamPoly.const(n + 1) + g * n
                         for n in range(order + 1)], order)
        b = PowerSeries([ParamPoly.const(2 * n - 1) for n in range(order + 1)],
                        order)
        started = time.time()
        _ = a * b
        rows.append(("series_mul", order, time.time() - started))
    model = invariants._cy4_model([1], ["g"])
    h4 = build_hilb_class(model, 4)
    tables = PairingTables.untwisted(model)
    for order in orders:
        nnp = build_nnp(model, order)
        target = VAState.pure((4, 1), next(iter(h4.state.parts.values())))
        started = time.time()
        _ = lie_bracket(nnp.state, target, tables)
        rows.append(("bracket", order, time.time() - started))
    for kernel, order, seconds in rows:
        out.write(f"{kernel},{order},{seconds:.4f}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dt4series",
        description="exact wall-crossing generating-series calculus")
    p.add_argument("--cache-dir", default=None,
                   help="class cache directory (or DT4SERIES_CACHE)")
    p.add_argument("--out", default=None, help="write output to a file")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("series", help="emit a named invariant series")
    ps.add_argument("name", choices=SERIES_NAMES)
    ps.add_argument("--gamma", default="g",
                    help="exponent: symbol name or integer")
    ps.add_argument("--rank", type=int, default=1)
    ps.add_argument("--order", type=int, default=8)
    ps.add_argument("--pair-multiplicity", type=int, default=1)
    ps.add_argument("--format", choices=("json", "csv", "text"),
                    default="json")
    ps.set_defaults(fn=cmd_series)

    pv = sub.add_parser("vfc", help="print a virtual class state")
    pv.add_argument("kind", choices=("hilb", "nnp", "quot"))
    pv.add_argument("--n", type=int, required=True)
    pv.add_argument("--model", default=None,
                    help="model JSON file (default: generic)")
    pv.add_argument("--bracket", action="store_true",
                    help="use the wall-crossing bracket oracle")
    pv.add_argument("--parallel", action="store_true")
    pv.add_argument("--pair-multiplicity", type=int, default=1)
    pv.add_argument("--verify-cache", action="store_true",
                    help="CI mode: recompute and compare cached bytes")
    pv.add_argument("--format", choices=("json", "text"), default="json")
    pv.set_defaults(fn=cmd_vfc)

    pc = sub.add_parser("verify", help="run acceptance checks")
    pc.add_argument("check", help="check id or 'all'")
    pc.add_argument("--order", type=int, default=None)
    pc.set_defaults(fn=cmd_verify)

    pb = sub.add_parser("bench", help="time the series and bracket kernels")
    pb.add_argument("--orders", default="16,32,64")
    pb.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            return args.fn(args, fh)
    return args.fn(args, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
