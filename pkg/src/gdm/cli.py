"""Batch command-line front end.

Subcommands: solve, base, ptas, gen sat, exact, sparsify, bench.  Output is
deterministic: certificates carry exact rational strings, keys are sorted,
and repeated runs on identical inputs are byte-identical.  Exit codes:
0 success, 1 infeasible base, 2 usage or cap errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction

from .core import (Instance, classify, instance_from_json, instance_to_json,
                   read_instance, validate)
from .iterated import bicriteria_base, trace_to_json
from .lp import Infeasible
from .matroids import (FreeMatroid, SeparationCapExceeded,
                       matroid_from_json_file)
from .oracle import OracleCapExceeded, exact_base, exact_dm, gap_report
from .pruning import solve as prune_solve
from .ptas import (StateCapExceeded, decomposition_from_json, ptas,
                   sparsify_check)


def _matroid_for(args, instance):
    if getattr(args, "matroid", None):
        return matroid_from_json_file(args.matroid, instance)
    return FreeMatroid(instance.edge_ids)


def _emit(payload: dict, decimal: bool):
    if decimal:
        payload = _with_decimals(payload)
    print(json.dumps(payload, indent=2, sort_keys=True))


def _with_decimals(node):
    if isinstance(node, dict):
        out = {}
        for k, v in node.items():
            out[k] = _with_decimals(v)
            if isinstance(v, str):
                try:
                    out[k + "~"] = float(Fraction(v))
                except (ValueError, ZeroDivisionError):
                    pass
        return out
    if isinstance(node, list):
        return [_with_decimals(v) for v in node]
    return node


def _load_validated(path: str) -> Instance:
    inst = read_instance(path)
    cleaned, dropped = validate(inst)
    if dropped:
        print(f"dropped self-infeasible edges: {dropped}", file=sys.stderr)
    return cleaned


def cmd_solve(args) -> int:
    inst = _load_validated(args.instance)
    matroid = _matroid_for(args, inst)
    eps = Fraction(args.epsilon) if args.epsilon else None
    res = prune_solve(inst, matroid, strategy=args.strategy, eps=eps)
    payload = dict(res["certificate"])
    payload["edges"] = sorted(res["solution"].edge_ids)
    if args.trace:
        payload["trace"] = trace_to_json(res["relaxed"].trace)
    _emit(payload, args.decimal)
    return 0


def cmd_base(args) -> int:
    # base problems keep every edge: dropping one would change the matroid
    inst = read_instance(args.instance)
    matroid = _matroid_for(args, inst)
    try:
        out = bicriteria_base(inst, matroid)
    except Infeasible as exc:
        print(str(exc), file=sys.stderr)
        return 1
    payload = {
        "base": sorted(out["base"].edge_ids),
        "cost": str(out["cost"]),
        "lp": str(out["lp"]),
        "violation_factor_bound": str(1 + inst.k),
        "violation_factor_certified": out["factor_certified"],
    }
    _emit(payload, args.decimal)
    return 0


def cmd_ptas(args) -> int:
    inst = _load_validated(args.instance)
    td = None
    if args.decomposition:
        with open(args.decomposition) as fh:
            td = decomposition_from_json(json.load(fh))
    res = ptas(inst, Fraction(args.epsilon), decomposition=td)
    payload = dict(res["certificate"])
    payload["edges"] = sorted(res["solution"].edge_ids)
    _emit(payload, args.decimal)
    return 0


def cmd_gen(args) -> int:
    if args.kind != "sat":
        raise ValueError(f"unknown generator {args.kind!r}")
    from .hardness import parse_dimacs, reduction_target, sat_to_dm
    with open(args.cnf) as fh:
        cnf = parse_dimacs(fh.read())
    inst, _labels = sat_to_dm(cnf)
    data = instance_to_json(inst)
    data["comment"] = {
        "satisfiable_iff_opt": str(reduction_target(cnf)),
        "vars": cnf.n_vars,
        "clauses": len(cnf.clauses),
    }
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        print(json.dumps(data, indent=2, sort_keys=True))
    return 0


def cmd_exact(args) -> int:
    if args.base:
        inst = read_instance(args.instance)
    else:
        inst = _load_validated(args.instance)
    matroid = _matroid_for(args, inst)
    if args.base:
        res = exact_base(inst, matroid, cap=args.cap)
        if res is None:
            print("no capacity-feasible base exists", file=sys.stderr)
            return 1
        payload = {"cost": str(res["cost"]),
                   "base": sorted(res["base"].edge_ids)}
    elif args.gap:
        rep = gap_report(inst, matroid, cap=args.cap)
        payload = {"lp": str(rep["lp"]), "opt": str(rep["opt"]),
                   "gap": str(rep["gap"]),
                   "witness": sorted(rep["witness"].edge_ids)}
    else:
        res = exact_dm(inst, matroid, cap=args.cap,
                       use_lp_bound=not args.no_lp_bound)
        payload = {"opt": str(res["opt_value"]),
                   "witness": sorted(res["witness"].edge_ids)}
    _emit(payload, args.decimal)
    return 0


def cmd_sparsify(args) -> int:
    inst = _load_validated(args.instance)
    matroid = _matroid_for(args, inst)
    m_star = exact_dm(inst, matroid, cap=args.cap)["witness"]
    rep = sparsify_check(inst, m_star, Fraction(args.epsilon),
                         trials=args.trials, seed=args.seed)
    payload = {
        "trials": rep["trials"],
        "structural_ok_fraction": str(rep["structural_ok_fraction"]),
        "mean_profit": str(rep["mean_profit"]),
        "stderr": repr(rep["stderr"]),
        "target": str(rep["target"]),
        "p_star": str(rep["p_star"]),
    }
    _emit(payload, args.decimal)
    return 0


def cmd_bench(args) -> int:
    rows = []
    for name in sorted(os.listdir(args.directory)):
        if not name.endswith(".json") or name.endswith(".matroid.json"):
            continue
        path = os.path.join(args.directory, name)
        inst = _load_validated(path)
        mpath = path[:-5] + ".matroid.json"
        if os.path.exists(mpath):
            matroid = matroid_from_json_file(mpath, inst)
        else:
            matroid = FreeMatroid(inst.edge_ids)
        res = prune_solve(inst, matroid, strategy="auto")
        cert = res["certificate"]
        rows.append((name, cert["strategy"], cert["lp"], cert["p"],
                     cert["ratio"], cert["bound"]))
    header = ("instance", "strategy", "lp", "p", "ratio", "bound")
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(6)]
    for row in [header] + rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gdm",
        description="capacity-constrained edge packing under matroid "
                    "constraints, with certified approximation ratios")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decimal", action="store_true",
                        help="add float approximations next to exact rationals")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="relax + prune with a certified ratio",
                        parents=[common])
    sp.add_argument("instance")
    sp.add_argument("--matroid", help="matroid spec JSON file")
    sp.add_argument("--strategy", default="auto",
                    choices=["auto", "general", "bipartite", "consistent",
                             "conflict-free", "small"])
    sp.add_argument("--epsilon", help="smallness parameter for --strategy small")
    sp.add_argument("--trace", action="store_true",
                    help="include the relaxation trace")
    sp.set_defaults(func=cmd_solve)

    bp = sub.add_parser("base", parents=[common], help="min-cost base with bounded congestion")
    bp.add_argument("instance")
    bp.add_argument("--matroid", help="matroid spec JSON file")
    bp.set_defaults(func=cmd_base)

    tp = sub.add_parser("ptas", parents=[common], help="layered scheme for planar instances")
    tp.add_argument("instance")
    tp.add_argument("--epsilon", required=True)
    tp.add_argument("--decomposition",
                    help="JSON file with bags, tree edges, and a root")
    tp.set_defaults(func=cmd_ptas)

    gp = sub.add_parser("gen", parents=[common], help="instance generators")
    gp.add_argument("kind", choices=["sat"])
    gp.add_argument("cnf", help="DIMACS CNF file")
    gp.add_argument("-o", "--output")
    gp.set_defaults(func=cmd_gen)

    ep = sub.add_parser("exact", parents=[common], help="exact optimum by branch and bound")
    ep.add_argument("instance")
    ep.add_argument("--matroid")
    ep.add_argument("--base", action="store_true",
                    help="minimum-cost feasible base instead of max packing")
    ep.add_argument("--gap", action="store_true",
                    help="also report the LP optimum and the exact gap")
    ep.add_argument("--cap", type=int, default=24)
    ep.add_argument("--no-lp-bound", action="store_true",
                    help="prune with profit sums only (cross-check mode)")
    ep.set_defaults(func=cmd_exact)

    yp = sub.add_parser("sparsify", parents=[common],
                        help="randomised sparsification spot-check")
    yp.add_argument("instance")
    yp.add_argument("--matroid")
    yp.add_argument("--epsilon", required=True)
    yp.add_argument("--trials", type=int, default=1000)
    yp.add_argument("--seed", type=int, default=0)
    yp.add_argument("--cap", type=int, default=24)
    yp.set_defaults(func=cmd_sparsify)

    np_ = sub.add_parser("bench", parents=[common], help="ratio table over an instance directory")
    np_.add_argument("directory")
    np_.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OracleCapExceeded, SeparationCapExceeded, StateCapExceeded,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
