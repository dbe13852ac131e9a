"""Command-line front end.

Exit codes: 0 success and verification passed, 1 verification failed,
2 bad input or usage.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from .blocker import lightest_path_blocker
from .bmatching import NotBipartite, b_matching
from .cutmatch import cutmatch
from .disjoint_paths import VARIANTS, maximal_disjoint_paths, maximum_disjoint_paths
from .graph_core import Digraph, MovingCut, ScaledReal, deficit, h_length_distance, \
    lightest_within_budget
from .io import (FORMAT_VERSION, Instance, InstanceError, cut_from_json, cut_to_json, digest,
                 dump_result, flow_from_json, flow_to_json, format_instance, fraction_from_json,
                 fraction_to_json, gen_instance, load_result, parse_instance, scaled_from_json,
                 scaled_to_json)
from .layered import blocking_integral_flow, iterated_path_count_flow, validate_layered_dag
from .mw import CommodityBatch, certify_multi, solve_multi, solve_pair
from .rounding import round_flow
from .verify import (b_matching_feasible, certify_bracket, cutmatch_problems, flow_problems,
                     is_h_path_in_variant, paths_are_disjoint, residual_has_h_path,
                     verify_blocker)


class UsageError(Exception):
    pass


# ---- per-command verification (from instance and document only) -------

def _check_solve(inst: Instance, doc: dict) -> list[str]:
    g = inst.graph
    p = doc["params"]
    cut = cut_from_json(doc["cut"])
    flows = [flow_from_json(g.m, f) for f in doc["flows"]]
    pairs = inst.commodity_pairs() or [(g.S, g.T)]
    if len(flows) != len(pairs):
        return ["flow count does not match the commodity count"]
    report = certify_multi(g, flows, cut, pairs, p["h"], p["eps"])
    problems = list(report.problems)
    primal = sum((Fraction(f.eta) * f.total_multiplicity() for f in flows), Fraction(0))
    if report.passed and not certify_bracket(primal, report.dual):
        problems.append("weak duality violated")
    return problems


def _lengths_cut(g: Digraph, h: int) -> MovingCut:
    return MovingCut(tuple(ScaledReal.from_value(Fraction(length, h)) for length in g.lengths))


def _check_blocker(inst: Instance, doc: dict) -> list[str]:
    g = inst.graph
    p = doc["params"]
    f = flow_from_json(g.m, doc["flow"])
    w = cut_from_json(doc["weights"])
    lam = scaled_from_json(doc["lam"])
    return [] if verify_blocker(g, f, w, p["h"], lam, p["eps"]) else ["blocker conditions fail"]


def _open_path(g: Digraph, residual) -> bool:
    return lightest_within_budget(g, [0] * g.m, sum(g.lengths), g.S, g.T,
                                  allowed=lambda a: residual[a] > 0) is not None


def _arc_flow_problems(g: Digraph, f: list) -> list[str]:
    problems = []
    if len(f) != g.m:
        return ["flow length does not match the arc count"]
    for a, (x, u) in enumerate(zip(f, g.caps)):
        if not 0 <= x <= u:
            problems.append(f"arc {a + 1} carries {x} outside [0, {u}]")
    if deficit(g, f)[1] != 0:
        problems.append("flow has nonzero deficit")
    return problems


def _check_blocking(inst: Instance, doc: dict) -> list[str]:
    g = inst.graph
    f = doc["flow"]
    problems = _arc_flow_problems(g, f)
    if any(not isinstance(x, int) for x in f):
        problems.append("flow is not integral")
    if not problems and _open_path(g, [u - x for u, x in zip(g.caps, f)]):
        problems.append("an S-T path has no saturated arc")
    return problems


def _check_round(inst: Instance, doc: dict) -> list[str]:
    g = inst.graph
    before = [fraction_from_json(x) for x in doc["fractional"]]
    after = doc["flow"]
    problems = _arc_flow_problems(g, before) + _arc_flow_problems(g, after)
    if any(not isinstance(x, int) for x in after):
        problems.append("rounded flow is not integral")
    eps = Fraction(doc["params"]["eps"])
    out_value = sum(after[a] for a in range(g.m) if g.tails[a] in g.S)
    in_value = sum(before[a] for a in range(g.m) if g.tails[a] in g.S)
    if out_value < (1 - eps) * in_value:
        problems.append("rounding lost more than an eps fraction of the value")
    return problems


def _check_paths(inst: Instance, doc: dict) -> list[str]:
    g = inst.graph
    p = doc["params"]
    paths = [tuple(a - 1 for a in path) for path in doc["paths"]]
    problems = []
    for path in paths:
        if not is_h_path_in_variant(g, p["variant"], path, p["h"]):
            problems.append(f"{[a + 1 for a in path]} is not an h-length path")
    if not paths_are_disjoint(g, p["variant"], paths):
        problems.append("paths are not disjoint")
    if doc["command"] == "maximal-paths" and residual_has_h_path(g, p["variant"], paths, p["h"]):
        problems.append("an h-length path avoids every chosen path")
    return problems


def _bmatch_inputs(inst: Instance):
    g = inst.graph
    edges = list(zip(g.tails, g.heads))
    budgets = [inst.budgets.get(v, 1) for v in range(g.n)]
    return edges, budgets, list(g.caps)


def _check_bmatch(inst: Instance, doc: dict) -> list[str]:
    edges, budgets, caps = _bmatch_inputs(inst)
    x = doc["x"]
    if len(x) != len(edges) or not b_matching_feasible(edges, budgets, caps, x):
        return ["b-matching violates a budget or an edge capacity"]
    return []


def _check_cutmatch(inst: Instance, doc: dict) -> list[str]:
    g = inst.graph
    p = doc["params"]
    f = flow_from_json(g.m, doc["flow"])
    cut = cut_from_json(doc["cut"])
    gamma = fraction_from_json(doc["gamma"])
    problems = cutmatch_problems(g, f, cut, gamma, p["h"], Fraction(p["phi"]))
    if gamma > Fraction(doc["gamma_cap"]):
        problems.append("congestion exceeds the interior capacity scale")
    return problems


CHECKS: dict[str, Callable[[Instance, dict], list[str]]] = {
    "solve": _check_solve,
    "blocker": _check_blocker,
    "blocking-flow": _check_blocking,
    "round": _check_round,
    "maximal-paths": _check_paths,
    "max-paths": _check_paths,
    "bmatch": _check_bmatch,
    "cutmatch": _check_cutmatch,
}


# ---- commands ----------------------------------------------------------

def _need(args, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for {args.command}")


def _run_solve(inst: Instance, args) -> tuple[dict, str]:
    _need(args, "h", "eps")
    g = inst.graph
    pairs = inst.commodity_pairs()
    if pairs:
        batches = (CommodityBatch.single_batch(pairs) if args.batch
                   else CommodityBatch.one_per_batch(pairs))
        result = solve_multi(g, batches, args.h, args.eps, args.mode, args.seed)
    else:
        result = solve_pair(g, args.h, args.eps, args.mode, args.seed)
    report = certify_multi(g, result.flows, result.cut, pairs or [(g.S, g.T)], args.h, args.eps)
    doc = {"flows": [flow_to_json(g, f) for f in result.flows],
           "cut": cut_to_json(result.cut),
           "cert": {"flow_feasible": report.flow_feasible, "cut_feasible": report.cut_feasible,
                    "primal": fraction_to_json(report.primal),
                    "dual": scaled_to_json(report.dual), "gap": report.gap,
                    "delta0": scaled_to_json(report.delta0)},
           "info": {"iterations": result.info.iterations, "jumps": result.info.jumps,
                    "level": result.info.level}}
    k = sum(f.k for f in result.flows)
    summary = (f"value={float(report.primal):.6g} dual={report.dual.to_float():.6g} "
               f"gap={report.gap:.6g} k={k} iterations={result.info.iterations}")
    return doc, summary


def _run_blocker(inst: Instance, args) -> tuple[dict, str]:
    _need(args, "h", "eps")
    g = inst.graph
    w = _lengths_cut(g, args.h)
    if args.lam is not None:
        lam = ScaledReal.from_value(Fraction(args.lam))
    else:
        d = h_length_distance(g, w, args.h)
        if d == float("inf"):
            raise UsageError("no h-length S-T path; pass --lam explicitly")
        lam = d
    bf = lightest_path_blocker(g, w, args.h, lam, args.eps, args.mode, args.seed)
    doc = {"flow": flow_to_json(g, bf.flow), "weights": cut_to_json(w),
           "lam": scaled_to_json(lam), "rounds": bf.rounds}
    return doc, f"value={bf.flow.value} paths={bf.flow.support_size()} lam={lam.to_float():.6g}"


def _layered(inst: Instance):
    try:
        return validate_layered_dag(inst.graph)
    except ValueError as exc:
        raise UsageError(f"instance is not a layered S-T DAG: {exc}") from None


def _run_blocking(inst: Instance, args) -> tuple[dict, str]:
    d = _layered(inst)
    f = blocking_integral_flow(d, args.mode, args.seed)
    value = sum(f[a] for a in range(d.m) if d.tails[a] in d.S)
    return {"flow": f}, f"value={value}"


def _run_round(inst: Instance, args) -> tuple[dict, str]:
    _need(args, "eps")
    d = _layered(inst)
    fractional = iterated_path_count_flow(d)
    f = round_flow(d, fractional, Fraction(args.eps))
    before = sum(fractional[a] for a in range(d.m) if d.tails[a] in d.S)
    after = sum(f[a] for a in range(d.m) if d.tails[a] in d.S)
    doc = {"fractional": [fraction_to_json(x) for x in fractional], "flow": f}
    return doc, f"fractional={float(before):.6g} rounded={after}"


def _run_paths(inst: Instance, args) -> tuple[dict, str]:
    _need(args, "h", "variant")
    run = maximal_disjoint_paths if args.command == "maximal-paths" else maximum_disjoint_paths
    paths = run(inst.graph, args.variant, args.h, args.mode, args.seed)
    return {"paths": [[a + 1 for a in p] for p in paths]}, f"paths={len(paths)}"


def _run_bmatch(inst: Instance, args) -> tuple[dict, str]:
    _need(args, "eps")
    edges, budgets, caps = _bmatch_inputs(inst)
    try:
        x = b_matching(inst.graph.n, edges, budgets, caps, args.eps, args.mode, args.seed)
    except NotBipartite as exc:
        raise UsageError(str(exc)) from None
    return {"x": x}, f"value={sum(x)}"


def _run_cutmatch(inst: Instance, args) -> tuple[dict, str]:
    _need(args, "h", "phi")
    cm = cutmatch(inst.graph, args.h, args.phi, mode=args.mode, seed=args.seed)
    g = inst.graph
    doc = {"flow": flow_to_json(g, cm.flow), "cut": cut_to_json(cm.cut),
           "gamma": fraction_to_json(cm.gamma), "gamma_cap": cm.gamma_cap,
           "phases": cm.phases, "iterations": cm.iterations}
    cost = cm.cut.cost(g.caps).to_float()
    return doc, (f"value={cm.flow.total_multiplicity()} cut={cost:.6g} "
                 f"gamma={float(cm.gamma):.6g} phases={cm.phases}")


RUNNERS = {
    "solve": _run_solve,
    "blocker": _run_blocker,
    "blocking-flow": _run_blocking,
    "round": _run_round,
    "maximal-paths": _run_paths,
    "max-paths": _run_paths,
    "bmatch": _run_bmatch,
    "cutmatch": _run_cutmatch,
}


def _read_instance(path: str | None) -> Instance:
    if path is None:
        raise UsageError("--input is required")
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(text)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _params(args) -> dict[str, Any]:
    keys = ("h", "eps", "mode", "seed", "variant", "phi", "lam", "batch")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _solve_command(args) -> int:
    inst = _read_instance(args.input)
    start = time.perf_counter()
    try:
        body, summary = RUNNERS[args.command](inst, args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    elapsed = time.perf_counter() - start
    doc = {"format": FORMAT_VERSION, "command": args.command, "instance": digest(inst),
           "params": _params(args), **body}
    problems = CHECKS[args.command](inst, doc)
    doc["verdict"] = {"passed": not problems, "problems": problems}
    if args.timing:
        doc["timing"] = {"seconds": elapsed}
    if args.out is not None:
        _write(dump_result(doc), args.out)
    print(f"{args.command}: {summary} verified={'yes' if not problems else 'no'}")
    for p in problems:
        print(f"  problem: {p}", file=sys.stderr)
    return 0 if not problems else 1


def _verify_one(instance_path: str, result_path: str) -> tuple[str, list[str]]:
    inst = _read_instance(instance_path)
    try:
        doc = load_result(Path(result_path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load {result_path}: {exc}") from None
    if doc.get("instance") != digest(inst):
        return result_path, ["result was produced for a different instance"]
    check = CHECKS.get(doc.get("command"))
    if check is None:
        raise UsageError(f"{result_path}: unknown command {doc.get('command')!r}")
    try:
        problems = check(inst, doc)
    except (KeyError, TypeError, ValueError) as exc:
        problems = [f"malformed result document: {exc}"]
    return result_path, problems


def _verify_command(args) -> int:
    if args.corpus is not None:
        root = Path(args.corpus)
        jobs = [(str(p), str(p.with_suffix(".json"))) for p in sorted(root.glob("*.lcf"))
                if p.with_suffix(".json").exists()]
        if not jobs:
            raise UsageError(f"no instance/result pairs in {root}")
    else:
        _need(args, "input", "result")
        jobs = [(args.input, args.result)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            outcomes = list(pool.map(_verify_one, *zip(*jobs)))
    else:
        outcomes = [_verify_one(i, r) for i, r in jobs]
    failed = 0
    for path, problems in outcomes:
        print(f"{path}: {'pass' if not problems else 'FAIL'}")
        for p in problems:
            print(f"  problem: {p}")
        failed += bool(problems)
    return 1 if failed else 0


def _gen_command(args) -> int:
    model = args.model or "layered"
    n = args.n if args.n is not None else 8
    m = args.m if args.m is not None else 2 * n
    h = args.h if args.h is not None else max(1, min(2, n - 1))
    try:
        inst = gen_instance(model, n, m, h, args.seed if args.seed is not None else 0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(format_instance(inst), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", help="instance file ('-' for stdin)")
        p.add_argument("--out", help="write the result document here")
        p.add_argument("--h", type=int, help="length bound")
        p.add_argument("--eps", type=float, help="accuracy in (0, 1)")
        p.add_argument("--mode", choices=("det", "rand"), default="det")
        p.add_argument("--seed", type=int, help="seed for all randomness")
        p.add_argument("--timing", action="store_true", help="record wall time in the result")

    for name in RUNNERS:
        p = sub.add_parser(name)
        common(p)
        if name in ("maximal-paths", "max-paths"):
            p.add_argument("--variant", choices=VARIANTS)
        if name == "cutmatch":
            p.add_argument("--phi", type=float)
        if name == "blocker":
            p.add_argument("--lam", help="threshold (default: the h-length distance)")
        if name == "solve":
            p.add_argument("--batch", action="store_true",
                           help="put all commodities in one batch (they must be separated)")
    p = sub.add_parser("gen")
    p.add_argument("--model", choices=("layered", "random"))
    p.add_argument("--n", type=int, help="vertex count (default 8)")
    p.add_argument("--m", type=int, help="arc count (default 2n)")
    p.add_argument("--h", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p = sub.add_parser("verify")
    p.add_argument("--input")
    p.add_argument("--result")
    p.add_argument("--corpus", help="directory of NAME.lcf / NAME.json pairs")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return _gen_command(args)
        if args.command == "verify":
            return _verify_command(args)
        if getattr(args, "eps", None) is not None and not 0 < args.eps < 1:
            raise UsageError("--eps must lie in (0, 1)")
        return _solve_command(args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
