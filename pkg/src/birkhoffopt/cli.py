"""Command line front end: decomposition inspection, solving, benchmarks.

Single runs emit a JSON report to stdout (or --out); benchmarks emit a
CSV table whose content is a pure function of the master seed and flags.
Exit codes: 0 success, 2 input error, 3 guarantee violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .core import (NotDoublyStochastic, Permutation, ScoreMatrix,
                   perturbed_permutation_score, power_score,
                   random_identifying_score, validate_doubly_stochastic)
from .decomposition import reconstruct, score_decompose
from .matching import NoPerfectMatching
from .optimizer import SolverConfig, solve_dynamic, solve_static
from .problems import (Digraph, Graph, InstanceFileError, brute_force_opt,
                       cmp_objective, dfasp_objective, gen_erdos_renyi,
                       gen_euclidean, load_graph, load_permutation, load_tsp,
                       mst_tour, tsp_objective)
from .trees import matrix_from_tree, random_tree, tree_objective

GUARANTEE_SLACK = 1e-9


class GuaranteeViolated(RuntimeError):
    """A guaranteed inequality failed; this is an internal bug sentinel,
    not a property of the instance."""


def load_matrix(path) -> np.ndarray:
    """Matrix file: first line n, then n whitespace-separated rows."""
    with open(path) as fh:
        lines = [(ln, line.split()) for ln, line in enumerate(fh, start=1)
                 if line.strip()]
    if not lines:
        raise InstanceFileError(f"{path}: empty file")
    try:
        n = int(lines[0][1][0])
    except ValueError:
        raise InstanceFileError(f"{path}:{lines[0][0]}: expected dimension")
    if len(lines) != n + 1:
        raise InstanceFileError(f"{path}: expected {n} rows, got {len(lines) - 1}")
    out = np.empty((n, n))
    for k, (ln, toks) in enumerate(lines[1:]):
        if len(toks) != n:
            raise InstanceFileError(f"{path}:{ln}: expected {n} values, got {len(toks)}")
        try:
            out[k] = [float(t) for t in toks]
        except ValueError:
            raise InstanceFileError(f"{path}:{ln}: values must be numeric")
    return out


def _resolve_score(spec: str, n: int, seed: int) -> ScoreMatrix:
    if spec == "random":
        return random_identifying_score(n, np.random.default_rng(seed))
    if spec == "power":
        return power_score(n)
    return ScoreMatrix(load_matrix(spec))


def cmd_decompose(args) -> int:
    a = validate_doubly_stochastic(load_matrix(args.matrix))
    score = _resolve_score(args.score, a.shape[0], args.seed)
    d = score_decompose(a, score, max_terms=args.max_terms)
    err = float(np.abs(reconstruct(d, a.shape[0]) - a).max())
    print("term  alpha             permutation")
    for k, term in enumerate(d.terms, start=1):
        mapping = " ".join(str(int(x)) for x in term.perm.mapping)
        print(f"{k:<5d} {term.alpha:<17.12f} {mapping}")
    print(f"terms: {len(d)}  sum(alpha): {d.total_mass:.12f}  "
          f"reconstruction max error: {err:.3e}  residual: {d.residual_norm:.3e}")
    return 0


def _build_problem(args):
    """Returns (objective, instance descriptor dict)."""
    kind = args.problem
    if kind == "tsp":
        if args.instance:
            inst = load_tsp(args.instance)
            desc = {"kind": kind, "path": args.instance, "n": inst.n}
        else:
            inst = gen_euclidean(args.n, args.seed)
            desc = {"kind": kind, "generator": "euclidean", "n": args.n,
                    "seed": args.seed}
        return tsp_objective(inst), desc
    if kind in ("dfasp", "cmp"):
        directed = kind == "dfasp"
        if args.instance:
            g = load_graph(args.instance)
            want = Digraph if directed else Graph
            if not isinstance(g, want):
                raise InstanceFileError(
                    f"{args.instance}: {kind} needs a "
                    f"{'directed' if directed else 'undirected'} graph")
            desc = {"kind": kind, "path": args.instance, "n": g.n}
        else:
            g = gen_erdos_renyi(args.n, args.p, directed, args.seed)
            desc = {"kind": kind, "generator": "erdos-renyi", "n": args.n,
                    "p": args.p, "seed": args.seed}
        obj = dfasp_objective(g) if directed else cmp_objective(g)
        return obj, desc
    if kind == "tree-demo":
        if not args.n:
            raise InstanceFileError("tree-demo needs --n (leaf count)")
        desc = {"kind": kind, "leaves": args.n, "seed": args.seed}
        return tree_objective(args.n), desc
    raise InstanceFileError(f"unknown problem {kind!r}")


def _build_score_init(args, objective):
    """Returns (score, baseline permutation or None, baseline label)."""
    rng = np.random.default_rng(args.seed)
    init = args.score_init
    if init == "mst":
        if args.problem != "tsp":
            raise InstanceFileError("--score-init mst only applies to tsp")
        p0 = mst_tour(objective.payload)
        return perturbed_permutation_score(p0, rng), p0, "mst"
    if init == "random":
        if args.problem == "tree-demo":
            # A random-tree score keeps the returned solution a valid tree.
            p0 = Permutation.from_matrix(
                matrix_from_tree(random_tree(objective.payload, rng)))
            return perturbed_permutation_score(p0, rng), None, None
        return random_identifying_score(objective.n, rng), None, None
    p0 = load_permutation(init)
    if p0.n != objective.n:
        raise InstanceFileError(
            f"{init}: permutation size {p0.n} != instance size {objective.n}")
    return perturbed_permutation_score(p0, rng), p0, "file"


def _solver_config(args, dynamic: bool) -> SolverConfig:
    period = args.update_period
    if period is None:
        period = 10 if dynamic else 0
    if not dynamic and period != 0:
        raise InstanceFileError("fw-static does not take --update-period > 0")
    return SolverConfig(eta=args.eta, steps=args.steps, patience=args.patience,
                        score_update_period=period,
                        max_terms=args.max_terms or 0, seed=args.seed)


def _run_solver(args, objective, score):
    dynamic = args.algo == "fw-dynamic"
    cfg = _solver_config(args, dynamic)
    solve = solve_dynamic if dynamic else solve_static
    start = time.perf_counter()
    best, trace = solve(objective, score, None, cfg)
    wall = time.perf_counter() - start
    return best, trace, cfg, wall


def cmd_solve(args) -> int:
    objective, desc = _build_problem(args)
    score, p0, baseline_kind = _build_score_init(args, objective)
    best, trace, cfg, wall = _run_solver(args, objective, score)

    baseline = objective(p0) if p0 is not None else None
    report = {
        "problem": args.problem,
        "instance": desc,
        "config": {"algo": args.algo, "eta": cfg.eta, "steps": cfg.steps,
                   "patience": cfg.patience,
                   "update_period": cfg.score_update_period,
                   "max_terms": cfg.max_terms, "seed": cfg.seed},
        "baseline": None if baseline is None else
                    {"kind": baseline_kind, "value": baseline},
        "final": trace.best_f,
        "improvement": _improvement(baseline, trace.best_f),
        "iterations": trace.iterations,
        "wall_time_s": wall,
        "solution_ranks": [int(r) for r in best.inverse().mapping],
    }
    if baseline is not None and trace.best_f > baseline + GUARANTEE_SLACK:
        raise GuaranteeViolated(
            f"final {trace.best_f} exceeds baseline {baseline} under a "
            "score-proximity initialization")
    if args.oracle:
        opt_perm, opt_val = brute_force_opt(objective,
                                            cyclic=args.problem == "tsp")
        report["oracle_optimum"] = opt_val
        if trace.best_f < opt_val - GUARANTEE_SLACK:
            raise GuaranteeViolated(
                f"final {trace.best_f} is below the brute-force optimum "
                f"{opt_val}: objective mismatch")
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("iteration,value,best_f,score_updated\n")
            for rec in trace.records:
                fh.write(f"{rec.iteration},{rec.value!r},{rec.best_f!r},"
                         f"{int(rec.score_updated)}\n")
        report["trace_path"] = args.trace
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _improvement(baseline, final):
    if baseline is None:
        return None
    if baseline == 0.0:
        return 0.0 if final == 0.0 else None
    return (baseline - final) / baseline


def _fmt(x) -> str:
    return "" if x is None else format(x, ".12g")


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    if not sizes or args.instances < 1:
        raise InstanceFileError("need at least one size and one instance")
    dynamic = args.algo == "fw-dynamic"
    rows = ["problem,n,instance,seed,baseline,final,improvement"]
    for size in sizes:
        baselines, finals, improvements = [], [], []
        for idx in range(args.instances):
            seed = int(np.random.SeedSequence(
                [args.seed, size, idx]).generate_state(1)[0])
            run = argparse.Namespace(**vars(args))
            run.n, run.seed, run.instance = size, seed, None
            objective, _ = _build_problem(run)
            if run.score_init == "mst" and run.problem != "tsp":
                run.score_init = "random"
            score, p0, _ = _build_score_init(run, objective)
            cfg = _solver_config(run, dynamic)
            solve = solve_dynamic if dynamic else solve_static
            _, trace = solve(objective, score, None, cfg)
            baseline = objective(p0) if p0 is not None else None
            imp = _improvement(baseline, trace.best_f)
            rows.append(",".join([args.problem, str(size), str(idx), str(seed),
                                  _fmt(baseline), _fmt(trace.best_f), _fmt(imp)]))
            finals.append(trace.best_f)
            if baseline is not None:
                baselines.append(baseline)
            if imp is not None:
                improvements.append(imp)
        rows.append(",".join([
            args.problem, str(size), "mean", "",
            _fmt(float(np.mean(baselines)) if baselines else None),
            _fmt(float(np.mean(finals))),
            _fmt(float(np.mean(improvements)) if improvements else None)]))
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _add_solver_flags(p: argparse.ArgumentParser, bench: bool) -> None:
    p.add_argument("--algo", choices=["fw-static", "fw-dynamic"],
                   default="fw-dynamic")
    p.add_argument("--score-init", default="mst" if bench else "random",
                   help="random, mst (tsp only), or a permutation file path")
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--patience", type=int, default=0)
    p.add_argument("--update-period", type=int, default=None)
    p.add_argument("--max-terms", type=int, default=5,
                   help="decomposition truncation (0 = full)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="birkhoffopt",
        description="Decompose doubly stochastic matrices and optimize "
                    "permutation objectives over the Birkhoff polytope.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="print a score-induced decomposition")
    p.add_argument("matrix", help="matrix file: first line n, then n rows")
    p.add_argument("--score", default="random",
                   help="random, power, or a matrix file path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-terms", type=int, default=None)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("solve", help="optimize one instance")
    p.add_argument("--problem", required=True,
                   choices=["tsp", "dfasp", "cmp", "tree-demo"])
    p.add_argument("--instance", default=None, help="instance file path")
    p.add_argument("--n", type=int, default=0, help="generator size")
    p.add_argument("--p", type=float, default=0.5, help="edge probability")
    _add_solver_flags(p, bench=False)
    p.add_argument("--trace", default=None, help="write per-iteration CSV here")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check against brute force (n <= 10)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="benchmark seeded instances")
    p.add_argument("--problem", required=True, choices=["tsp", "dfasp", "cmp"])
    p.add_argument("--sizes", required=True, help="comma-separated sizes")
    p.add_argument("--instances", type=int, default=5)
    p.add_argument("--p", type=float, default=0.5)
    _add_solver_flags(p, bench=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceFileError, NotDoublyStochastic, NoPerfectMatching,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GuaranteeViolated as exc:
        print(f"guarantee violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
