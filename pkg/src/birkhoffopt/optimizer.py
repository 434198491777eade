"""Frank-Wolfe minimization of extensions over the Birkhoff polytope.

Plain gradient steps would leave the polytope, so each iteration moves
toward the vertex best aligned with the descent direction: the iterate
stays a convex combination of permutation matrices throughout.  The
static solver keeps one score matrix; the dynamic solver periodically
recenters the score on the best permutation seen so far, which changes
the landscape being optimized without ever degrading the rounded
solution.  Both return the best permutation across every decomposition
term encountered, so the reported objective is non-increasing in time by
construction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .core import (Permutation, ScoreMatrix, barycenter,
                   perturbed_permutation_score, validate_doubly_stochastic)
from .extension import Objective, best_term, evaluate, gradient_of
from .matching import max_weight_matching_dense


class EmptyPool(ValueError):
    """Score update requested from an empty permutation pool."""


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the static and dynamic solvers.

    eta is the constant step size (classical decaying 2/(t+2) steps are
    not used; a constant matches the benchmark protocol).  patience = 0
    disables early stopping, score_update_period = 0 disables score
    updates (static mode), max_terms = 0 means full decompositions.
    update_trigger selects when dynamic updates fire: every period
    iterations, or on a stall of the extension value.
    """

    eta: float = 0.01
    steps: int = 1000
    patience: int = 0
    score_update_period: int = 0
    max_terms: int = 0
    seed: int = 0
    noise_scale: float | None = None
    update_trigger: str = "period"

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.patience < 0 or self.score_update_period < 0 or self.max_terms < 0:
            raise ValueError("patience, score_update_period, max_terms must be >= 0")
        if self.update_trigger not in ("period", "stall"):
            raise ValueError("update_trigger must be 'period' or 'stall'")

    @property
    def truncation(self) -> int | None:
        return self.max_terms if self.max_terms > 0 else None


class TraceRecord(NamedTuple):
    iteration: int
    value: float
    best_f: float
    score_updated: bool


@dataclass
class SolveTrace:
    records: list[TraceRecord] = field(default_factory=list)
    best_perm: Permutation | None = None
    best_f: float = np.inf
    iterations: int = 0
    wall_time: float = 0.0


def fw_direction(grad: np.ndarray) -> Permutation:
    """Vertex minimizing <grad, P>: the Frank-Wolfe descent direction."""
    return max_weight_matching_dense(-np.asarray(grad, dtype=float))


def fw_step(a: np.ndarray, perm: Permutation, lam: float) -> np.ndarray:
    """Convex step (1 - lam) * A + lam * P; stays doubly stochastic."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("step size must lie in [0, 1]")
    return (1.0 - lam) * np.asarray(a, dtype=float) + lam * perm.matrix()


def update_score_from_pool(pool: Iterable[Permutation], objective: Objective,
                           rng: np.random.Generator,
                           scale: float | None = None) -> ScoreMatrix:
    """Score matrix recentered on the best permutation in the pool.

    The new score sits within 1/(2n) of the pool's argmin, so rounding any
    full-support matrix under it can never return anything worse than that
    argmin: a score update is safe for the incumbent solution.
    """
    best = None
    for p in pool:
        if best is None or (objective(p), p._key) < (objective(best), best._key):
            best = p
    if best is None:
        raise EmptyPool("cannot update score from an empty pool")
    return perturbed_permutation_score(best, rng, scale=scale)


def _solve(objective: Objective, score: ScoreMatrix, a0, cfg: SolverConfig,
           dynamic: bool) -> tuple[Permutation, SolveTrace]:
    start = time.perf_counter()
    n = objective.n
    a = barycenter(n) if a0 is None else validate_doubly_stochastic(a0)
    rng = np.random.default_rng(cfg.seed)
    trace = SolveTrace()
    pool: dict[Permutation, float] = {}
    stale = 0          # iterations since the best rounded value improved
    value_stale = 0    # iterations since the extension value improved
    best_value = np.inf
    for t in range(1, cfg.steps + 1):
        a = validate_doubly_stochastic(a, eps_ds=1e-8)
        ext = evaluate(a, score, objective, max_terms=cfg.truncation,
                       validate=False)
        improved = False
        for perm, fval in zip(ext.decomposition.permutations, ext.per_term_f):
            pool.setdefault(perm, fval)
            if fval < trace.best_f:
                trace.best_perm, trace.best_f = perm, fval
                improved = True
        stale = 0 if improved else stale + 1
        if ext.value < best_value - 1e-12:
            best_value, value_stale = ext.value, 0
        else:
            value_stale += 1

        direction = fw_direction(gradient_of(ext))
        a = fw_step(a, direction, cfg.eta)

        updated = False
        if dynamic:
            if cfg.update_trigger == "period":
                updated = t % cfg.score_update_period == 0
            else:
                updated = value_stale >= max(1, cfg.patience // 2)
            if updated:
                score = update_score_from_pool(pool, objective, rng,
                                               scale=cfg.noise_scale)
                best_value, value_stale = np.inf, 0
        trace.records.append(TraceRecord(t, ext.value, trace.best_f, updated))
        if cfg.patience and stale >= cfg.patience:
            break
    trace.iterations = len(trace.records)
    trace.wall_time = time.perf_counter() - start
    return trace.best_perm, trace


def solve_static(objective: Objective, score: ScoreMatrix, a0=None,
                 cfg: SolverConfig = SolverConfig()) -> tuple[Permutation, SolveTrace]:
    """Frank-Wolfe under a fixed score matrix.

    Returns the best permutation among all decomposition terms seen (never
    worse than rounding the final iterate) and the iteration trace.  With
    identical config and inputs the trajectory is fully deterministic.
    """
    if cfg.score_update_period != 0:
        raise ValueError("static solve requires score_update_period = 0")
    return _solve(objective, score, a0, cfg, dynamic=False)


def solve_dynamic(objective: Objective, score0: ScoreMatrix, a0=None,
                  cfg: SolverConfig = SolverConfig(score_update_period=10)
                  ) -> tuple[Permutation, SolveTrace]:
    """Frank-Wolfe with periodic score recentering on the pool's best.

    Every update keeps the rounding guarantee, so the best rounded value
    recorded in the trace is non-increasing across updates as well as
    within stretches of a fixed score.
    """
    if cfg.update_trigger == "period" and cfg.score_update_period < 1:
        raise ValueError("dynamic solve requires score_update_period >= 1 "
                         "(or update_trigger='stall')")
    return _solve(objective, score0, a0, cfg, dynamic=True)
