"""Continuous extension of permutation functions to doubly stochastic
matrices, with analytic gradients and lossless rounding.

Given f on permutations and a score matrix S, the extension at A is the
convex combination sum_k alpha_k f(P_k) over the score-induced
decomposition of A.  Because each alpha_k is piecewise linear in A, the
extension is too, and its gradient almost everywhere is assembled from
the recorded argmin cells.  Rounding returns the best permutation among
the decomposition terms, which can only improve on the extension value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Permutation, ScoreMatrix
from .decomposition import BirkhoffDecomposition, score_decompose


class Objective:
    """Black-box real-valued function on permutations.

    Evaluations are memoized per permutation, since the optimizers
    re-evaluate the same decomposition terms across many iterations.  The
    memo dict is only ever grown by single-key assignments, so concurrent
    readers cannot observe torn state.  ``payload`` carries the problem
    instance and is opaque to this module.
    """

    def __init__(self, n: int, fn: Callable[[Permutation], float],
                 payload=None, name: str = "objective"):
        self.n = n
        self.payload = payload
        self.name = name
        self._fn = fn
        self._cache: dict[Permutation, float] = {}
        self.raw_evals = 0

    def __call__(self, perm: Permutation) -> float:
        value = self._cache.get(perm)
        if value is None:
            if perm.n != self.n:
                raise ValueError(f"permutation size {perm.n} != objective size {self.n}")
            value = float(self._fn(perm))
            if not np.isfinite(value):
                raise ValueError(f"{self.name} returned non-finite value {value}")
            self.raw_evals += 1
            self._cache[perm] = value
        return value

    def __repr__(self) -> str:
        return f"Objective({self.name}, n={self.n})"


@dataclass(frozen=True)
class ExtensionValue:
    """Extension value at one matrix plus everything derived from its
    decomposition: per-term objective values and the mass divisor used in
    truncated mode (1 when the full decomposition was taken)."""

    value: float
    decomposition: BirkhoffDecomposition
    per_term_f: tuple[float, ...]
    mass_divisor: float = 1.0


def evaluate(a, score: ScoreMatrix, objective: Objective,
             max_terms: int | None = None, validate: bool = True) -> ExtensionValue:
    """Extension value sum_k alpha_k f(P_k) at a doubly stochastic matrix.

    In truncated mode (max_terms set) the retained coefficients no longer
    sum to 1, so the value is renormalized by their mass to stay a convex
    combination of objective values.
    """
    d = score_decompose(a, score, max_terms=max_terms, validate=validate)
    per_term_f = tuple(objective(p) for p in d.permutations)
    divisor = d.total_mass if max_terms is not None else 1.0
    value = float(np.dot(d.coefficients, per_term_f)) / divisor
    return ExtensionValue(value=value, decomposition=d, per_term_f=per_term_f,
                          mass_divisor=divisor)


def gradient_of(ext: ExtensionValue) -> np.ndarray:
    """Analytic a.e. gradient of the extension from a computed value.

    Each coefficient satisfies alpha_k = A(c_k) - sum of earlier alphas
    whose permutation covers cell c_k, where c_k is the recorded argmin
    cell.  Accumulating f through that triangular recursion in reverse
    gives one weight per cell:

        w_k = f_k - sum_{l > k, P_k covers c_l} w_l,   grad[c_k] += w_k.

    The gradient lives in ambient n^2 coordinates; only its projection
    onto directions tangent to the polytope (zero row and column sums) is
    meaningful.  In truncated mode the mass divisor is treated as locally
    constant.
    """
    d = ext.decomposition
    n = d.n
    m = len(d.terms)
    cells_i = np.array([t.argmin_cell[0] for t in d.terms], dtype=np.intp)
    cells_j = np.array([t.argmin_cell[1] for t in d.terms], dtype=np.intp)
    w = np.array(ext.per_term_f, dtype=float) / ext.mass_divisor
    for k in range(m - 2, -1, -1):
        hits = d.terms[k].perm.mapping[cells_i[k + 1:]] == cells_j[k + 1:]
        if hits.any():
            w[k] -= w[k + 1:][hits].sum()
    grad = np.zeros((n, n))
    np.add.at(grad, (cells_i, cells_j), w)
    return grad


def gradient(a, score: ScoreMatrix, objective: Objective,
             max_terms: int | None = None) -> np.ndarray:
    """Convenience wrapper: decompose and return the gradient at a."""
    return gradient_of(evaluate(a, score, objective, max_terms=max_terms))


def best_term(ext: ExtensionValue) -> tuple[Permutation, float]:
    """Minimum-objective permutation among the decomposition terms."""
    k = int(np.argmin(ext.per_term_f))
    return ext.decomposition.terms[k].perm, ext.per_term_f[k]


def round_solution(a, score: ScoreMatrix, objective: Objective,
                   max_terms: int | None = None) -> tuple[Permutation, float]:
    """Round a doubly stochastic matrix to a permutation losslessly.

    Returns the best decomposition term and its objective value, which
    never exceeds the extension value at a (the extension is a convex
    combination of the per-term values, in truncated mode of the same
    term set).
    """
    return best_term(evaluate(a, score, objective, max_terms=max_terms))
