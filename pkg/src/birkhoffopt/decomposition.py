"""Birkhoff decompositions: classical and score-induced.

A doubly stochastic matrix is peeled into a convex combination of
permutation matrices by repeatedly subtracting a matching scaled by the
smallest entry it covers.  The classical variant takes an arbitrary
matching each round; the score-induced variant always takes the matching
of maximum score, which makes every coefficient a continuous piecewise
linear function of the input matrix.  Each term records the cell where
the minimum was attained; those cells drive the analytic gradient of the
extension module.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (EPS_ZERO, Permutation, ScoreMatrix, random_identifying_score,
                   validate_doubly_stochastic)
from .matching import max_score_matching


class TermBudgetExceeded(RuntimeError):
    """More than n^2 - n + 1 terms were produced; the input or the working
    matrix is numerically corrupt."""


class Term(NamedTuple):
    alpha: float
    perm: Permutation
    argmin_cell: tuple[int, int]


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Ordered terms (alpha_k, P_k) plus the provenance gradients need.

    residual_norm is the largest absolute entry left after the loop: at
    most the zero tolerance for a full decomposition, the undistributed
    mass when the term count was capped.  min_gap is the smallest margin
    by which any term's minimum beat the closest strictly larger candidate
    value.  Candidates equal to the minimum up to the zero tolerance are
    one group: every cell of a term not covered by any later permutation
    reads exactly the coefficient, so such ties hold identically on the
    polytope and are harmless, whereas a small strict gap means some later
    coefficient is about to vanish and the coefficient functions have a
    kink nearby.  support_sizes records the positive-cell count after each
    subtraction, strictly decreasing.
    """

    terms: tuple[Term, ...]
    residual_norm: float
    min_gap: float
    support_sizes: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.terms[0].perm.n

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([t.alpha for t in self.terms])

    @property
    def permutations(self) -> tuple[Permutation, ...]:
        return tuple(t.perm for t in self.terms)

    @property
    def total_mass(self) -> float:
        return float(self.coefficients.sum())

    def __len__(self) -> int:
        return len(self.terms)


def score_decompose(a, score: ScoreMatrix, max_terms: int | None = None,
                    validate: bool = True,
                    eps_zero: float = EPS_ZERO) -> BirkhoffDecomposition:
    """Score-induced Birkhoff decomposition.

    Loop: take the best-scoring matching of the current support, subtract
    it scaled by the smallest covered entry, clamp that cell to exact
    zero, repeat until nothing is left or max_terms is reached.  With an
    identifying score the emitted terms equal, term for term, the nonzero
    coefficients of the order-based recursion over all n! permutations.

    Parameters
    ----------
    a : array-like
        Doubly stochastic matrix (validated unless validate=False).
    score : ScoreMatrix
        Ranking matrix; a warning is issued if it is not assumed
        identifying, since then the decomposition order is not continuous.
    max_terms : int, optional
        Stop after this many terms, leaving residual mass unreported in
        the coefficients (the extension module renormalizes).
    """
    a = np.asarray(a, dtype=float)
    if validate:
        b = validate_doubly_stochastic(a, eps_zero=eps_zero)
    else:
        b = a.copy()
    n = b.shape[0]
    if score.n != n:
        raise ValueError(f"score dimension {score.n} != matrix dimension {n}")
    if not score.identifying_assumed:
        warnings.warn("score matrix not assumed identifying: decomposition "
                      "order-continuity guarantees are void", stacklevel=2)

    budget = n * n - n + 1
    rows = np.arange(n)
    terms: list[Term] = []
    gaps: list[float] = []
    support_sizes: list[int] = []
    while True:
        mask = b > eps_zero
        if not mask.any():
            break
        if max_terms is not None and len(terms) >= max_terms:
            break
        if len(terms) >= budget:
            raise TermBudgetExceeded(
                f"more than {budget} terms at n={n}; input is numerically "
                "corrupt")
        perm = max_score_matching(mask, score)
        vals = b[rows, perm.mapping]
        alpha = float(vals.min())
        i_star = int(np.flatnonzero(vals == alpha)[0])
        cell = (i_star, int(perm.mapping[i_star]))
        above = vals[vals > alpha + eps_zero]
        gaps.append(float(above.min() - alpha) if above.size else np.inf)
        new_vals = vals - alpha
        new_vals[new_vals <= eps_zero] = 0.0
        b[rows, perm.mapping] = new_vals
        terms.append(Term(alpha, perm, cell))
        support_sizes.append(int((b > eps_zero).sum()))

    min_gap = float(min(gaps)) if gaps else np.inf
    return BirkhoffDecomposition(
        terms=tuple(terms),
        residual_norm=float(np.abs(b).max()) if b.size else 0.0,
        min_gap=min_gap,
        support_sizes=tuple(support_sizes),
    )


def classical_decompose(a, rng: np.random.Generator,
                        max_terms: int | None = None) -> BirkhoffDecomposition:
    """Classical Birkhoff decomposition with an arbitrary matching per step.

    Implemented as the score-induced loop against a fresh random score, so
    repeated calls on the same matrix generally produce different (all
    valid) decompositions; contrast with score_decompose, which is a
    function of (matrix, score) alone.
    """
    a = np.asarray(a, dtype=float)
    return score_decompose(a, random_identifying_score(a.shape[0], rng),
                           max_terms=max_terms)


def reconstruct(decomposition: BirkhoffDecomposition,
                n: int | None = None) -> np.ndarray:
    """Sum of alpha_k * P_k as a dense matrix."""
    if n is None:
        n = decomposition.n
    out = np.zeros((n, n))
    rows = np.arange(n)
    for alpha, perm, _ in decomposition.terms:
        out[rows, perm.mapping] += alpha
    return out
