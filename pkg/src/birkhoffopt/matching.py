"""Maximum-weight perfect matching on bipartite supports.

This is the inner oracle of the score-induced decomposition (pick the
best-scoring permutation supported on the positive cells of the working
matrix) and the direction oracle of the Frank-Wolfe solvers (best vertex
against a gradient).  The assignment core is scipy's Hungarian-class
O(n^3) solver; forbidden cells get a large-negative sentinel and a
post-check turns silent infeasibility into NoPerfectMatching.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import EPS_ZERO, Permutation, ScoreMatrix, as_square_matrix


class NoPerfectMatching(RuntimeError):
    """The support admits no perfect matching.

    Signals a caller bug: the masked matrix was not proportional to a
    doubly stochastic matrix.
    """


def support_mask(m: np.ndarray, eps_zero: float = EPS_ZERO) -> np.ndarray:
    """Boolean mask of cells strictly above the zero tolerance."""
    return np.asarray(m) > eps_zero


def max_weight_matching_dense(weights) -> Permutation:
    """Permutation maximizing <W, P> over all permutations.

    Ties are resolved deterministically by the assignment solver; on an
    all-equal matrix the result is the identity.
    """
    w = as_square_matrix(weights, "weight matrix")
    _, cols = linear_sum_assignment(w, maximize=True)
    return Permutation(cols)


def max_score_matching(mask: np.ndarray, score: ScoreMatrix) -> Permutation:
    """Best-scoring permutation supported on the allowed cells.

    mask is a boolean n x n array; the returned permutation P maximizes
    <S, P> subject to P(i, j) = 1 implying mask[i, j].  Raises
    NoPerfectMatching when the allowed cells cannot carry a permutation.
    """
    mask = np.asarray(mask, dtype=bool)
    s = score.values
    if mask.shape != s.shape:
        raise ValueError(f"mask shape {mask.shape} != score shape {s.shape}")
    sentinel = -1e18 * max(1.0, float(np.abs(s).max()))
    w = np.where(mask, s, sentinel)
    _, cols = linear_sum_assignment(w, maximize=True)
    n = s.shape[0]
    if not mask[np.arange(n), cols].all():
        raise NoPerfectMatching(
            "support admits no perfect matching (input not proportional to "
            "a doubly stochastic matrix?)")
    return Permutation(cols)
