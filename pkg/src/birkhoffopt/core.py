"""Domain types, validation, and randomized constructors.

Matrices are plain float64 numpy arrays throughout the package.  The two
wrapper types defined here carry structure an array cannot: ``Permutation``
(hashable bijection, usable as a dict key) and ``ScoreMatrix`` (an array
plus the caller's claim that it ranks all permutations distinctly).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Entries with absolute value at or below EPS_ZERO are treated as exact
# zeros in support computations; EPS_DS is the default row/column-sum
# validation tolerance.  Decompositions subtract up to n^2 - n + 1 terms,
# whose accumulated rounding stays far below both at n <= 200.
EPS_ZERO = 1e-12
EPS_DS = 1e-9

# Safety margin keeping perturbed scores strictly inside the 1/(2n) ball
# around their center permutation.
EPS_MARGIN = 1e-6

# Largest dimension for which the power score's entries are exact integers
# in float64.
POWER_SCORE_MAX_N = 8


class NotDoublyStochastic(ValueError):
    """Matrix failed doubly stochastic validation."""

    def __init__(self, message: str, axis: str = "", index: int = -1,
                 deviation: float = 0.0):
        super().__init__(message)
        self.axis = axis
        self.index = index
        self.deviation = deviation


class DimensionTooLargeForExactScore(ValueError):
    """Power score requested beyond the exactly representable range."""


def as_square_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square float64 array.

    Raises ValueError if the input is not square or contains non-finite
    entries.
    """
    m = np.asarray(values, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{name} must be square with n >= 1, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


class Permutation:
    """A bijection on {0, ..., n-1}, interchangeably a 0/1 matrix.

    ``mapping[i] = j`` means row i carries its 1 in column j.  Instances
    are immutable and hashable, so they serve as dict keys in objective
    memo caches and solver pools.
    """

    __slots__ = ("mapping", "_key")

    def __init__(self, mapping):
        arr = np.asarray(mapping, dtype=np.intp).copy()
        n = arr.size
        if arr.ndim != 1 or n < 1:
            raise ValueError("mapping must be a non-empty 1-d index array")
        if not np.array_equal(np.sort(arr), np.arange(n)):
            raise ValueError(f"mapping {arr.tolist()} is not a bijection on [0, {n})")
        arr.setflags(write=False)
        self.mapping = arr
        self._key = tuple(int(x) for x in arr)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    @classmethod
    def from_matrix(cls, m) -> "Permutation":
        """Read a permutation off a 0/1 matrix (exact binary entries)."""
        m = as_square_matrix(m, "permutation matrix")
        if not np.all((m == 0.0) | (m == 1.0)):
            raise ValueError("matrix entries must be exactly 0 or 1")
        if not (np.all(m.sum(axis=0) == 1.0) and np.all(m.sum(axis=1) == 1.0)):
            raise ValueError("matrix must have a single 1 per row and column")
        return cls(np.argmax(m, axis=1))

    @property
    def n(self) -> int:
        return self.mapping.size

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[np.arange(self.n), self.mapping] = 1.0
        return m

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.intp)
        inv[self.mapping] = np.arange(self.n)
        return Permutation(inv)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Permutation({list(self._key)})"


@dataclass(frozen=True)
class ScoreMatrix:
    """Real matrix ranking permutations by the inner product <S, P>.

    ``identifying_assumed`` records whether the caller believes all n!
    permutation scores are pairwise distinct (true for the constructors in
    this module; random entries are identifying with probability one).
    """

    values: np.ndarray
    identifying_assumed: bool = True

    def __post_init__(self):
        v = as_square_matrix(self.values, "score matrix")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def score_of(self, p: Permutation) -> float:
        """<S, P>, the score this matrix assigns to a permutation."""
        return float(self.values[np.arange(self.n), p.mapping].sum())


def validate_doubly_stochastic(m, eps_ds: float = EPS_DS,
                               eps_zero: float = EPS_ZERO) -> np.ndarray:
    """Check membership in the Birkhoff polytope and return a clean copy.

    Entries in [-eps_zero, 0) are clamped to exactly 0; any entry below
    -eps_zero, or any row/column sum off 1 by more than eps_ds, raises
    NotDoublyStochastic naming the worst violation.
    """
    m = as_square_matrix(m)
    low = m.min()
    if low < -eps_zero:
        i, j = np.unravel_index(np.argmin(m), m.shape)
        raise NotDoublyStochastic(
            f"entry ({i},{j}) = {low:.3e} is negative beyond tolerance",
            axis="entry", index=int(i), deviation=float(low))
    row_dev = m.sum(axis=1) - 1.0
    col_dev = m.sum(axis=0) - 1.0
    worst_row = int(np.argmax(np.abs(row_dev)))
    worst_col = int(np.argmax(np.abs(col_dev)))
    if abs(row_dev[worst_row]) >= abs(col_dev[worst_col]):
        axis, index, dev = "row", worst_row, row_dev[worst_row]
    else:
        axis, index, dev = "col", worst_col, col_dev[worst_col]
    if abs(dev) > eps_ds:
        raise NotDoublyStochastic(
            f"{axis} {index} sums to {1.0 + dev:.12g} (deviation {dev:.3e} "
            f"exceeds tolerance {eps_ds:.1e})",
            axis=axis, index=index, deviation=float(dev))
    out = m.copy()
    out[(out < 0.0)] = 0.0
    return out


def barycenter(n: int) -> np.ndarray:
    """Center of the Birkhoff polytope: every entry 1/n."""
    return np.full((n, n), 1.0 / n)


def from_convex_combination(weights, permutations) -> np.ndarray:
    """Sum of weight_k * P_k as a dense matrix.

    Weights must be nonnegative and sum to 1 within EPS_DS; the result is
    doubly stochastic by construction.
    """
    weights = np.asarray(weights, dtype=float)
    perms = list(permutations)
    if weights.size != len(perms) or weights.size == 0:
        raise ValueError("need one weight per permutation")
    if weights.min() < 0.0 or abs(weights.sum() - 1.0) > EPS_DS:
        raise ValueError("weights must be a point in the simplex")
    n = perms[0].n
    out = np.zeros((n, n))
    for w, p in zip(weights, perms):
        out[np.arange(n), p.mapping] += w
    return out


def random_convex_combination(n: int, m: int, rng: np.random.Generator):
    """Draw m random permutations and uniform-simplex (Dirichlet) weights.

    Returns (weights, permutations); feed to from_convex_combination for
    the matrix.  Exposed separately so tests can check reconstruction.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    weights = rng.dirichlet(np.ones(m))
    perms = [Permutation.random(n, rng) for _ in range(m)]
    return weights, perms


def random_doubly_stochastic(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Random point of the Birkhoff polytope: convex combination of m
    random permutations.

    Exactly doubly stochastic up to floating rounding; support is limited
    to the union of the generating permutations (at most m*n cells).
    """
    weights, perms = random_convex_combination(n, m, rng)
    return from_convex_combination(weights, perms)


def random_interior_doubly_stochastic(n: int, m: int, rng: np.random.Generator,
                                      mix: float = 0.1) -> np.ndarray:
    """Random doubly stochastic matrix with full support.

    Blends a random convex combination with the barycenter so every entry
    is at least mix/n.  Useful wherever an argument must admit every
    permutation as a matching (e.g. score-proximity guarantees).
    """
    if not 0.0 < mix <= 1.0:
        raise ValueError("mix must lie in (0, 1]")
    return (1.0 - mix) * random_doubly_stochastic(n, m, rng) + mix * barycenter(n)


def random_identifying_score(n: int, rng: np.random.Generator) -> ScoreMatrix:
    """Score matrix with i.i.d. uniform [0, 1) entries.

    Absolutely continuous entries rank all n! permutations distinctly with
    probability one.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    return ScoreMatrix(rng.random((n, n)), identifying_assumed=True)


def power_score(n: int) -> ScoreMatrix:
    """Deterministic identifying score S(i, j) = 2^(i + n*j), 0-based.

    Every permutation score is a sum of n distinct powers of two, so the
    induced order is a total order.  Capped at n = 8; beyond that the
    exponents leave the range where float64 arithmetic on the scores is
    exact, so order-sensitive tests use small n (see tests) and random
    scores cover the rest.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n > POWER_SCORE_MAX_N:
        raise DimensionTooLargeForExactScore(
            f"power score supports n <= {POWER_SCORE_MAX_N}, got {n}")
    i, j = np.indices((n, n))
    return ScoreMatrix(np.exp2(i + n * j), identifying_assumed=True)


def perturbed_permutation_score(p: Permutation, rng: np.random.Generator,
                                scale: float | None = None) -> ScoreMatrix:
    """Score matrix centered on a permutation: S = P + scale * Q.

    Q has i.i.d. uniform [0, 1) entries and the default scale is
    1/(2n) - EPS_MARGIN, so max|S - P| < 1/(2n) holds strictly.  A score
    within that ball makes P the top-ranked permutation, hence the first
    term of any full-support decomposition; rounding under such a score
    can never return anything worse than P.
    """
    n = p.n
    if scale is None:
        scale = 1.0 / (2.0 * n) - EPS_MARGIN
    if not 0.0 < scale < 1.0 / (2.0 * n):
        raise ValueError(f"scale must lie in (0, 1/(2n)) = (0, {1.0 / (2 * n):.4g})")
    return ScoreMatrix(p.matrix() + scale * rng.random((n, n)),
                       identifying_assumed=True)
