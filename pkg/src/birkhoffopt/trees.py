"""Rooted binary trees with labeled leaves as constrained matrices.

A tree with n labeled leaves has n - 1 internal vertices; giving each
internal vertex two child-slot rows and each non-root vertex a column
encodes the tree as a (2n-2) x (2n-2) permutation matrix whose support
avoids a fixed forbidden region.  Matrices in that region's complement
("the binary members") map onto trees surjectively, and the convex hull
of the binary members is closed under Birkhoff decomposition: every term
of a decomposition of a member of the hull is again a binary member.
That closure is what lets the extension machinery optimize functions on
trees.

Vertex labels are 1-based: leaves 1..n, internal vertices n+1..2n-1,
root 2n-1.  Internal vertex v owns matrix rows v-n-1 and v-2 (0-based),
and column j holds tree vertex j+1; a 1 in an owned row marks a child.
The forbidden region forces every child label below its parent, which is
what makes the encoded digraph a tree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import EPS_ZERO, Permutation, ScoreMatrix, validate_doubly_stochastic
from .decomposition import BirkhoffDecomposition, score_decompose
from .extension import Objective


class NotInB(ValueError):
    """Matrix is not a mask-respecting permutation matrix."""


class MaskLeak(RuntimeError):
    """A decomposition term violated the tree mask; theory says this is
    impossible for inputs supported on allowed cells, so it signals an
    implementation bug."""


def forbidden_mask(n_leaves: int) -> np.ndarray:
    """Boolean (2n-2) x (2n-2) array, True where entries must vanish.

    First-child rows i <= n-2 forbid columns j >= i + n; second-child
    rows i >= n-1 forbid columns j >= i.  Both bounds say the same thing
    in vertex terms: a child's label stays below its parent's, and only
    the first slot may hold the vertex directly below the parent.
    """
    if n_leaves < 2:
        raise ValueError("need at least 2 leaves")
    size = 2 * n_leaves - 2
    i, j = np.indices((size, size))
    first = (i <= n_leaves - 2) & (j >= i + n_leaves)
    second = (i >= n_leaves - 1) & (j >= i)
    return first | second


def in_b(matrix, n_leaves: int) -> bool:
    """Whether matrix is a binary member: a permutation matrix with no
    support on forbidden cells."""
    m = np.asarray(matrix, dtype=float)
    size = 2 * n_leaves - 2
    if m.shape != (size, size):
        return False
    if not np.all((m == 0.0) | (m == 1.0)):
        return False
    if not (np.all(m.sum(axis=0) == 1.0) and np.all(m.sum(axis=1) == 1.0)):
        return False
    return not m[forbidden_mask(n_leaves)].any()


@dataclass(frozen=True)
class RootedBinaryTree:
    """Rooted binary tree on 2n-1 vertices: leaves 1..n, root 2n-1.

    children maps each internal vertex to its unordered child pair.
    Internal labels need not respect topological order; matrix encoding
    relabels as needed.
    """

    n_leaves: int
    children: dict[int, tuple[int, int]]

    def __post_init__(self):
        n = self.n_leaves
        internals = set(range(n + 1, 2 * n))
        if set(self.children) != internals:
            raise ValueError(f"children must be given for internal vertices {sorted(internals)}")
        seen = []
        for v, pair in self.children.items():
            if len(set(pair)) != 2:
                raise ValueError(f"internal vertex {v} needs two distinct children")
            seen.extend(pair)
        if sorted(seen) != list(range(1, 2 * n - 1)):
            raise ValueError("every non-root vertex must have exactly one parent")
        # Reachability from the root rules out cycles among internals.
        stack, visited = [2 * n - 1], set()
        while stack:
            v = stack.pop()
            visited.add(v)
            stack.extend(self.children.get(v, ()))
        if len(visited) != 2 * n - 1:
            raise ValueError("tree is not connected (cycle among internal vertices)")

    @property
    def root(self) -> int:
        return 2 * self.n_leaves - 1

    def depths(self) -> dict[int, int]:
        """Vertex depths; the root sits at depth 0."""
        out = {self.root: 0}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children.get(v, ()):
                out[c] = out[v] + 1
                stack.append(c)
        return out

    def leaf_sets(self) -> dict[int, frozenset[int]]:
        """Leaf descendants of every internal vertex."""
        out: dict[int, frozenset[int]] = {}

        def collect(v: int) -> frozenset[int]:
            if v <= self.n_leaves:
                return frozenset([v])
            if v not in out:
                a, b = self.children[v]
                out[v] = collect(a) | collect(b)
            return out[v]

        collect(self.root)
        return out

    def clusters(self) -> frozenset[frozenset[int]]:
        """Canonical signature: the set of leaf clusters.  Two trees are
        leaf-label-preserving isomorphic iff their clusters agree."""
        return frozenset(self.leaf_sets().values())


def tree_from_matrix(matrix) -> RootedBinaryTree:
    """Decode a binary member into its tree.

    Internal vertex v takes its children from the columns carrying the
    ones of its two rows.  Raises NotInB when the matrix is not a
    mask-respecting permutation matrix.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise NotInB(f"matrix shape {m.shape} cannot encode a tree")
    n = m.shape[0] // 2 + 1
    if not in_b(m, n):
        raise NotInB("matrix is not a mask-respecting permutation matrix")
    cols = np.argmax(m, axis=1)
    children = {}
    for v in range(n + 1, 2 * n):
        children[v] = (int(cols[v - n - 1]) + 1, int(cols[v - 2]) + 1)
    return RootedBinaryTree(n, children)


def matrix_from_tree(tree: RootedBinaryTree) -> np.ndarray:
    """Encode a tree as a binary member.

    Internal vertices are relabeled deepest-first so children always carry
    smaller labels than parents; within each vertex the larger child goes
    to the first slot (the only slot allowed to hold label v-1).  The
    result decodes back to an isomorphic tree.
    """
    n = tree.n_leaves
    depths = tree.depths()
    internals = sorted(range(n + 1, 2 * n), key=lambda v: (-depths[v], v))
    relabel = {old: n + 1 + k for k, old in enumerate(internals)}

    size = 2 * n - 2
    m = np.zeros((size, size))
    for old, new in relabel.items():
        pair = [relabel.get(c, c) for c in tree.children[old]]
        first, second = max(pair), min(pair)
        m[new - n - 1, first - 1] = 1.0
        m[new - 2, second - 1] = 1.0
    return m


def tree_decompose(w, score: ScoreMatrix, max_terms: int | None = None
                   ) -> BirkhoffDecomposition:
    """Decompose a member of the tree hull, checking mask preservation.

    The input must be doubly stochastic and vanish on forbidden cells.
    Every term is verified against the mask: a violation raises MaskLeak
    (it cannot happen for valid inputs; the check guards the
    implementation, not the caller).
    """
    w = validate_doubly_stochastic(w)
    if w.shape[0] % 2:
        raise ValueError(f"matrix size {w.shape[0]} cannot encode trees")
    n = w.shape[0] // 2 + 1
    forbidden = forbidden_mask(n)
    if w[forbidden].max(initial=0.0) > EPS_ZERO:
        raise ValueError("matrix has support on forbidden cells")
    d = score_decompose(w, score, max_terms=max_terms, validate=False)
    for term in d.terms:
        if term.perm.matrix()[forbidden].any():
            raise MaskLeak(f"decomposition term {term.perm} violates the tree mask")
    return d


def lca_depth_cost(tree: RootedBinaryTree) -> float:
    """Demo objective: sum over leaf pairs of the depth of their lowest
    common ancestor.  Deeper joins score higher, so minimizing favors
    balanced trees."""
    depths = tree.depths()
    leaf_sets = tree.leaf_sets()
    total = 0
    for u, v in itertools.combinations(range(1, tree.n_leaves + 1), 2):
        total += max(depths[w] for w, leaves in leaf_sets.items()
                     if u in leaves and v in leaves)
    return float(total)


def tree_objective(n_leaves: int, tree_fn=lca_depth_cost,
                   invalid_value: float | None = None) -> Objective:
    """Lift a tree function to permutations of the encoding dimension.

    Permutations that are binary members evaluate through the tree
    decoder; anything else gets invalid_value (default 2 n^3, comfortably
    above any LCA-depth cost), so generic solvers can run on the full
    polytope while decompositions of hull members never see the penalty.
    """
    if invalid_value is None:
        invalid_value = 2.0 * n_leaves ** 3

    def fn(perm: Permutation) -> float:
        m = perm.matrix()
        if not in_b(m, n_leaves):
            return invalid_value
        return tree_fn(tree_from_matrix(m))

    return Objective(2 * n_leaves - 2, fn, payload=n_leaves, name="tree")


def enumerate_trees(n_leaves: int) -> list[RootedBinaryTree]:
    """All (2n-3)!! leaf-labeled rooted binary trees, built by inserting
    leaves one at a time at every possible position."""
    if n_leaves < 2:
        raise ValueError("need at least 2 leaves")
    shapes = [(1, 2)]
    for leaf in range(3, n_leaves + 1):
        shapes = [ins for s in shapes for ins in _insert_leaf(s, leaf)]
    return [_tree_from_shape(s, n_leaves) for s in shapes]


def random_tree(n_leaves: int, rng: np.random.Generator) -> RootedBinaryTree:
    """Random leaf-labeled tree via random insertion positions."""
    if n_leaves < 2:
        raise ValueError("need at least 2 leaves")
    shape = (1, 2)
    for leaf in range(3, n_leaves + 1):
        options = _insert_leaf(shape, leaf)
        shape = options[rng.integers(len(options))]
    return _tree_from_shape(shape, n_leaves)


def random_w_member(n_leaves: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Random point of the tree hull: convex combination of m random
    binary members with uniform-simplex weights."""
    if m < 1:
        raise ValueError("need m >= 1")
    weights = rng.dirichlet(np.ones(m))
    out = np.zeros((2 * n_leaves - 2, 2 * n_leaves - 2))
    for w in weights:
        out += w * matrix_from_tree(random_tree(n_leaves, rng))
    return out


def _insert_leaf(shape, leaf: int) -> list:
    """Every way of grafting a new leaf onto a nested-pair shape: replace
    any subtree s by (s, leaf)."""
    results = [(shape, leaf)]
    if isinstance(shape, tuple):
        left, right = shape
        results += [(s, right) for s in _insert_leaf(left, leaf)]
        results += [(left, s) for s in _insert_leaf(right, leaf)]
    return results


def _tree_from_shape(shape, n_leaves: int) -> RootedBinaryTree:
    """Assign internal labels to a nested-pair shape in post-order, so
    children always precede parents."""
    children: dict[int, tuple[int, int]] = {}
    counter = itertools.count(n_leaves + 1)

    def build(node) -> int:
        if isinstance(node, int):
            return node
        a, b = build(node[0]), build(node[1])
        label = next(counter)
        children[label] = (a, b)
        return label

    build(shape)
    return RootedBinaryTree(n_leaves, children)
