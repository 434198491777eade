"""Vertex-ordering problems: objectives, generators, baselines, oracles.

Three objectives share one position convention: a permutation maps rank
to vertex, so the order reads mapping[0], mapping[1], ...  For the
feedback arc set this makes an edge (u, v) backward exactly when u is
ranked at or after v.

Instance file formats (consumed by the command line front end):

* tour instances: first line n, then n lines "x y";
* graphs: first line "n m directed" or "n m undirected", then m lines
  "u v" with 0-based vertex ids;
* permutations: one line of n space-separated 0-based ranks, the i-th
  number being the rank of vertex i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import Permutation
from .extension import Objective

# Below this size pairwise distances are recomputed on demand; at or
# above it the full matrix is cached on the instance.
DIST_CACHE_MIN_N = 128


class TooLarge(ValueError):
    """Brute-force enumeration refused beyond n = 10."""


class InstanceFileError(ValueError):
    """Instance file failed to parse; message carries the line number."""


@dataclass
class TspInstance:
    """n points in the unit square with the Euclidean metric."""

    points: np.ndarray
    _dist: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError(f"need at least 3 planar points, got shape {pts.shape}")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise ValueError("coordinates must lie in the unit square")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def distance_matrix(self) -> np.ndarray:
        if self._dist is None:
            diff = self.points[:, None, :] - self.points[None, :, :]
            d = np.sqrt((diff ** 2).sum(axis=2))
            if self.n < DIST_CACHE_MIN_N:
                return d
            self._dist = d
        return self._dist

    def tour_length(self, order: np.ndarray) -> float:
        if self.n >= DIST_CACHE_MIN_N:
            d = self.distance_matrix()
            return float(d[order, np.roll(order, -1)].sum())
        pts = self.points[order]
        return float(np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1).sum())


@dataclass(frozen=True)
class Digraph:
    """Directed graph as an edge array, no self-loops or duplicates."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", _check_edges(self.n, self.edges, directed=True))


@dataclass(frozen=True)
class Graph:
    """Undirected graph; edges stored as sorted pairs."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        e = _check_edges(self.n, self.edges, directed=False)
        object.__setattr__(self, "edges", np.sort(e, axis=1) if e.size else e)


def _check_edges(n: int, edges, directed: bool) -> np.ndarray:
    e = np.asarray(edges, dtype=np.intp).reshape(-1, 2)
    if n < 1:
        raise ValueError("need n >= 1")
    if e.size:
        if e.min() < 0 or e.max() >= n:
            raise ValueError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
        canon = e if directed else np.sort(e, axis=1)
        if len({(int(u), int(v)) for u, v in canon}) != len(e):
            raise ValueError("parallel edges are not allowed")
    e.setflags(write=False)
    return e


def tsp_objective(inst: TspInstance) -> Objective:
    """Closed-tour length visiting the cities in the permutation's order."""
    return Objective(inst.n, lambda p: inst.tour_length(p.mapping),
                     payload=inst, name="tsp")


def _positions(perm: Permutation) -> np.ndarray:
    pos = np.empty(perm.n, dtype=np.intp)
    pos[perm.mapping] = np.arange(perm.n)
    return pos


def dfasp_objective(g: Digraph) -> Objective:
    """Number of edges pointing backward against the vertex order.

    Removing the counted edges leaves an acyclic graph; the count is 0
    exactly when the order is a topological order.
    """
    def count_backward(perm: Permutation) -> float:
        if not g.edges.size:
            return 0.0
        pos = _positions(perm)
        return float(np.sum(pos[g.edges[:, 0]] >= pos[g.edges[:, 1]]))

    return Objective(g.n, count_backward, payload=g, name="dfasp")


def cmp_objective(g: Graph) -> Objective:
    """Cutwidth: the maximum number of edges crossing any prefix cut."""
    def cutwidth(perm: Permutation) -> float:
        if not g.edges.size or g.n < 2:
            return 0.0
        pos = _positions(perm)
        lo = np.minimum(pos[g.edges[:, 0]], pos[g.edges[:, 1]])
        hi = np.maximum(pos[g.edges[:, 0]], pos[g.edges[:, 1]])
        crossing = np.zeros(g.n, dtype=np.intp)
        np.add.at(crossing, lo, 1)
        np.add.at(crossing, hi, -1)
        return float(np.cumsum(crossing)[:-1].max())

    return Objective(g.n, cutwidth, payload=g, name="cmp")


def gen_euclidean(n: int, seed) -> TspInstance:
    """n i.i.d. uniform points in the unit square."""
    rng = np.random.default_rng(seed)
    return TspInstance(rng.random((n, 2)))


def gen_erdos_renyi(n: int, p: float, directed: bool, seed):
    """Erdos-Renyi graph: every (ordered) vertex pair draws an independent
    edge coin with probability p.  Self-loops are excluded."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    coins = rng.random((n, n)) < p
    if directed:
        keep = ~np.eye(n, dtype=bool)
        return Digraph(n, np.argwhere(coins & keep))
    keep = np.triu(np.ones((n, n), dtype=bool), k=1)
    return Graph(n, np.argwhere(coins & keep))


def mst_tour(inst: TspInstance) -> Permutation:
    """Double-tree heuristic: preorder walk of a minimum spanning tree.

    Prim's algorithm from vertex 0 with smallest-index tie-breaking, then
    a depth-first preorder visiting children in ascending order.  On
    metric instances the tour is at most twice the optimum.
    """
    n = inst.n
    d = inst.distance_matrix()
    in_tree = np.zeros(n, dtype=bool)
    key = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.intp)
    key[0] = 0.0
    for _ in range(n):
        u = int(np.argmin(np.where(in_tree, np.inf, key)))
        in_tree[u] = True
        better = (~in_tree) & (d[u] < key)
        key[better] = d[u][better]
        parent[better] = u
    children: list[list[int]] = [[] for _ in range(n)]
    for v in range(1, n):
        children[parent[v]].append(v)
    order = []
    stack = [0]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(reversed(children[u]))
    return Permutation(order)


def brute_force_opt(objective: Objective, cyclic: bool = False
                    ) -> tuple[Permutation, float]:
    """Exact minimum by enumerating permutations (n <= 10).

    With cyclic=True the first element is pinned to 0, which is valid for
    objectives invariant under cyclic rotation (closed tours).
    """
    n = objective.n
    if n > 10:
        raise TooLarge(f"brute force refused for n = {n} > 10")
    if cyclic:
        candidates = (
            (0,) + rest for rest in itertools.permutations(range(1, n)))
    else:
        candidates = itertools.permutations(range(n))
    best_perm, best_val = None, np.inf
    for mapping in candidates:
        p = Permutation(np.array(mapping, dtype=np.intp))
        v = objective(p)
        if v < best_val:
            best_perm, best_val = p, v
    return best_perm, best_val


# -- instance files -----------------------------------------------------

def _tokens(path) -> list[tuple[int, list[str]]]:
    with open(path) as fh:
        return [(ln, line.split()) for ln, line in enumerate(fh, start=1)
                if line.strip()]


def load_tsp(path) -> TspInstance:
    lines = _tokens(path)
    if not lines:
        raise InstanceFileError(f"{path}: empty file")
    try:
        n = int(lines[0][1][0])
    except ValueError:
        raise InstanceFileError(f"{path}:{lines[0][0]}: expected point count")
    if len(lines) != n + 1:
        raise InstanceFileError(f"{path}: expected {n} point lines, got {len(lines) - 1}")
    pts = np.empty((n, 2))
    for k, (ln, toks) in enumerate(lines[1:]):
        try:
            pts[k] = [float(toks[0]), float(toks[1])]
        except (ValueError, IndexError):
            raise InstanceFileError(f"{path}:{ln}: expected 'x y'")
    try:
        return TspInstance(pts)
    except ValueError as exc:
        raise InstanceFileError(f"{path}: {exc}")


def save_tsp(path, inst: TspInstance) -> None:
    with open(path, "w") as fh:
        fh.write(f"{inst.n}\n")
        for x, y in inst.points:
            fh.write(f"{x!r} {y!r}\n")


def load_graph(path):
    """Read 'n m directed|undirected' plus m edge lines; returns Digraph
    or Graph accordingly."""
    lines = _tokens(path)
    if not lines:
        raise InstanceFileError(f"{path}: empty file")
    ln, head = lines[0]
    try:
        n, m, kind = int(head[0]), int(head[1]), head[2]
    except (ValueError, IndexError):
        raise InstanceFileError(f"{path}:{ln}: expected 'n m directed|undirected'")
    if kind not in ("directed", "undirected"):
        raise InstanceFileError(f"{path}:{ln}: unknown graph kind {kind!r}")
    if len(lines) != m + 1:
        raise InstanceFileError(f"{path}: expected {m} edge lines, got {len(lines) - 1}")
    edges = np.empty((m, 2), dtype=np.intp)
    for k, (ln, toks) in enumerate(lines[1:]):
        try:
            edges[k] = [int(toks[0]), int(toks[1])]
        except (ValueError, IndexError):
            raise InstanceFileError(f"{path}:{ln}: expected 'u v'")
    try:
        cls = Digraph if kind == "directed" else Graph
        return cls(n, edges)
    except ValueError as exc:
        raise InstanceFileError(f"{path}: {exc}")


def save_graph(path, g) -> None:
    kind = "directed" if isinstance(g, Digraph) else "undirected"
    with open(path, "w") as fh:
        fh.write(f"{g.n} {len(g.edges)} {kind}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def load_permutation(path) -> Permutation:
    """Read per-vertex ranks: the i-th number is the rank of vertex i."""
    lines = _tokens(path)
    if len(lines) != 1:
        raise InstanceFileError(f"{path}: expected a single line of ranks")
    ln, toks = lines[0]
    try:
        ranks = np.array([int(t) for t in toks], dtype=np.intp)
    except ValueError:
        raise InstanceFileError(f"{path}:{ln}: ranks must be integers")
    try:
        return Permutation(ranks).inverse()
    except ValueError as exc:
        raise InstanceFileError(f"{path}:{ln}: {exc}")


def save_permutation(path, perm: Permutation) -> None:
    ranks = perm.inverse().mapping
    with open(path, "w") as fh:
        fh.write(" ".join(str(int(r)) for r in ranks) + "\n")
