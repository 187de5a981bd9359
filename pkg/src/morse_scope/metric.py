"""Finite graph metric spaces: hop distances, geodesics, Gromov products,
slimness of triangles and quasi-geodesic checks.

Every space used by the toolkit exposes the same small surface:

* ``neighbors(v)`` -- vertices adjacent to ``v`` (sorted by ``sort_key``),
* ``distance(u, v)`` -- integer hop distance,
* ``sort_key(v)`` -- total order used for every lexicographic tie-break.

:class:`MetricGraph` implements it with a precomputed distance table; the
word-metric models in :mod:`morse_scope.groups` implement it arithmetically.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Hashable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

Vertex = Hashable
DiscretePath = tuple

DEFAULT_GEODESIC_CAP = 10**5


class DisconnectedGraphError(ValueError):
    def __init__(self, component):
        self.component = sorted(component)
        super().__init__(f"graph is disconnected; unreachable component {self.component}")


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Connected unweighted graph on vertices ``0..n-1`` with all-pairs hop distances."""

    vertex_count: int
    edges: frozenset
    dist: np.ndarray = field(repr=False)
    adjacency: tuple = field(repr=False)

    @property
    def vertices(self) -> range:
        return range(self.vertex_count)

    @property
    def is_tree(self) -> bool:
        return len(self.edges) == self.vertex_count - 1

    def neighbors(self, v: int) -> tuple:
        return self.adjacency[v]

    def distance(self, u: int, v: int) -> int:
        return int(self.dist[u, v])

    @staticmethod
    def sort_key(v: int) -> int:
        return v

    def __contains__(self, v) -> bool:
        return isinstance(v, (int, np.integer)) and 0 <= v < self.vertex_count

    def distance_to_set(self, vertices: Sequence[int]) -> np.ndarray:
        """Distance from every vertex of the graph to the set ``vertices``."""
        return self.dist[:, list(vertices)].min(axis=1)


def _all_pairs(n: int, edges: Iterable[tuple[int, int]], chunk: int = 512) -> np.ndarray:
    rows, cols = [], []
    for u, v in edges:
        rows += [u, v]
        cols += [v, u]
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    dtype = np.int16 if n < 32000 else np.int32
    out = np.empty((n, n), dtype=dtype)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(n, start + chunk))
        block = shortest_path(adj, unweighted=True, directed=False, indices=idx)
        out[start : start + len(idx)] = block.astype(dtype)
    return out


def build_graph(edge_list: Iterable[tuple[int, int]], vertex_count: int | None = None) -> MetricGraph:
    """Build a :class:`MetricGraph` from an edge list.

    Vertices are ``0..vertex_count-1`` (default: one past the largest id seen).
    Self-loops are dropped; a disconnected input raises
    :class:`DisconnectedGraphError` naming a component that misses vertex 0.
    """
    edges = set()
    for u, v in edge_list:
        u, v = int(u), int(v)
        if u < 0 or v < 0:
            raise ValueError(f"negative vertex id in edge ({u}, {v})")
        if u != v:
            edges.add((min(u, v), max(u, v)))
    if not edges and not vertex_count:
        raise ValueError("empty edge list")
    n = vertex_count if vertex_count is not None else 1 + max(max(e) for e in edges)
    if edges and max(max(e) for e in edges) >= n:
        raise ValueError("edge endpoint exceeds vertex_count")

    rows = [u for u, v in edges] + [v for u, v in edges]
    cols = [v for u, v in edges] + [u for u, v in edges]
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(adj, directed=False)
    if ncomp > 1:
        other = next(lab for lab in labels if lab != labels[0])
        raise DisconnectedGraphError(np.flatnonzero(labels == other).tolist())

    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    adjacency = tuple(tuple(sorted(x)) for x in nbrs)
    return MetricGraph(n, frozenset(edges), _all_pairs(n, edges), adjacency)


def read_graph(path: str | Path) -> MetricGraph:
    """Read the plain-text graph format: ``n m`` then ``m`` lines ``u v``."""
    text = Path(path).read_bytes().decode("ascii")
    if "\r" in text:
        raise ValueError("graph file must use LF line endings")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise ValueError("empty graph file")
    n, m = (int(t) for t in lines[0].split())
    if len(lines) - 1 != m:
        raise ValueError(f"header declares {m} edges, found {len(lines) - 1}")
    seen = set()
    for ln in lines[1:]:
        u, v = (int(t) for t in ln.split())
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"duplicate edge {u} {v}")
        seen.add(key)
    return build_graph(seen, vertex_count=n)


def write_graph(g: MetricGraph, path: str | Path) -> None:
    edges = sorted(g.edges)
    body = [f"{g.vertex_count} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    Path(path).write_bytes(("\n".join(body) + "\n").encode("ascii"))


def cycle_graph(n: int) -> MetricGraph:
    return build_graph([(i, (i + 1) % n) for i in range(n)], vertex_count=n)


def path_graph(n: int) -> MetricGraph:
    return build_graph([(i, i + 1) for i in range(n - 1)], vertex_count=n)


def random_tree(n: int, rng: random.Random) -> MetricGraph:
    """Uniform random recursive tree on ``n >= 2`` vertices."""
    return build_graph([(i, rng.randrange(i)) for i in range(1, n)], vertex_count=n)


# --------------------------------------------------------------------------
# quasi-geodesic parameters and checks
# --------------------------------------------------------------------------


def _rational(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class QGParams:
    lam: Fraction
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lam", _rational(self.lam))
        object.__setattr__(self, "eps", _rational(self.eps))
        if self.lam < 1 or self.eps < 0:
            raise ValueError(f"need lambda >= 1 and epsilon >= 0, got ({self.lam}, {self.eps})")

    def lower(self, k: int) -> int:
        """Least integer distance allowed between points ``k`` steps apart."""
        return max(0, math.ceil(Fraction(k) / self.lam - self.eps))

    def upper(self, k: int) -> int:
        return math.floor(self.lam * k + self.eps)

    def max_length(self, d: int) -> int:
        """Longest parameter interval whose endpoints can be ``d`` apart."""
        return math.floor(self.lam * (d + self.eps))

    def __str__(self) -> str:
        return f"({self.lam},{self.eps})"


class QGCheck(NamedTuple):
    ok: bool
    violation: tuple[int, int] | None


def is_discrete_path(space, path: Sequence) -> bool:
    return all(a == b or space.distance(a, b) == 1 for a, b in zip(path, path[1:]))


def is_quasi_geodesic(space, path: Sequence, q: QGParams) -> QGCheck:
    """Check ``(1/lam)|i-j| - eps <= d(path[i], path[j]) <= lam|i-j| + eps`` for all i < j."""
    path = list(path)
    for i, j in itertools.combinations(range(len(path)), 2):
        k = j - i
        d = space.distance(path[i], path[j])
        if d < q.lower(k) or d > q.upper(k):
            return QGCheck(False, (i, j))
    return QGCheck(True, None)


# --------------------------------------------------------------------------
# geodesics, Gromov products, Hausdorff distance
# --------------------------------------------------------------------------


class Geodesics(NamedTuple):
    paths: list
    truncated: bool


def geodesics(space, u, v, mode: str = "all", cap: int = DEFAULT_GEODESIC_CAP) -> Geodesics:
    """Geodesics from ``u`` to ``v`` in lexicographic order of vertex sequences."""
    if mode not in ("one", "all"):
        raise ValueError("mode must be 'one' or 'all'")
    limit = 1 if mode == "one" else cap
    out: list = []
    truncated = False
    path = [u]

    def walk(x) -> bool:
        nonlocal truncated
        if x == v:
            if len(out) >= limit:
                truncated = mode == "all"
                return False
            out.append(tuple(path))
            return True
        dx = space.distance(x, v)
        for w in space.neighbors(x):
            if space.distance(w, v) == dx - 1:
                path.append(w)
                cont = walk(w)
                path.pop()
                if not cont:
                    return False
        return True

    walk(u)
    return Geodesics(out, truncated)


def gromov_product(space, x, y, p) -> Fraction:
    """``(x, y)_p = (d(x,p) + d(y,p) - d(x,y)) / 2``."""
    return Fraction(space.distance(x, p) + space.distance(y, p) - space.distance(x, y), 2)


def hausdorff_distance(space, A: Iterable, B: Iterable) -> int:
    A, B = list(A), list(B)
    if not A or not B:
        raise ValueError("Hausdorff distance of an empty set")
    if isinstance(space, MetricGraph):
        block = space.dist[np.ix_(A, B)]
        return int(max(block.min(axis=1).max(), block.min(axis=0).max()))
    d = [[space.distance(a, b) for b in B] for a in A]
    return max(max(min(row) for row in d), max(min(col) for col in zip(*d)))


# --------------------------------------------------------------------------
# slim triangles
# --------------------------------------------------------------------------


@dataclass
class SlimReport:
    delta: int
    witness: tuple | None  # (x, y, z, (side_xy, side_yz, side_zx))
    triangles: int
    truncated: bool


class _SideCache:
    def __init__(self, g: MetricGraph, cap: int):
        self.g = g
        self.cap = cap
        self.truncated = False
        self._cache: dict = {}

    def sides(self, u: int, v: int) -> list:
        key = (u, v)
        if key not in self._cache:
            if (v, u) in self._cache:
                self._cache[key] = [(tuple(reversed(p)), arr[::-1], dv) for p, arr, dv in self._cache[(v, u)]]
            else:
                res = geodesics(self.g, u, v, "all", self.cap)
                self.truncated |= res.truncated
                self._cache[key] = [
                    (p, np.array(p), self.g.distance_to_set(p)) for p in res.paths
                ]
        return self._cache[key]


def _triangle_delta(cache: _SideCache, x: int, y: int, z: int):
    best, best_sides = -1, None
    for (p1, a1, d1), (p2, a2, d2), (p3, a3, d3) in itertools.product(
        cache.sides(x, y), cache.sides(y, z), cache.sides(z, x)
    ):
        s = max(
            int(np.minimum(d2[a1], d3[a1]).max()),
            int(np.minimum(d1[a2], d3[a2]).max()),
            int(np.minimum(d1[a3], d2[a3]).max()),
        )
        if s > best:
            best, best_sides = s, (p1, p2, p3)
    return best, best_sides


def triangle_slimness(g: MetricGraph, x: int, y: int, z: int, cap: int = DEFAULT_GEODESIC_CAP) -> SlimReport:
    """Least delta making every geodesic triangle on ``x, y, z`` delta-slim."""
    cache = _SideCache(g, cap)
    delta, sides = _triangle_delta(cache, x, y, z)
    return SlimReport(delta, (x, y, z, sides), 1, cache.truncated)


FAST_SLIM_LIMIT = 160


def _unique_geodesics(g: MetricGraph) -> bool:
    # unique iff every v != u has exactly one neighbour one step closer to u
    n = g.vertex_count
    A = np.zeros((n, n), dtype=np.int32)
    for u, v in g.edges:
        A[u, v] = A[v, u] = 1
    D = g.dist
    closer = (D[:, None, :] == D[:, :, None] - 1).astype(np.int32)  # [u, v, w]
    counts = np.einsum("uvw,vw->uv", closer, A)
    np.fill_diagonal(counts, 1)
    return bool((counts == 1).all())


def _slim_all_unique(g: MetricGraph) -> SlimReport:
    """Vectorized exact slim constant when all geodesics are unique."""
    n = g.vertex_count
    paths = [[None] * n for _ in range(n)]
    to_side = np.empty((n, n, n), dtype=np.int32)  # [u, v, p] = d(p, [u, v])
    for u in range(n):
        for v in range(u, n):
            p = geodesics(g, u, v, "one").paths[0]
            paths[u][v], paths[v][u] = p, tuple(reversed(p))
            to_side[u, v] = to_side[v, u] = g.distance_to_set(p)
    # T[x, y, z]: farthest point of [x, y] from [y, z] | [z, x]
    T = np.empty((n, n, n), dtype=np.int32)
    for x in range(n):
        for y in range(n):
            side = np.asarray(paths[x][y])
            T[x, y] = np.minimum(to_side[y][:, side], to_side[:, x][:, side]).max(axis=1)
    S = np.maximum(np.maximum(T, T.transpose(1, 2, 0)), T.transpose(2, 0, 1))
    idx = np.arange(n)
    combo = (idx[:, None, None] <= idx[None, :, None]) & (idx[None, :, None] <= idx[None, None, :])
    flat = np.where(combo, S, -1).ravel()
    k = int(np.argmax(flat))
    x, y, z = np.unravel_index(k, S.shape)
    x, y, z = int(x), int(y), int(z)
    sides = (paths[x][y], paths[y][z], paths[z][x])
    return SlimReport(int(flat[k]), (x, y, z, sides), int(combo.sum()), False)


def slim_delta(g: MetricGraph, sample="all", cap: int = DEFAULT_GEODESIC_CAP) -> SlimReport:
    """Slimness constant over a family of geodesic triangles.

    ``sample`` is ``"all"`` (every vertex triple, the exact slim constant),
    ``("random", k, seed)`` or an explicit iterable of vertex triples.
    """
    if isinstance(sample, str) and sample == "all":
        if g.vertex_count <= FAST_SLIM_LIMIT and _unique_geodesics(g):
            return _slim_all_unique(g)
        triples: Iterable = itertools.combinations_with_replacement(g.vertices, 3)
    elif isinstance(sample, tuple) and sample and sample[0] == "random":
        _, k, seed = sample
        rng = random.Random(seed)
        n = g.vertex_count
        triples = [(rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(k)]
    else:
        triples = list(sample)
    cache = _SideCache(g, cap)
    best, witness, count = 0, None, 0
    for x, y, z in triples:
        count += 1
        d, sides = _triangle_delta(cache, x, y, z)
        if witness is None or d > best:
            best, witness = d, (x, y, z, sides)
    return SlimReport(best, witness, count, cache.truncated)


def endpoints_form_triangle(sides: Sequence[Sequence]) -> bool:
    if len(sides) != 3 or any(len(s) == 0 for s in sides):
        return False
    ends = Counter()
    for s in sides:
        ends[s[0]] += 1
        ends[s[-1]] += 1
    return all(c % 2 == 0 for c in ends.values())
