"""Word-metric models: free groups, their boundaries, and products of trees.

Generators are ``a, b, c, ...``; the inverse of a generator is its uppercase
letter.  Vertices of a :class:`FreeGroupModel` are freely reduced words and
distances are computed from common prefixes, so a model of large radius
costs nothing until its :attr:`FreeGroupModel.graph` is requested.

Boundary points are eventually periodic reduced rays, written
``prefix(period)``, e.g. ``ab(a)`` or ``(B)``.
"""

from __future__ import annotations

import os
import random
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .metric import MetricGraph, build_graph

LETTERS = "abcdefghijklmnopqrstuvwxyz"
DEFAULT_BALL_CAP = 2_000_000
DEFAULT_MATRIX_CAP = 8_000


class OutOfBallError(ValueError):
    pass


def symbols(rank: int) -> str:
    """Generators and inverses in the toolkit order ``a A b B ...``."""
    return "".join(x + x.upper() for x in LETTERS[:rank])


_ORDER = {s: i for i, s in enumerate(symbols(26))}


def word_key(w: str) -> tuple:
    """Shortlex order with letters ordered ``a < A < b < B < ...``."""
    return (len(w), tuple(_ORDER[c] for c in w))


def inverse(w: str) -> str:
    return w[::-1].swapcase()


def reduce(word: str, rank: int | None = None) -> str:
    """Free reduction by a single stack pass."""
    allowed = symbols(rank if rank is not None else 26)
    out: list[str] = []
    for c in word:
        if c not in allowed:
            raise ValueError(f"unknown letter {c!r}")
        if out and out[-1] == c.swapcase():
            out.pop()
        else:
            out.append(c)
    return "".join(out)


def is_reduced(w: str) -> bool:
    return all(x != y.swapcase() for x, y in zip(w, w[1:]))


def common_prefix_length(u: str, v: str) -> int:
    return len(os.path.commonprefix((u, v)))


def word_distance(u: str, v: str) -> int:
    return len(u) + len(v) - 2 * common_prefix_length(u, v)


def _encode(words: Sequence[str], width: int) -> np.ndarray:
    out = np.zeros((len(words), width), dtype=np.int16)
    for i, w in enumerate(words):
        out[i, : len(w)] = [ord(c) for c in w]
    return out


def pairwise_word_distances(left: Sequence[str], right: Sequence[str] | None = None) -> np.ndarray:
    """Matrix of tree distances between two word lists, computed columnwise in numpy."""
    right = left if right is None else right
    width = max(1, max(map(len, left), default=0), max(map(len, right), default=0))
    A, B = _encode(left, width), _encode(right, width)
    la = np.array([len(w) for w in left], dtype=np.int32)
    lb = np.array([len(w) for w in right], dtype=np.int32)
    lcp = np.zeros((len(left), len(right)), dtype=np.int32)
    alive = np.ones_like(lcp, dtype=bool)
    for k in range(width):
        alive &= (A[:, k, None] == B[None, :, k]) & (A[:, k, None] != 0)
        lcp += alive
    return la[:, None] + lb[None, :] - 2 * lcp


def word_geodesic(u: str, v: str) -> tuple:
    """The unique tree geodesic from ``u`` to ``v``."""
    k = common_prefix_length(u, v)
    down = [u[:i] for i in range(len(u), k - 1, -1)]
    up = [v[:i] for i in range(k + 1, len(v) + 1)]
    return tuple(down + up)


# --------------------------------------------------------------------------
# boundary points
# --------------------------------------------------------------------------

_POINT_RE = re.compile(r"^([a-zA-Z]*)\(([a-zA-Z]+)\)$")


def _primitive_root(p: str) -> str:
    n = len(p)
    for d in range(1, n + 1):
        if n % d == 0 and p[:d] * (n // d) == p:
            return p[:d]
    return p


@dataclass(frozen=True, order=False)
class BoundaryPoint:
    """An eventually periodic reduced ray ``prefix . period . period ...`` in canonical form."""

    prefix: str
    period: str

    @classmethod
    def make(cls, prefix: str, period: str) -> "BoundaryPoint":
        prefix, period = reduce(prefix), reduce(period)
        if not period:
            raise ValueError("period reduces to the empty word")
        # cyclically reduce: t c t^-1 repeated is t c c c ...
        head = []
        while len(period) > 1 and period[0] == period[-1].swapcase():
            head.append(period[0])
            period = period[1:-1]
        prefix = reduce(prefix + "".join(head))
        # cancellation at the prefix/period junction
        while prefix and prefix[-1] == period[0].swapcase():
            prefix = prefix[:-1]
            period = period[1:] + period[0]
        period = _primitive_root(period)
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = period[-1] + period[:-1]
        return cls(prefix, period)

    @classmethod
    def parse(cls, text: str) -> "BoundaryPoint":
        m = _POINT_RE.match(text)
        if not m:
            raise ValueError(f"not a boundary point: {text!r} (expected prefix(period))")
        return cls.make(m.group(1), m.group(2))

    def truncate(self, n: int) -> str:
        """The first ``n`` letters of the ray."""
        if n <= len(self.prefix):
            return self.prefix[:n]
        k = n - len(self.prefix)
        reps = -(-k // len(self.period))
        return self.prefix + (self.period * reps)[:k]

    @property
    def stable_depth(self) -> int:
        return len(self.prefix) + len(self.period)

    def __str__(self) -> str:
        return f"{self.prefix}({self.period})"

    def __repr__(self) -> str:
        return f"BoundaryPoint({str(self)!r})"

    def sort_key(self) -> tuple:
        return (word_key(self.prefix), word_key(self.period))


def as_point(x) -> BoundaryPoint:
    return x if isinstance(x, BoundaryPoint) else BoundaryPoint.parse(x)


def branch_depth(a: BoundaryPoint, b: BoundaryPoint) -> int:
    """Length of the longest common prefix of two distinct boundary points."""
    if a == b:
        raise ValueError(f"{a} and {b} are the same boundary point")
    # two periodic tails agreeing on |p|+|q| letters coincide
    bound = max(len(a.prefix), len(b.prefix)) + len(a.period) + len(b.period) + 1
    return common_prefix_length(a.truncate(bound), b.truncate(bound))


def random_word(rng: random.Random, rank: int, length: int) -> str:
    syms = symbols(rank)
    w = ""
    while len(w) < length:
        c = rng.choice(syms)
        if not w or w[-1] != c.swapcase():
            w += c
    return w


def random_boundary_point(rng: random.Random, rank: int = 2, max_prefix: int = 2, max_period: int = 2) -> BoundaryPoint:
    while True:
        pre = random_word(rng, rank, rng.randint(0, max_prefix))
        per = random_word(rng, rank, rng.randint(1, max_period))
        try:
            return BoundaryPoint.make(pre, per)
        except ValueError:
            continue


def random_distinct_points(rng: random.Random, k: int, rank: int = 2, max_prefix: int = 2, max_period: int = 2) -> list:
    out: list = []
    while len(out) < k:
        p = random_boundary_point(rng, rank, max_prefix, max_period)
        if p not in out:
            out.append(p)
    return out


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------


def ball_size(rank: int, radius: int) -> int:
    if rank == 1:
        return 2 * radius + 1
    return 1 + 2 * rank * ((2 * rank - 1) ** radius - 1) // (2 * rank - 2)


@dataclass(frozen=True, eq=False)
class FreeGroupModel:
    """Cayley ball of radius ``radius`` in the free group of rank ``rank``."""

    rank: int
    radius: int
    matrix_cap: int = DEFAULT_MATRIX_CAP

    @property
    def alphabet(self) -> str:
        return symbols(self.rank)

    @property
    def size(self) -> int:
        return ball_size(self.rank, self.radius)

    # -- metric-space surface, on words -------------------------------------
    is_tree = True

    def __contains__(self, w) -> bool:
        return isinstance(w, str) and len(w) <= self.radius and is_reduced(w) and set(w) <= set(self.alphabet)

    def neighbors(self, w: str) -> list:
        out = []
        for s in self.alphabet:
            if w and w[-1] == s.swapcase():
                out.append(w[:-1])
            elif len(w) < self.radius:
                out.append(w + s)
        return sorted(out, key=word_key)

    @staticmethod
    def distance(u: str, v: str) -> int:
        return word_distance(u, v)

    @staticmethod
    def sort_key(w: str) -> tuple:
        return word_key(w)

    def reduce(self, w: str) -> str:
        return reduce(w, self.rank)

    # -- materialized ball ---------------------------------------------------
    @cached_property
    def words(self) -> list:
        out = [""]
        frontier = [""]
        for _ in range(self.radius):
            frontier = [w + s for w in frontier for s in self.alphabet if not w or w[-1] != s.swapcase()]
            out.extend(frontier)
        return out

    @cached_property
    def index(self) -> dict:
        return {w: i for i, w in enumerate(self.words)}

    @cached_property
    def graph(self) -> MetricGraph:
        if self.size > self.matrix_cap:
            raise MemoryError(f"ball of {self.size} vertices exceeds matrix cap {self.matrix_cap}")
        idx = self.index
        edges = [(idx[w[:-1]], i) for i, w in enumerate(self.words) if w]
        return build_graph(edges, vertex_count=len(self.words))

    def vertex_path(self, words: Iterable[str]) -> tuple:
        return tuple(self.index[w] for w in words)


def free_group_ball(rank: int, radius: int, cap: int = DEFAULT_BALL_CAP) -> FreeGroupModel:
    if rank < 1 or radius < 1:
        raise ValueError("need rank >= 1 and radius >= 1")
    if rank > 26:
        raise ValueError("at most 26 generators")
    if ball_size(rank, radius) > cap:
        raise MemoryError(f"ball of {ball_size(rank, radius)} vertices exceeds cap {cap}")
    return FreeGroupModel(rank, radius)


def boundary_geodesic(model: FreeGroupModel, a, b, n: int) -> tuple:
    """Depth-``n`` truncation of the geodesic from ``a`` to ``b``.

    ``b`` may be a boundary point or a vertex word; in the latter case the
    result is the geodesic from ``b`` toward ``a`` truncated at ``a``'s
    depth-``n`` prefix.
    """
    a = as_point(a)
    if n > model.radius:
        raise OutOfBallError(f"truncation depth {n} exceeds ball radius {model.radius}")
    if isinstance(b, str) and "(" not in b:
        if b not in model:
            raise OutOfBallError(f"{b!r} is not a vertex of the ball")
        return word_geodesic(b, a.truncate(n))
    b = as_point(b)
    if a == b:
        raise ValueError("endpoints of a bi-infinite geodesic must differ")
    return word_geodesic(a.truncate(n), b.truncate(n))


def translate(model: FreeGroupModel | None, g: str, x):
    """Left multiplication by the group element ``g``."""
    g = reduce(g, model.rank if model else None)
    if isinstance(x, BoundaryPoint):
        return BoundaryPoint.make(g + x.prefix, x.period)
    if isinstance(x, str) and "(" in x:
        return translate(model, g, BoundaryPoint.parse(x))
    w = reduce(g + x)
    if model is not None and len(w) > model.radius:
        raise OutOfBallError(f"{g}*{x} = {w} leaves the ball of radius {model.radius}")
    return w


@dataclass(frozen=True, eq=False)
class ProductModel:
    """l1 product of two free-group balls; vertices are word pairs."""

    first: FreeGroupModel
    second: FreeGroupModel
    matrix_cap: int = 30_000

    def __contains__(self, v) -> bool:
        return isinstance(v, tuple) and len(v) == 2 and v[0] in self.first and v[1] in self.second

    def neighbors(self, v: tuple) -> list:
        u1, u2 = v
        out = [(w, u2) for w in self.first.neighbors(u1)] + [(u1, w) for w in self.second.neighbors(u2)]
        return sorted(out, key=self.sort_key)

    @staticmethod
    def distance(u: tuple, v: tuple) -> int:
        return word_distance(u[0], v[0]) + word_distance(u[1], v[1])

    @staticmethod
    def sort_key(v: tuple) -> tuple:
        return (word_key(v[0]), word_key(v[1]))

    @staticmethod
    def project(v: tuple, factor: int) -> str:
        return v[factor - 1]

    @cached_property
    def vertices(self) -> list:
        return [(u, w) for u in self.first.words for w in self.second.words]

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def graph(self) -> MetricGraph:
        n = len(self.vertices)
        if n > self.matrix_cap:
            raise MemoryError(f"product of {n} vertices exceeds matrix cap {self.matrix_cap}")
        idx = self.index
        edges = []
        for v in self.vertices:
            for w in self.neighbors(v):
                if idx[w] > idx[v]:
                    edges.append((idx[v], idx[w]))
        return build_graph(edges, vertex_count=n)


def product_of_trees(m1: FreeGroupModel, m2: FreeGroupModel, cap: int = DEFAULT_BALL_CAP) -> ProductModel:
    if m1.size * m2.size > cap:
        raise MemoryError(f"product of {m1.size * m2.size} vertices exceeds cap {cap}")
    return ProductModel(m1, m2)
