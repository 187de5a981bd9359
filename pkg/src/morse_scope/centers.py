"""Internal triples, K-center sets, cross-ratios and small-flip chains on free-group models."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .groups import BoundaryPoint, FreeGroupModel, OutOfBallError, as_point, boundary_geodesic, branch_depth, word_distance
from .metric import QGParams
from .morse import DEFAULT_BUDGET, enumerate_quasi_geodesics


class FlipError(RuntimeError):
    """No small pairing exists; ``config`` holds the stuck quadruple and its values."""

    def __init__(self, message: str, config):
        super().__init__(message)
        self.config = config


@dataclass(frozen=True)
class CenterSet:
    K: int
    points: frozenset
    diameter: int
    exhaustive: bool = True
    depth: int = 0

    def sorted_points(self, space) -> list:
        return sorted(self.points, key=space.sort_key)


@dataclass(frozen=True)
class IdealTriangle:
    vertices: tuple
    depth: int
    sides: tuple

    @classmethod
    def build(cls, model: FreeGroupModel, a, b, c, n: int | None = None) -> "IdealTriangle":
        pts = _distinct(a, b, c)
        n = required_depth(*pts) if n is None else n
        a, b, c = pts
        sides = (
            boundary_geodesic(model, a, b, n),
            boundary_geodesic(model, b, c, n),
            boundary_geodesic(model, c, a, n),
        )
        return cls(pts, n, sides)


def _distinct(*pts) -> tuple:
    pts = tuple(as_point(p) for p in pts)
    if len(set(pts)) != len(pts):
        raise ValueError(f"entries not distinct: {', '.join(map(str, pts))}")
    return pts


def required_depth(*pts: BoundaryPoint) -> int:
    """Smallest truncation depth at which every pairwise branch point is present."""
    return max(branch_depth(p, q) for p, q in itertools.combinations(pts, 2))


def set_diameter(space, pts) -> int:
    pts = list(pts)
    return max((space.distance(x, y) for x, y in itertools.combinations(pts, 2)), default=0)


def _dist_to_side(space, x, side) -> int:
    return min(space.distance(x, y) for y in side)


def internal_triple(space, sides: Sequence[Sequence], K: int):
    """Lexicographically least ``(p1, p2, p3)``, one point per side, pairwise within ``K``."""
    if len(sides) != 3 or any(len(s) == 0 for s in sides):
        raise ValueError("a triangle needs three non-empty sides")
    key = space.sort_key
    s1, s2, s3 = (sorted(set(s), key=key) for s in sides)
    for p in s1:
        near2 = [q for q in s2 if space.distance(p, q) <= K]
        if not near2:
            continue
        near3 = [r for r in s3 if space.distance(p, r) <= K]
        for q in near2:
            for r in near3:
                if space.distance(q, r) <= K:
                    return (p, q, r)
    return None


def _neighborhood(space, seeds, K: int) -> set:
    seen = set(seeds)
    frontier = list(seen)
    for _ in range(K):
        nxt = []
        for x in frontier:
            for y in space.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def _side_options(model, p, q, n, modified, delta_hat, budget):
    geo = boundary_geodesic(model, p, q, n)
    if not modified:
        return [geo], True
    qp = QGParams(1, 20 * Fraction(delta_hat))
    it = enumerate_quasi_geodesics(model, geo[0], geo[-1], qp, qp.max_length(len(geo) - 1), budget)
    paths = it.collect()
    return paths or [geo], bool(it.exhaustive)


@lru_cache(maxsize=65536)
def _center_set(model, pts, K, n, modified, delta_hat, budget) -> CenterSet:
    a, b, c = pts
    if model.radius < n + K:
        raise OutOfBallError(f"model radius {model.radius} is below depth {n} + K {K}")
    exhaustive = True
    options = []
    for p, q in ((a, b), (b, c), (c, a)):
        paths, ok = _side_options(model, p, q, n, modified, delta_hat, budget)
        options.append(paths)
        exhaustive &= ok
    seeds = {x for path in options[0] for x in path}
    found = set()
    for x in _neighborhood(model, seeds, K):
        if all(min(_dist_to_side(model, x, s) for s in opts) <= K for opts in options):
            found.add(x)
    return CenterSet(K, frozenset(found), set_diameter(model, found), exhaustive, n)


def center_set(model: FreeGroupModel, a, b, c, K: int, n: int | None = None, modified: bool = False, delta_hat=0, budget: int = DEFAULT_BUDGET) -> CenterSet:
    """All vertices within ``K`` of every side of the depth-``n`` ideal triangle ``(a, b, c)``.

    With ``modified`` the sides range over all ``(1, 20 * delta_hat)``
    quasi-geodesics between the truncation endpoints, and a vertex counts
    when each side has some such path within ``K``.
    """
    pts = _distinct(a, b, c)
    need = required_depth(*pts)
    n = need if n is None else n
    if n < need:
        raise ValueError(f"depth {n} is below the branch depth {need} of the triangle")
    pts = tuple(sorted(pts, key=BoundaryPoint.sort_key))
    return _center_set(model, pts, K, n, bool(modified), Fraction(delta_hat), budget)


def _common_depth(pts) -> int:
    return required_depth(*pts)


def cross_ratio_detail(model, a, b, c, d, K: int, n: int | None = None, modified=False, delta_hat=0, budget=DEFAULT_BUDGET):
    pts = _distinct(a, b, c, d)
    n = _common_depth(pts) if n is None else n
    a, b, c, d = pts
    m1 = center_set(model, a, b, c, K, n, modified, delta_hat, budget)
    m2 = center_set(model, a, d, c, K, n, modified, delta_hat, budget)
    return set_diameter(model, m1.points | m2.points), m1, m2


def cross_ratio_centers(model, a, b, c, d, K: int, n: int | None = None, modified=False, delta_hat=0, budget=DEFAULT_BUDGET) -> int:
    """``diam(m(a,b,c) | m(a,d,c))``, the center-based cross-ratio."""
    return cross_ratio_detail(model, a, b, c, d, K, n, modified, delta_hat, budget)[0]


def paulin_summand(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, d: BoundaryPoint, n: int) -> int:
    an, bn, cn, dn = (p.truncate(n) for p in (a, b, c, d))
    return word_distance(an, dn) + word_distance(bn, cn) - word_distance(an, bn) - word_distance(cn, dn)


def paulin_cross_ratio(model, a, b, c, d) -> Fraction:
    """Half the eventually constant value of the truncated four-point summand."""
    a, b, c, d = _distinct(a, b, c, d)
    pts = (a, b, c, d)
    bound = sum(len(p.prefix) for p in pts) + 2 * sum(len(p.period) for p in pts)
    cap = 2 * bound + 16
    run, prev = 0, None
    for n in range(bound, cap + 1):
        s = paulin_summand(a, b, c, d, n)
        run = run + 1 if s == prev else 1
        prev = s
        if run == 3:
            return Fraction(s, 2)
    raise RuntimeError(f"summand did not stabilize by depth {cap} for {', '.join(map(str, pts))}")


@dataclass(frozen=True)
class SmallCheck:
    pairing: int | None
    values: tuple

    @property
    def ok(self) -> bool:
        return self.pairing is not None


PAIRINGS = ((0, 1, 2, 3), (0, 2, 1, 3), (1, 0, 2, 3))


def small_cross_ratio_check(model, a, b, c, d, K: int, C, n: int | None = None, **kw) -> SmallCheck:
    """The three pairings ``[a,b,c,d], [a,c,b,d], [b,a,c,d]`` and the first one below ``C``."""
    pts = _distinct(a, b, c, d)
    n = _common_depth(pts) if n is None else n
    vals = tuple(cross_ratio_centers(model, *(pts[i] for i in perm), K, n, **kw) for perm in PAIRINGS)
    pairing = next((i + 1 for i, v in enumerate(vals) if v < C), None)
    return SmallCheck(pairing, vals)


# --------------------------------------------------------------------------
# flip chains
# --------------------------------------------------------------------------


@dataclass
class FlipStep:
    source: tuple
    target: tuple
    value: int
    kind: str  # "flip" (licensed by a small cross-ratio) or "bridge"


@dataclass
class FlipSequence:
    triples: list
    steps: list
    case: str
    permutation: tuple = (0, 1, 2)
    bridge_bound: int | None = None
    values: dict = field(default_factory=dict)

    @property
    def flip_values(self) -> list:
        return [s.value for s in self.steps if s.kind == "flip"]


def shares_two(s: Sequence, t: Sequence) -> bool:
    return len(set(s) & set(t)) >= 2


class _Flipper:
    def __init__(self, model, K, C, n, kw):
        self.model, self.K, self.C, self.n, self.kw = model, K, C, n, kw

    def centers(self, t) -> frozenset:
        return center_set(self.model, *t, self.K, self.n, **self.kw).points

    def union_diam(self, s, t) -> int:
        return set_diameter(self.model, self.centers(s) | self.centers(t))

    def xr(self, a, b, c, d) -> int:
        return cross_ratio_centers(self.model, a, b, c, d, self.K, self.n, **self.kw)


def _flip_search(fl: _Flipper, start: tuple, end: tuple, pool, max_len: int = 5):
    """Breadth-first chain of triples over ``pool``, each step a flip below ``C``."""
    goal = frozenset(end)
    first = frozenset(start)
    prev = {first: None}
    queue = deque([(first, 1)])
    triples = [frozenset(t) for t in itertools.combinations(pool, 3)]
    while queue:
        cur, length = queue.popleft()
        if cur == goal:
            chain = []
            while cur is not None:
                chain.append(cur)
                cur = prev[cur]
            return chain[::-1]
        if length >= max_len:
            continue
        for t in sorted(triples, key=lambda s: sorted(p.sort_key() for p in s)):
            if t in prev or len(cur & t) != 2:
                continue
            if fl.union_diam(tuple(cur), tuple(t)) < fl.C:
                prev[t] = cur
                queue.append((t, length + 1))
    return None


def flip_path(model, V_start: Sequence, V_end: Sequence, K: int, C, n: int | None = None, **kw) -> FlipSequence:
    """Chain of at most five triples from ``V_start`` to ``V_end`` joined by small flips.

    Follows the two-case construction: a first flip toward ``u`` chosen by
    the small cross-ratio check on ``(a, b, c, u)``, then either a flip
    onto a triple sharing two entries with ``(u, v, w)`` (Case 1) or two
    flips through ``(a, w, c)`` or ``(a, v, c)`` (Case 2).  The step
    joining the last two intermediate triples is a bridge whose union
    diameter is reported against ``L' + 3C``.  When the six entries are not
    distinct the construction does not apply and a breadth-first search
    over triples of the given points is used instead.
    """
    V_start = _distinct(*V_start)
    V_end = _distinct(*V_end)
    if len(V_start) != 3 or len(V_end) != 3:
        raise ValueError("flip_path needs two triples")
    pool = sorted(set(V_start) | set(V_end), key=BoundaryPoint.sort_key)
    n = required_depth(*pool) if n is None else n
    fl = _Flipper(model, K, C, n, kw)

    if set(V_start) == set(V_end):
        return FlipSequence([V_start, V_end] if V_start != V_end else [V_start], [], "direct")

    if len(pool) < 6:
        if shares_two(V_start, V_end):
            val = fl.union_diam(V_start, V_end)
            if val < C:
                return FlipSequence([V_start, V_end], [FlipStep(V_start, V_end, val, "flip")], "direct")
        chain = _flip_search(fl, V_start, V_end, pool)
        if chain is None:
            raise FlipError("no chain of small flips among the given points", (V_start, V_end))
        triples = [V_start] + [tuple(sorted(t, key=BoundaryPoint.sort_key)) for t in chain[1:-1]] + [V_end]
        steps = [FlipStep(s, t, fl.union_diam(s, t), "flip") for s, t in zip(triples, triples[1:])]
        return FlipSequence(triples, steps, "search")

    a, b, c = V_start
    u, v, w = V_end
    first = small_cross_ratio_check(model, a, b, c, u, K, C, n, **kw)
    if not first.ok:
        raise FlipError("no small pairing for (a, b, c, u)", ((a, b, c, u), first.values))
    perm = PAIRINGS[first.pairing - 1][:3]
    a, b, c = (V_start[i] for i in perm)
    V1, V2 = V_start, (a, u, c)
    steps = [FlipStep(V1, V2, first.values[first.pairing - 1], "flip")]
    values = {"[a,u,c,w]": fl.xr(a, u, c, w), "[a,u,c,v]": fl.xr(a, u, c, v)}

    if values["[a,u,c,w]"] >= C or values["[a,u,c,v]"] >= C:
        case = "case1"
        options = []
        if values["[a,u,c,w]"] >= C:
            options += [((a, u, w), (a, c, u, w)), ((w, u, c), (u, a, c, w))]
        if values["[a,u,c,v]"] >= C:
            options += [((a, u, v), (a, c, u, v)), ((v, u, c), (u, a, c, v))]
        V3 = None
        for triple, quad in options:
            val = fl.xr(*quad)
            if val < C:
                V3 = triple
                steps.append(FlipStep(V2, V3, val, "flip"))
                break
        if V3 is None:
            raise FlipError("Case 1: no small flip out of (a, u, c)", (V2, options))
        triples = [V1, V2, V3, V_end]
    else:
        case = "case2"
        options = [((u, a, w), (u, v, w, a)), ((u, v, a), (u, w, v, a)), ((a, v, w), (v, u, w, a))]
        V4 = None
        for triple, quad in options:
            val = fl.xr(*quad)
            if val < C:
                V4, v4_val = triple, val
                break
        if V4 is None:
            raise FlipError("Case 2: no small flip into (u, v, w)", (V_end, options))
        if shares_two((a, w, c), V4):
            V3, v3_val = (a, w, c), values["[a,u,c,w]"]
        else:
            V3, v3_val = (a, v, c), values["[a,u,c,v]"]
        steps.append(FlipStep(V2, V3, v3_val, "flip"))
        triples = [V1, V2, V3, V4, V_end]

    bridge_src, bridge_dst = triples[-3], triples[-2]
    if case == "case1":
        bridge_src, bridge_dst = triples[-2], triples[-1]
    steps.append(FlipStep(bridge_src, bridge_dst, fl.union_diam(bridge_src, bridge_dst), "bridge"))
    if case == "case2":
        steps.append(FlipStep(V4, V_end, v4_val, "flip"))
    L_prime = fl.union_diam(V1, V_end)
    values["L'"] = L_prime
    return FlipSequence(triples, steps, case, tuple(perm), L_prime + 3 * C, values)
