"""Empirical Morse gauges by exhaustive quasi-geodesic search.

A Morse gauge is an existence statement about all quasi-geodesics, so only
lower bounds are computable.  Every result here carries an ``exhaustive``
flag: when it is set, the reported defect is the exact maximum over all
stall-paths of length at most ``maxlen``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .metric import QGParams, is_discrete_path, is_quasi_geodesic

DEFAULT_GRID = tuple(QGParams(l, e) for l in (1, 2, 3, 5) for e in (0, 1, 2, 4))
DEFAULT_BUDGET = 2_000_000


class BudgetExhausted(RuntimeError):
    pass


def _bounds(q: QGParams, maxlen: int) -> tuple[list, list]:
    return [q.lower(k) for k in range(maxlen + 1)], [q.upper(k) for k in range(maxlen + 1)]


def _extends(space, path: list, w, lower: list, upper: list) -> bool:
    m = len(path)
    for i, x in enumerate(path):
        d = space.distance(x, w)
        k = m - i
        if d < lower[k] or d > upper[k]:
            return False
    return True


def _completable(space, path: list, v, steps_min: int, lower: list) -> bool:
    # every earlier vertex must be far enough from v for the shortest completion
    m = len(path) - 1
    for i, x in enumerate(path[:-1]):
        k = m + steps_min - i
        if k < len(lower) and space.distance(x, v) < lower[k]:
            return False
    return True


class QuasiGeodesicEnumeration:
    """Lazy branch-and-bound stream of ``(lam, eps)``-quasi-geodesics from ``u`` to ``v``.

    After iteration, ``exhaustive`` tells whether the stream covered every
    path of length at most ``maxlen`` and ``expanded`` how much budget was used.
    """

    def __init__(self, space, u, v, q: QGParams, maxlen: int, budget: int = DEFAULT_BUDGET):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.space, self.u, self.v, self.q = space, u, v, q
        self.maxlen = min(maxlen, q.max_length(space.distance(u, v)))
        self.budget = budget
        self.expanded = 0
        self.exhaustive: bool | None = None

    def __iter__(self) -> Iterator[tuple]:
        space, v, maxlen = self.space, self.v, self.maxlen
        q = self.q
        lower, upper = _bounds(q, max(maxlen, 0))
        path = [self.u]
        cap = [maxlen]
        self.exhaustive = True

        def walk():
            self.expanded += 1
            if self.expanded > self.budget:
                raise BudgetExhausted
            last = path[-1]
            if last == v:
                yield tuple(path)
            steps = len(path) - 1
            if steps >= cap[-1]:
                return
            for w in [last, *space.neighbors(last)]:
                dw = space.distance(w, v)
                wcap = min(cap[-1], steps + 1 + q.max_length(dw))
                if dw > wcap - steps - 1 or not _extends(space, path, w, lower, upper):
                    continue
                path.append(w)
                if _completable(space, path, v, dw, lower):
                    cap.append(wcap)
                    yield from walk()
                    cap.pop()
                path.pop()

        try:
            yield from walk()
        except BudgetExhausted:
            self.exhaustive = False

    def collect(self) -> list:
        return list(self)


def enumerate_quasi_geodesics(space, u, v, q: QGParams, maxlen: int, budget: int = DEFAULT_BUDGET) -> QuasiGeodesicEnumeration:
    return QuasiGeodesicEnumeration(space, u, v, q, maxlen, budget)


@dataclass
class DefectReport:
    defect: int
    witness: tuple
    expanded: int
    exhaustive: bool


class _DistanceToPath:
    def __init__(self, space, path: Sequence):
        self.space = space
        self.path = list(dict.fromkeys(path))
        self._cache: dict = {}

    def __call__(self, x) -> int:
        d = self._cache.get(x)
        if d is None:
            d = min(self.space.distance(x, y) for y in self.path)
            self._cache[x] = d
        return d


def tree_defect_ceiling(q: QGParams, maxlen: int) -> int:
    """Largest excursion a ``q``-quasi-geodesic of length ``<= maxlen`` can make in a tree.

    An excursion of height ``h`` leaves and re-enters through one vertex, so
    that vertex is revisited ``>= 2h`` steps later; the lower bound only
    permits revisits within ``lam * eps`` steps.
    """
    return min(int(q.lam * q.eps) // 2, maxlen // 2)


def morse_defect(space, path: Sequence, q: QGParams, maxlen: int, budget: int = DEFAULT_BUDGET) -> DefectReport:
    """Worst excursion from ``path`` of a ``q``-quasi-geodesic with endpoints on ``path``.

    Branch and bound over all endpoint pairs: a prefix ending at distance
    ``h`` from the path with ``r`` steps left can peak at most ``(h + r) // 2``
    away before it must return, so prefixes that cannot beat the current best
    are cut.
    """
    path = tuple(path)
    if not path or not is_discrete_path(space, path):
        raise ValueError("input is not a discrete path")
    chk = is_quasi_geodesic(space, path, q)
    if not chk.ok:
        raise ValueError(f"input path is not a {q}-quasi-geodesic (violation at {chk.violation})")

    dgam = _DistanceToPath(space, path)
    lower, upper = _bounds(q, maxlen)
    ceiling = tree_defect_ceiling(q, maxlen) if getattr(space, "is_tree", False) else maxlen // 2
    if hasattr(space, "distance_to_set"):
        # no excursion can exceed the farthest vertex of a finite graph
        ceiling = min(ceiling, int(space.distance_to_set(path).max()))
    best, witness = 0, (path[0],)
    expanded = 0
    exhaustive = True

    pairs = sorted(
        ((i, j) for i in range(len(path)) for j in range(i, len(path))),
        key=lambda ij: (-space.distance(path[ij[0]], path[ij[1]]), ij),
    )
    seen_pairs = set()
    try:
        for i, j in pairs:
            u, v = path[i], path[j]
            if (u, v) in seen_pairs or best >= ceiling:
                continue
            seen_pairs.add((u, v))
            lmax = min(maxlen, q.max_length(space.distance(u, v)))
            walk = [u]
            exc = [0]
            cap = [lmax]

            def dfs():
                nonlocal best, witness, expanded
                expanded += 1
                if expanded > budget:
                    raise BudgetExhausted
                last = walk[-1]
                steps = len(walk) - 1
                if last == v and exc[-1] > best:
                    best, witness = exc[-1], tuple(walk)
                if steps >= cap[-1] or best >= ceiling:
                    return
                cands = [last, *space.neighbors(last)]
                cands.sort(key=lambda w: (-dgam(w), space.sort_key(w)))
                for w in cands:
                    dw = space.distance(w, v)
                    # the pair (w, v) bounds the total length as well
                    wcap = min(cap[-1], steps + 1 + q.max_length(dw))
                    rest = wcap - steps - 1
                    if dw > rest:
                        continue
                    hw = dgam(w)
                    if max(exc[-1], hw, (hw + rest) // 2) <= best:
                        continue
                    if not _extends(space, walk, w, lower, upper):
                        continue
                    walk.append(w)
                    if _completable(space, walk, v, dw, lower):
                        exc.append(max(exc[-1], hw))
                        cap.append(wcap)
                        dfs()
                        cap.pop()
                        exc.pop()
                    walk.pop()

            dfs()
    except BudgetExhausted:
        exhaustive = False
    return DefectReport(best, witness, min(expanded, budget), exhaustive)


@dataclass
class MorseGaugeTable:
    grid: tuple
    defect: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    exhaustive: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def rows(self) -> list:
        return [
            (q.lam, q.eps, self.defect[q], self.exhaustive[q], self.witnesses[q])
            for q in self.grid
        ]

    def column(self, eps) -> list:
        eps = Fraction(eps)
        return [self.defect[q] for q in self.grid if q.eps == eps]

    @property
    def all_exhaustive(self) -> bool:
        return all(self.exhaustive.values())


def morse_gauge_estimate(space, path: Sequence, grid: Sequence[QGParams] = DEFAULT_GRID, maxlen: int = 16, budget: int = DEFAULT_BUDGET) -> MorseGaugeTable:
    """Defect table over ``grid``, made monotone in both parameters.

    A witness for ``(l, e)`` is also a quasi-geodesic for every larger pair,
    so each entry is raised to the best defect among dominated grid points.
    """
    grid = tuple(grid)
    table = MorseGaugeTable(grid)
    for q in grid:
        table.raw[q] = morse_defect(space, path, q, maxlen, budget)
    for q in grid:
        dominated = [r for r in grid if r.lam <= q.lam and r.eps <= q.eps]
        src = max(dominated, key=lambda r: (table.raw[r].defect, r == q))
        table.defect[q] = table.raw[src].defect
        table.witnesses[q] = table.raw[src].witness
        table.exhaustive[q] = table.raw[q].exhaustive
    return table


def fellow_travel_length(ray1: Sequence, ray2: Sequence, eta, space=None) -> int:
    """Largest ``n`` with ``d(ray1[t], ray2[t]) <= eta`` for all ``t <= n``."""
    if not ray1 or not ray2 or ray1[0] != ray2[0]:
        raise ValueError("rays must share their initial vertex")
    dist = space.distance if space is not None else _word_distance
    n = 0
    for t in range(1, min(len(ray1), len(ray2))):
        if dist(ray1[t], ray2[t]) > eta:
            break
        n = t
    return n


def _word_distance(u, v) -> int:
    from .groups import word_distance

    return word_distance(u, v)


def closest_point_concatenation(space, alpha: Sequence, x, forward: bool = True) -> tuple:
    """Geodesic from ``x`` to its closest point ``x'`` on ``alpha``, then ``alpha`` from ``x'`` on.

    Used to exercise the ``(2 lam + 1, eps)`` concatenation estimate.
    """
    from .metric import geodesics

    dists = [space.distance(x, y) for y in alpha]
    k = min(range(len(alpha)), key=lambda i: (dists[i], i))
    head = geodesics(space, x, alpha[k], "one").paths[0]
    tail = alpha[k:] if forward else alpha[: k + 1][::-1]
    return tuple(head) + tuple(tail[1:])
