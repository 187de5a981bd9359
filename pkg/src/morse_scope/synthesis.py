"""Quasi-isometries synthesized from boundary maps by sending centers to centers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .centers import center_set, required_depth
from .groups import (
    BoundaryPoint,
    FreeGroupModel,
    OutOfBallError,
    as_point,
    common_prefix_length,
    inverse,
    pairwise_word_distances,
    reduce,
    symbols,
    translate,
    word_distance,
    word_geodesic,
)
from .morse import fellow_travel_length

DEFAULT_TARGET_RADIUS = 256
INVERSE_SEARCH_LENGTH = 8


class NotAnAutomorphism(ValueError):
    pass


def parse_substitution(text: str) -> dict:
    """``"a=a,b=ab"`` to ``{"a": "a", "b": "ab"}``."""
    out = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        key, sep, val = item.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or len(key) != 1 or not key.islower():
            raise ValueError(f"bad substitution entry {item!r} (expected x=word)")
        if key in out:
            raise ValueError(f"generator {key!r} assigned twice")
        out[key] = val
    return out


def apply_substitution(phi: Mapping[str, str], w: str) -> str:
    return reduce("".join(phi[c] if c.islower() else inverse(phi[c.lower()]) for c in w))


def _find_preimage(phi: Mapping[str, str], rank: int, target: str, max_len: int) -> str | None:
    frontier = [""]
    for _ in range(max_len + 1):
        for w in frontier:
            if apply_substitution(phi, w) == target:
                return w
        frontier = [w + s for w in frontier for s in symbols(rank) if not w or w[-1] != s.swapcase()]
    return None


@dataclass(frozen=True)
class BoundaryMap:
    """Boundary action of a free-group automorphism, together with its inverse."""

    rank: int
    phi: tuple  # ((generator, image), ...)
    phi_inv: tuple

    @property
    def forward(self) -> dict:
        return dict(self.phi)

    def word(self, w: str) -> str:
        return apply_substitution(self.forward, w)

    def __call__(self, x):
        if isinstance(x, BoundaryPoint) or (isinstance(x, str) and "(" in x):
            x = as_point(x)
            return BoundaryPoint.make(self.word(x.prefix), self.word(x.period))
        return self.word(x)

    def inverse(self) -> "BoundaryMap":
        return BoundaryMap(self.rank, self.phi_inv, self.phi)

    def __str__(self) -> str:
        return ",".join(f"{k}={v}" for k, v in self.phi)


def boundary_map_from_endomorphism(phi: Mapping[str, str] | str, phi_inv: Mapping[str, str] | str | None = None, rank: int | None = None) -> BoundaryMap:
    """Validate ``phi`` as an automorphism and wrap its boundary action.

    Without ``phi_inv`` an inverse is searched among words of length up to
    ``INVERSE_SEARCH_LENGTH``; finitely generated free groups are Hopfian,
    so surjectivity on generators suffices.
    """
    phi = parse_substitution(phi) if isinstance(phi, str) else dict(phi)
    rank = rank or len(phi)
    gens = symbols(rank)[::2]
    if set(phi) - set(gens):
        raise ValueError(f"substitution names generators outside rank {rank}: {sorted(set(phi) - set(gens))}")
    phi = {g: reduce(phi.get(g, g), rank) for g in gens}
    if phi_inv is None:
        found = {}
        for g in phi:
            w = _find_preimage(phi, rank, g, INVERSE_SEARCH_LENGTH)
            if w is None:
                raise NotAnAutomorphism(f"{g} has no preimage of length <= {INVERSE_SEARCH_LENGTH}; not surjective")
            found[g] = w
        psi = found
    else:
        psi = parse_substitution(phi_inv) if isinstance(phi_inv, str) else dict(phi_inv)
        psi = {g: reduce(psi.get(g, g), rank) for g in phi}
    for g in phi:
        if apply_substitution(psi, apply_substitution(phi, g)) != g or apply_substitution(phi, apply_substitution(psi, g)) != g:
            raise NotAnAutomorphism(f"supplied inverse fails on generator {g}")
    return BoundaryMap(rank, tuple(sorted(phi.items())), tuple(sorted(psi.items())))


def identity_map(rank: int = 2) -> BoundaryMap:
    return boundary_map_from_endomorphism({g: g for g in symbols(rank)[::2]}, {g: g for g in symbols(rank)[::2]}, rank)


def triangle_for_point(model: FreeGroupModel, x: str, K: int = 0) -> tuple:
    """The standard tripod ``((a), (b), (B))`` translated to ``x``; ``x`` is its 0-center."""
    if model.rank < 2:
        raise ValueError("the standard tripod needs rank >= 2")
    if x not in model:
        raise OutOfBallError(f"{x!r} is not a vertex of the ball")
    if len(x) > model.radius - 2:
        raise OutOfBallError(f"{x!r} lies within 2 of the ball boundary")
    return tuple(translate(None, x, BoundaryPoint(p, q)) for p, q in (("", "a"), ("", "b"), ("", "B")))


@dataclass
class SynthesizedMap:
    """Lazy ``f_K``: ``x`` goes to the least ``K``-center of the image of its tripod."""

    h: BoundaryMap
    K: int
    source: FreeGroupModel
    target: FreeGroupModel
    depth: int | None = None
    basepoint: tuple = ("", "")
    assignments: dict = field(default_factory=dict)

    def triangle(self, x: str) -> tuple:
        return triangle_for_point(self.source, x, self.K)

    def image_triangle(self, x: str) -> tuple:
        return tuple(self.h(p) for p in self.triangle(x))

    def __call__(self, x: str) -> str:
        if x == self.basepoint[0]:
            return self.basepoint[1]
        y = self.assignments.get(x)
        if y is None:
            tri = self.image_triangle(x)
            n = self.depth
            if n is not None and n < required_depth(*tri):
                raise ValueError(f"depth {n} is too small for the image triangle of {x!r}")
            cs = center_set(self.target, *tri, self.K, n)
            if not cs.points:
                raise RuntimeError(f"empty {self.K}-center set for the image triangle of {x!r}")
            y = min(cs.points, key=self.target.sort_key)
            self.assignments[x] = y
        return y

    def extend(self, domain: Iterable[str]) -> "SynthesizedMap":
        for x in domain:
            self(x)
        return self


def synthesize_map(h: BoundaryMap, K: int, domain: Iterable[str] | None = None, depth: int | None = None, source_radius: int = 8, target_radius: int = DEFAULT_TARGET_RADIUS) -> SynthesizedMap:
    source = FreeGroupModel(h.rank, source_radius)
    f = SynthesizedMap(h, K, source, FreeGroupModel(h.rank, target_radius), depth)
    if domain is not None:
        f.extend(domain)
    return f


# --------------------------------------------------------------------------
# distortion fits
# --------------------------------------------------------------------------


LAM_STEP = Fraction(1, 4)


@dataclass(frozen=True)
class DistortionFit:
    lam: Fraction
    eps: Fraction
    worst: tuple | None
    frontier: tuple  # ((lam, eps), ...) along the grid

    def holds(self, x, y) -> bool:
        return Fraction(x) / self.lam - self.eps <= y <= self.lam * x + self.eps


def _eps_for(lam: Fraction, x: np.ndarray, y: np.ndarray) -> tuple[Fraction, int]:
    p, q = lam.numerator, lam.denominator
    # y <= lam x + eps  and  x / lam - eps <= y, as exact fractions
    up = q * y - p * x
    lo = q * x - p * y
    i_up, i_lo = int(np.argmax(up)), int(np.argmax(lo))
    e_up, e_lo = Fraction(int(up[i_up]), q), Fraction(int(lo[i_lo]), p)
    if e_up >= e_lo:
        return max(Fraction(0), e_up), i_up
    return max(Fraction(0), e_lo), i_lo


def fit_coarse_equality(x: Sequence[int], y: Sequence[int], labels: Sequence | None = None, lam_max=4, step=LAM_STEP) -> DistortionFit:
    """Least ``lam`` on the grid ``1, 1 + step, ...`` and then least ``eps`` with ``y`` coarsely equal to ``x``.

    On a finite sample every ``lam`` admits some ``eps``, so the lexicographic
    rule always returns ``lam = 1``; the frontier lists the least ``eps`` at
    each grid value for a fuller picture.
    """
    x = np.asarray(x, dtype=np.int64).ravel()
    y = np.asarray(y, dtype=np.int64).ravel()
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    if x.size == 0:
        return DistortionFit(Fraction(1), Fraction(0), None, ())
    grid = []
    lam = Fraction(1)
    while lam <= lam_max:
        grid.append(lam)
        lam += step
    frontier = tuple((l, _eps_for(l, x, y)[0]) for l in grid)
    eps, i = _eps_for(grid[0], x, y)
    worst = None
    if eps > 0:
        worst = (labels[i] if labels is not None else i, int(x[i]), int(y[i]))
    return DistortionFit(grid[0], eps, worst, frontier)


def _pairs_matrix(domain: Sequence[str], images: Sequence[str]):
    D = pairwise_word_distances(domain)
    E = pairwise_word_distances(images)
    iu = np.triu_indices(len(domain), 1)
    return D[iu], E[iu], iu


def qi_distortion(f, domain: Sequence[str] | None = None, pairs: Sequence[tuple] | None = None) -> DistortionFit:
    """Fit ``d(f x, f x') ~ d(x, x')`` over all pairs of ``domain`` or the given ``pairs``."""
    if pairs is not None:
        xs = [word_distance(u, v) for u, v in pairs]
        ys = [word_distance(f(u), f(v)) for u, v in pairs]
        return fit_coarse_equality(xs, ys, list(pairs))
    domain = list(domain)
    xs, ys, (I, J) = _pairs_matrix(domain, [f(x) for x in domain])
    labels = _LazyPairs(domain, I, J)
    return fit_coarse_equality(xs, ys, labels)


class _LazyPairs:
    def __init__(self, domain, I, J):
        self.domain, self.I, self.J = domain, I, J

    def __getitem__(self, k):
        return (self.domain[self.I[k]], self.domain[self.J[k]])


def max_displacement(f, g, domain: Iterable[str]) -> tuple[int, str | None]:
    """``max_x d(f(x), g(x))`` with a maximizing ``x``."""
    best, arg = -1, None
    for x in domain:
        d = word_distance(f(x), g(x))
        if d > best:
            best, arg = d, x
    return max(best, 0), arg


def equivariance_defect(f: SynthesizedMap, elements: Iterable[str], domain: Iterable[str]) -> int:
    """``max d(f(g x), phi(g) f(x))`` over the given ``g`` and ``x`` that stay in the ball."""
    worst = 0
    domain = list(domain)
    for g in elements:
        pg = f.h.word(g)
        for x in domain:
            gx = reduce(g + x)
            if len(gx) > f.source.radius - 2:
                continue
            worst = max(worst, word_distance(f(gx), reduce(pg + f(x))))
    return worst


# --------------------------------------------------------------------------
# boundary agreement
# --------------------------------------------------------------------------


@dataclass
class AgreementReport:
    q: BoundaryPoint
    hq: BoundaryPoint
    images: list
    image_ray_distance: list
    fellow_travel: int
    claim1: list  # (k, count) per depth
    claim2: list


def _concatenate(points: Sequence[str]) -> list:
    path = [points[0]]
    for a, b in zip(points, points[1:]):
        path.extend(word_geodesic(a, b)[1:])
    return path


def _ray_fellow(ray_point: BoundaryPoint, q: BoundaryPoint, n: int, eta) -> int:
    r1 = [ray_point.truncate(t) for t in range(n + 1)]
    r2 = [q.truncate(t) for t in range(n + 1)]
    return fellow_travel_length(r1, r2, eta)


def claim_counts(f: SynthesizedMap, q: BoundaryPoint, k: int, eta=0) -> tuple[int, int]:
    """Tripod vertices at ``gamma(k)`` fellow-travelling ``q`` past ``k / 2``, and images past ``|f(gamma(k))| / 2``."""
    x = q.truncate(k)
    tri = f.triangle(x)
    reach = k + 2
    c1 = sum(_ray_fellow(p, q, reach, eta) > k / 2 for p in tri)
    hq = f.h(q)
    fx = f(x)
    reach2 = len(fx) + 2
    c2 = sum(_ray_fellow(f.h(p), hq, reach2, eta) > len(fx) / 2 for p in tri)
    return c1, c2


def induced_boundary_agreement(f: SynthesizedMap, q, n: int, eta=0, depths: Sequence[int] | None = None) -> AgreementReport:
    """Compare ``f`` along the ray to ``q`` with the ray to ``h(q)``."""
    q = as_point(q)
    if n > f.source.radius - 2:
        raise OutOfBallError(f"depth {n} exceeds the usable source radius {f.source.radius - 2}")
    hq = f.h(q)
    images = [f(q.truncate(k)) for k in range(n + 1)]
    path = _concatenate(images)
    ray = [hq.truncate(t) for t in range(len(path))]
    dist_to_ray = [len(y) - common_prefix_length(y, hq.truncate(len(y))) for y in images]
    fellow = fellow_travel_length(ray, path, eta)
    depths = list(depths) if depths is not None else list(range(1, n + 1))
    c1, c2 = [], []
    for k in depths:
        a, b = claim_counts(f, q, k, eta)
        c1.append((k, a))
        c2.append((k, b))
    return AgreementReport(q, hq, images, dist_to_ray, fellow, c1, c2)


def image_cross_ratio_bound(h: BoundaryMap, quad: Sequence, K: int, fit: DistortionFit, model: FreeGroupModel | None = None) -> dict:
    """Image cross-ratio against ``lam * source + eps + 2 M`` for one quadruple."""
    from .centers import cross_ratio_detail

    model = model or FreeGroupModel(h.rank, DEFAULT_TARGET_RADIUS)
    src, m1, m2 = cross_ratio_detail(model, *quad, K)
    img_quad = [h(p) for p in quad]
    img, m3, m4 = cross_ratio_detail(model, *img_quad, K)
    M = max(m.diameter for m in (m1, m2, m3, m4))
    bound = fit.lam * src + fit.eps + 2 * M
    return {"source": src, "image": img, "M": M, "bound": bound, "ok": img <= bound}


def ball_words(rank: int, radius: int) -> list:
    return FreeGroupModel(rank, radius).words


def all_pairs(domain: Sequence) -> Iterable[tuple]:
    return itertools.combinations(domain, 2)
