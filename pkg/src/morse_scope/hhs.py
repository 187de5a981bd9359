"""Toy hierarchically hyperbolic structures given by projection oracles."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .centers import _distinct, center_set, cross_ratio_detail, paulin_cross_ratio, required_depth
from .groups import FreeGroupModel, ProductModel, as_point
from .metric import QGParams, is_quasi_geodesic
from .morse import DEFAULT_BUDGET, DEFAULT_GRID, morse_defect
from .synthesis import DistortionFit, fit_coarse_equality

KINDS = ("tree-trivial", "product-of-trees")


@dataclass(frozen=True)
class BoundedTarget:
    """A target space recorded only through its diameter; all points are its single label when diameter is 0."""

    diameter: int = 0

    def distance(self, u, v) -> int:
        return 0 if u == v else self.diameter


@dataclass
class HHSStructure:
    kind: str
    base: object
    domains: tuple
    top: str
    below: frozenset  # pairs (U, V) with U strictly nested in V
    targets: dict
    projections: dict
    lipschitz: dict = field(default_factory=dict)

    def __post_init__(self):
        maxima = [U for U in self.domains if not any((U, V) in self.below for V in self.domains)]
        if maxima != [self.top]:
            raise ValueError(f"{self.top!r} must be the unique maximal domain, found {maxima}")

    def nested(self, U: str, V: str) -> bool:
        return U == V or (U, V) in self.below

    def project(self, U: str, x):
        return self.projections[U](x)

    def domain_distance(self, U: str, x, y) -> int:
        return self.targets[U].distance(self.project(U, x), self.project(U, y))

    def bounded(self, U: str) -> bool:
        return isinstance(self.targets[U], BoundedTarget)

    def verify_lipschitz(self, vertices) -> dict:
        """Largest image displacement along base edges, per domain."""
        out = {U: 0 for U in self.domains}
        for x in vertices:
            for y in self.base.neighbors(x):
                for U in self.domains:
                    out[U] = max(out[U], self.domain_distance(U, x, y))
        self.lipschitz = out
        return out


def builtin_structure(kind: str, models: Sequence[FreeGroupModel] | None = None) -> HHSStructure:
    if kind == "tree-trivial":
        (model,) = models or (FreeGroupModel(2, 64),)
        return HHSStructure(kind, model, ("S",), "S", frozenset(), {"S": model}, {"S": lambda x: x})
    if kind == "product-of-trees":
        m1, m2 = models or (FreeGroupModel(2, 6), FreeGroupModel(2, 6))
        base = ProductModel(m1, m2)
        return HHSStructure(
            kind,
            base,
            ("S", "T1", "T2"),
            "S",
            frozenset({("T1", "S"), ("T2", "S")}),
            {"S": BoundedTarget(0), "T1": m1, "T2": m2},
            {"S": lambda x: (), "T1": lambda x: x[0], "T2": lambda x: x[1]},
        )
    raise ValueError(f"unknown structure {kind!r}; choose from {', '.join(KINDS)}")


def _cut(M: int, sigma) -> int:
    return M if M >= sigma else 0


def thresholded_sum(hhs: HHSStructure, x, y, sigma) -> int:
    """Sum over domains of projection distances, each dropped when below ``sigma``."""
    if sigma < 1:
        raise ValueError("sigma must be at least 1")
    return sum(_cut(hhs.domain_distance(U, x, y), sigma) for U in hhs.domains)


def random_vertex(hhs: HHSStructure, rng: random.Random):
    from .groups import random_word

    if hhs.kind == "product-of-trees":
        m1, m2 = hhs.base.first, hhs.base.second
        return (random_word(rng, m1.rank, rng.randint(0, m1.radius)), random_word(rng, m2.rank, rng.randint(0, m2.radius)))
    m = hhs.base
    return random_word(rng, m.rank, rng.randint(0, min(m.radius, 8)))


def random_pairs(hhs: HHSStructure, count: int, seed: int = 0) -> list:
    rng = random.Random(seed)
    return [(random_vertex(hhs, rng), random_vertex(hhs, rng)) for _ in range(count)]


def fit_distance_formula(hhs: HHSStructure, sigma, samples: Sequence[tuple]) -> DistortionFit:
    """Least ``A`` then least ``B`` with ``d(x, y)`` coarsely equal to the thresholded sum."""
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two sample pairs")
    sums = [thresholded_sum(hhs, x, y, sigma) for x, y in samples]
    dists = [hhs.base.distance(x, y) for x, y in samples]
    return fit_coarse_equality(sums, dists, samples)


@dataclass
class Characterization:
    morse: bool | None  # (1) defect table; None if inconclusive
    bounded_projections: bool  # (2)
    top_quasi_geodesic: bool  # (3)
    defects: list
    projection_diameters: dict
    top_check: object
    thresholds: dict

    @property
    def verdicts(self) -> tuple:
        return (self.morse, self.bounded_projections, self.top_quasi_geodesic)

    @property
    def agree(self) -> bool:
        return self.morse is not None and len(set(self.verdicts)) == 1


def morse_characterization_check(
    hhs: HHSStructure,
    path: Sequence,
    grid: Sequence[QGParams] = DEFAULT_GRID,
    B_cut: int = 2,
    L: int = 2,
    maxlen: int = 14,
    budget: int = DEFAULT_BUDGET,
    N_cut: int | None = None,
) -> Characterization:
    """Three finite readings of Morseness for ``path``.

    (1) every grid defect is at most ``N_cut + lam * eps``; a larger lower
    bound settles "not Morse" at once, otherwise every entry must be
    exhaustive.  (2) for every domain below the top one, the projection of
    the path has diameter at most ``B_cut``.  (3) the projection to the top
    domain is an ``(L, L)``-quasi-geodesic.
    """
    path = tuple(path)
    N_cut = B_cut if N_cut is None else N_cut
    rows, morse = [], True
    for q in grid:
        rep = morse_defect(hhs.base, path, q, maxlen, budget)
        rows.append((q, rep.defect, rep.exhaustive))
        if rep.defect > N_cut + q.lam * q.eps:
            morse = False
            break
        if not rep.exhaustive:
            morse = None
    diams = {}
    for U in hhs.domains:
        if U == hhs.top:
            continue
        pts = [hhs.project(U, x) for x in path]
        tgt = hhs.targets[U]
        diams[U] = max((tgt.distance(p, r) for p, r in itertools.combinations(pts, 2)), default=0)
    bounded = all(d <= B_cut for d in diams.values())
    top_path = [hhs.project(hhs.top, x) for x in path]
    chk = is_quasi_geodesic(hhs.targets[hhs.top], top_path, QGParams(L, L))
    return Characterization(morse, bounded, chk.ok, rows, diams, chk, {"N_cut": N_cut, "B_cut": B_cut, "L": L})


def boundary_projection(hhs: HHSStructure, q):
    """The boundary point of the top target represented by the projected ray."""
    if hhs.bounded(hhs.top):
        raise ValueError("the top domain has a bounded target; no boundary projection")
    if hhs.kind != "tree-trivial":
        raise NotImplementedError(f"boundary projection for {hhs.kind!r}")
    return as_point(q)


@dataclass(frozen=True)
class HHSCrossRatio:
    centers: int
    top: Fraction
    center_distance: int
    gaps: dict


def hhs_cross_ratio(hhs: HHSStructure, a, b, c, d, K: int, n: int | None = None) -> HHSCrossRatio:
    """Center cross-ratio, its top-domain counterpart and the distance between chosen centers."""
    pts = _distinct(a, b, c, d)
    proj = [boundary_projection(hhs, p) for p in pts]
    n = required_depth(*pts) if n is None else n
    model = hhs.base
    value, m1, m2 = cross_ratio_detail(model, *pts, K, n)
    top = abs(paulin_cross_ratio(hhs.targets[hhs.top], *proj))
    x1 = min(m1.points, key=model.sort_key)
    x2 = min(m2.points, key=model.sort_key)
    dx = model.distance(x1, x2)
    gaps = {
        "centers-top": abs(value - top),
        "centers-dx": abs(value - dx),
        "dx-top": abs(dx - top),
    }
    return HHSCrossRatio(value, top, dx, gaps)
