"""Acceptance suite: twelve criteria, exact oracles, wall-clock limits.

Each criterion prints one ``PASS``/``FAIL`` line.  Run with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from morse_scope.centers import (
    IdealTriangle,
    center_set,
    cross_ratio_centers,
    flip_path,
    internal_triple,
    paulin_cross_ratio,
    required_depth,
    shares_two,
    small_cross_ratio_check,
)
from morse_scope.groups import FreeGroupModel, ProductModel, random_distinct_points, random_word, word_geodesic
from morse_scope.hhs import builtin_structure, fit_distance_formula, hhs_cross_ratio, morse_characterization_check, random_pairs
from morse_scope.metric import QGParams, cycle_graph, gromov_product, random_tree, slim_delta
from morse_scope.morse import morse_defect
from morse_scope.synthesis import (
    boundary_map_from_endomorphism,
    image_cross_ratio_bound,
    induced_boundary_agreement,
    max_displacement,
    qi_distortion,
    synthesize_map,
    triangle_for_point,
)

from oracles import ball_scan_centers, nx_distances, slim_oracle, tree_dist, tripod_center

BIG = FreeGroupModel(2, 64)
PHI = boundary_map_from_endomorphism("a=a,b=ab", "a=a,b=Ab")


def quads(count, seed):
    rng = random.Random(seed)
    return [random_distinct_points(rng, 4) for _ in range(count)]


def c1_slimness():
    rng = random.Random(1)
    deltas = []
    for _ in range(10):
        g = random_tree(rng.randint(20, 60), rng)
        deltas.append(slim_delta(g, "all").delta)
    c6 = slim_delta(cycle_graph(6), [(0, 2, 4)]).delta
    ok = deltas == [0] * 10 and c6 == 1 == slim_oracle(cycle_graph(6), 0, 2, 4)
    return ok, f"tree deltas {sorted(set(deltas))}, C6 triangle delta {c6}"


@lru_cache(maxsize=None)
def _ball6_table():
    m = FreeGroupModel(2, 6)
    return m, nx_distances(m.graph)


def c2_gromov():
    m, D = _ball6_table()
    rng = random.Random(2)
    words = m.words
    bad = 0
    for _ in range(1000):
        i, j, k = (rng.randrange(len(words)) for _ in range(3))
        x, y, p = words[i], words[j], words[k]
        if 2 * gromov_product(m, x, y, p) != D[i, k] + D[j, k] - D[i, j]:
            bad += 1
    return bad == 0, f"{bad} mismatches in 1000 triples"


def c3_internal():
    rng = random.Random(3)
    bad = 0
    for _ in range(200):
        a, b, c = random_distinct_points(rng, 3)
        x = tripod_center(a, b, c)
        if internal_triple(BIG, IdealTriangle.build(BIG, a, b, c).sides, 0) != (x, x, x):
            bad += 1
    return bad == 0, f"{bad} of 200 triangles without the tripod 0-internal triple"


def c4_diameter():
    rng = random.Random(4)
    bad = mism = 0
    for _ in range(500):
        a, b, c = random_distinct_points(rng, 3)
        n = required_depth(a, b, c)
        for K in (0, 1, 2):
            cs = center_set(BIG, a, b, c, K)
            scan = ball_scan_centers(a, b, c, K, n)
            mism += cs.points != scan
            diam = max((tree_dist(x, y) for x in scan for y in scan), default=0)
            bad += diam > 2 * K or cs.diameter != diam
    return bad == 0 and mism == 0, f"{bad} diameter violations, {mism} center-set mismatches over 1500 cases"


def c5_agreement():
    exact = gap = 0
    worst = {1: 0, 2: 0}
    for q in quads(500, 5):
        p = abs(paulin_cross_ratio(BIG, *q))
        exact += p != cross_ratio_centers(BIG, *q, 0)
        for K in (1, 2):
            g = abs(p - cross_ratio_centers(BIG, *q, K))
            worst[K] = max(worst[K], g)
            gap += g > 4 * K + 2
    return exact == 0 and gap == 0, f"{exact} K=0 mismatches, {gap} gap violations (largest gaps {worst})"


def c6_small():
    bad = sum(min(small_cross_ratio_check(BIG, *q, 0, 1).values) != 0 for q in quads(500, 6))
    return bad == 0, f"{bad} of 500 quadruples without a vanishing pairing"


def c7_flips():
    rng = random.Random(7)
    bad, cases = 0, {}
    for _ in range(200):
        pts = random_distinct_points(rng, 6)
        try:
            seq = flip_path(BIG, pts[:3], pts[3:], 0, 1)
        except Exception:
            bad += 1
            continue
        cases[seq.case] = cases.get(seq.case, 0) + 1
        ok = len(seq.triples) <= 5 and set(seq.triples[0]) == set(pts[:3]) and set(seq.triples[-1]) == set(pts[3:])
        ok &= all(shares_two(s, t) for s, t in zip(seq.triples, seq.triples[1:]))
        ok &= all(v < 1 for v in seq.flip_values)
        ok &= all(s.value <= seq.bridge_bound for s in seq.steps if s.kind == "bridge")
        bad += not ok
    return bad == 0, f"{bad} failures; cases {dict(sorted(cases.items()))}"


def c8_quasi_mobius():
    fit = qi_distortion(PHI.word, FreeGroupModel(2, 6).words)
    bad = sum(not image_cross_ratio_bound(PHI, q, 0, fit, BIG)["ok"] for q in quads(200, 8))
    return bad == 0, f"fit ({fit.lam}, {fit.eps}); {bad} of 200 bound violations"


def _oracle_f0(x):
    if x == "":
        return ""
    return tripod_center(*(PHI(p) for p in triangle_for_point(FreeGroupModel(2, 12), x)))


def c9_synthesis():
    f = synthesize_map(PHI, 0, source_radius=8)
    lams, disp = [], {}
    for R in (4, 5, 6):
        dom = FreeGroupModel(2, R).words
        lams.append(qi_distortion(f, dom).lam)
        disp[R] = max_displacement(f, PHI.word, dom)[0]
    oracle = max(tree_dist(_oracle_f0(x), PHI.word(x)) for x in FreeGroupModel(2, 6).words)
    i_ok = all(a >= b for a, b in zip(lams, lams[1:]))
    ii_ok = disp[5] == disp[6] == oracle
    g = synthesize_map(PHI.inverse(), 0, source_radius=12)
    comp = max_displacement(lambda x: g(f(x)), lambda x: x, FreeGroupModel(2, 3).words)[0]
    iii_ok = comp <= disp[6]
    counts = {}
    for q in ("(a)", "(ab)"):
        rep = induced_boundary_agreement(f, q, 6, depths=[4, 6])
        counts[q] = [c for _, c in rep.claim1]
        # depth 8 needs a larger source ball
        big = synthesize_map(PHI, 0, source_radius=10)
        counts[q] += [c for _, c in induced_boundary_agreement(big, q, 8, depths=[8]).claim1]
    iv_ok = all(c >= 2 for cs in counts.values() for c in cs)
    detail = f"lam {lams}, displacement {disp} (oracle {oracle}), composition {comp}, claim-1 {counts}"
    return i_ok and ii_ok and iii_ok and iv_ok, detail


def c10_distance_formula():
    prod = builtin_structure("product-of-trees")
    tree = builtin_structure("tree-trivial")
    fp = fit_distance_formula(prod, 1, random_pairs(prod, 1000, 10))
    ft = fit_distance_formula(tree, 1, random_pairs(tree, 1000, 11))
    ok = (fp.lam, fp.eps) == (1, 0) and ft.lam == 1 and ft.eps <= 1
    return ok, f"product ({fp.lam}, {fp.eps}), tree ({ft.lam}, {ft.eps})"


def c11_characterization():
    tree = builtin_structure("tree-trivial")
    tree_ok = all(
        morse_characterization_check(tree, word_geodesic(u, v), maxlen=12).verdicts == (True, True, True)
        for u, v in (("A", "a"), ("ab", "BA"), ("", "bab"))
    )
    defects, verdicts = [], []
    for R in (3, 4):
        lines = (FreeGroupModel(1, R), FreeGroupModel(1, R))
        hhs = builtin_structure("product-of-trees", lines)
        path = [(w, "") for w in word_geodesic("A" * R, "a" * R)]
        verdicts.append(morse_characterization_check(hhs, path, maxlen=14).verdicts)
        rep = morse_defect(ProductModel(*lines), path, QGParams(3, 0), 14)
        defects.append((rep.defect, rep.exhaustive))
    prod_ok = all(v == (False, False, False) for v in verdicts)
    grow_ok = all(e for _, e in defects) and defects[0][0] < defects[1][0]
    return tree_ok and prod_ok and grow_ok, f"tree all-Morse {tree_ok}, product verdicts {verdicts}, (3,0) defects {defects}"


def c12_chain():
    tree = builtin_structure("tree-trivial")
    bad = sum(set(hhs_cross_ratio(tree, *q, 0).gaps.values()) != {0} for q in quads(200, 12))
    return bad == 0, f"{bad} of 200 quadruples with a nonzero gap"


CRITERIA = [
    (1, "slimness", 5, c1_slimness, None),
    (2, "gromov product", 1, c2_gromov, _ball6_table),
    (3, "internal triples", 10, c3_internal, None),
    (4, "center diameter", 60, c4_diameter, None),
    (5, "cross-ratio agreement", 120, c5_agreement, None),
    (6, "small cross-ratio", 60, c6_small, None),
    (7, "flip chaining", 60, c7_flips, None),
    (8, "qi to quasi-mobius", 120, c8_quasi_mobius, None),
    (9, "qi synthesis", 300, c9_synthesis, None),
    (10, "distance formula", 10, c10_distance_formula, None),
    (11, "morse characterization", 300, c11_characterization, None),
    (12, "cross-ratio chain", 60, c12_chain, None),
]


def run_criterion(fn, limit, setup=None):
    # oracle tables are built outside the timed region
    if setup is not None:
        setup()
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    return ok and elapsed < limit, ok, elapsed, detail


def report_line(num, name, limit, passed, elapsed, detail):
    return f"[{'PASS' if passed else 'FAIL'}] criterion {num:2d} {name}: {elapsed:.2f}s (limit {limit}s) {detail}"


@pytest.mark.parametrize("num,name,limit,fn,setup", CRITERIA, ids=[f"c{c[0]:02d}-{c[1].replace(' ', '-')}" for c in CRITERIA])
def test_criterion(num, name, limit, fn, setup, capsys):
    passed, ok, elapsed, detail = run_criterion(fn, limit, setup)
    with capsys.disabled():
        print("\n" + report_line(num, name, limit, passed, elapsed, detail))
    assert ok, detail
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"


if __name__ == "__main__":
    failures = 0
    for num, name, limit, fn, setup in CRITERIA:
        passed, _, elapsed, detail = run_criterion(fn, limit, setup)
        failures += not passed
        print(report_line(num, name, limit, passed, elapsed, detail), flush=True)
    sys.exit(1 if failures else 0)
