import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morse_scope.centers import (
    FlipError,
    IdealTriangle,
    center_set,
    cross_ratio_centers,
    flip_path,
    internal_triple,
    paulin_cross_ratio,
    paulin_summand,
    required_depth,
    shares_two,
    small_cross_ratio_check,
)
from morse_scope.groups import BoundaryPoint, FreeGroupModel, OutOfBallError, random_distinct_points, reduce, translate
from morse_scope.metric import cycle_graph, geodesics
from morse_scope.morse import morse_gauge_estimate

from oracles import ball_scan_centers, tree_dist, tripod_center

P = BoundaryPoint.parse
M = FreeGroupModel(2, 64)
points = st.integers(0, 10**6).map(lambda s: random_distinct_points(random.Random(s), 4))


class TestInternalTriple:
    def test_tripod(self):
        tri = IdealTriangle.build(M, "(a)", "(b)", "(B)")
        assert internal_triple(M, tri.sides, 0) == ("", "", "")
        assert internal_triple(M, tri.sides, 5) == ("", "", "")

    @pytest.mark.parametrize("K", [0, 1, 2, 3])
    def test_cycle_matches_scan(self, K):
        g = cycle_graph(6)
        sides = [geodesics(g, u, v, "one").paths[0] for u, v in ((0, 2), (2, 4), (4, 0))]
        scan = [t for t in itertools.product(*(sorted(s) for s in sides))
                if all(g.distance(x, y) <= K for x, y in itertools.combinations(t, 2))]
        assert internal_triple(g, sides, K) == (min(scan) if scan else None)
        # each side is 2 away from the opposite corner, so K = 2 is the threshold
        assert bool(scan) == (K >= 2)

    def test_malformed(self):
        with pytest.raises(ValueError):
            internal_triple(M, [("",), ("",)], 0)

    @given(points)
    def test_zero_internal_triple_is_tripod_center(self, pts):
        a, b, c = pts[:3]
        tri = IdealTriangle.build(M, a, b, c)
        x = tripod_center(a, b, c)
        assert internal_triple(M, tri.sides, 0) == (x, x, x)


class TestCenterSet:
    def test_tripod(self):
        cs = center_set(M, "(a)", "(b)", "(B)", 0)
        assert cs.points == {""} and cs.diameter == 0

    def test_tripod_k1(self):
        cs = center_set(M, "(a)", "(b)", "(B)", 1)
        assert {"", "a", "b", "B"} <= cs.points and cs.diameter == 2
        assert cs.points == ball_scan_centers(P("(a)"), P("(b)"), P("(B)"), 1, 3)

    def test_modified_zero_delta(self):
        for K in (0, 1):
            plain = center_set(FreeGroupModel(2, 8), "(a)", "(b)", "a(b)", K)
            mod = center_set(FreeGroupModel(2, 8), "(a)", "(b)", "a(b)", K, modified=True, delta_hat=0)
            assert plain.points == mod.points and mod.exhaustive

    def test_preconditions(self):
        with pytest.raises(ValueError, match="not distinct"):
            center_set(M, "(a)", "(a)", "(b)", 0)
        with pytest.raises(ValueError, match="depth"):
            center_set(M, "(a)", "a(b)", "(b)", 0, n=0)
        with pytest.raises(OutOfBallError):
            center_set(FreeGroupModel(2, 2), "aa(b)", "(a)", "(B)", 1)

    @given(points, st.integers(0, 2))
    def test_matches_ball_scan(self, pts, K):
        a, b, c = pts[:3]
        n = required_depth(a, b, c)
        cs = center_set(M, a, b, c, K)
        assert cs.points == ball_scan_centers(a, b, c, K, n)
        assert cs.diameter <= 2 * K

    @given(points, st.integers(0, 2))
    def test_depth_stable(self, pts, K):
        a, b, c = pts[:3]
        n = required_depth(a, b, c)
        assert center_set(M, a, b, c, K, n).points == center_set(M, a, b, c, K, n + 2).points

    @given(points, st.sampled_from(["a", "Ab", "bba", "BaB"]), st.integers(0, 1))
    def test_equivariance(self, pts, g, K):
        a, b, c = pts[:3]
        moved = center_set(M, *(translate(None, g, p) for p in (a, b, c)), K)
        assert moved.points == {reduce(g + x) for x in center_set(M, a, b, c, K).points}

    @given(points)
    def test_k0_is_tripod_center(self, pts):
        assert center_set(M, *pts[:3], 0).points == {tripod_center(*pts[:3])}


class TestCrossRatios:
    def test_examples(self):
        assert cross_ratio_centers(M, "(a)", "(b)", "(A)", "(B)", 0) == 0
        assert cross_ratio_centers(M, "(a)", "(b)", "(A)", "aaa(b)", 0) == 3
        with pytest.raises(ValueError, match="not distinct"):
            cross_ratio_centers(M, "(a)", "(b)", "(A)", "(b)", 0)

    def test_paulin_examples(self):
        assert paulin_cross_ratio(M, "(a)", "(b)", "(A)", "(B)") == 0
        assert paulin_cross_ratio(M, "(a)", "(b)", "(A)", "aaa(b)") == Fraction(-3)

    def test_summand_formula(self):
        a, b, c, d = map(P, ("(a)", "(b)", "(A)", "aaa(b)"))
        for n in range(4, 10):
            assert paulin_summand(a, b, c, d, n) == -6

    @given(points)
    def test_paulin_antisymmetry(self, pts):
        a, b, c, d = pts
        assert paulin_cross_ratio(M, a, b, c, d) == -paulin_cross_ratio(M, a, d, c, b)

    @given(points)
    def test_paulin_equals_centers_at_zero(self, pts):
        assert abs(paulin_cross_ratio(M, *pts)) == cross_ratio_centers(M, *pts, 0)

    @given(points, st.integers(1, 2))
    def test_paulin_gap(self, pts, K):
        assert abs(abs(paulin_cross_ratio(M, *pts)) - cross_ratio_centers(M, *pts, K)) <= 4 * K + 2

    @given(points)
    def test_center_value_is_tripod_distance(self, pts):
        a, b, c, d = pts
        expect = tree_dist(tripod_center(a, b, c), tripod_center(a, d, c))
        assert cross_ratio_centers(M, a, b, c, d, 0) == expect


class TestSmall:
    def test_examples(self):
        chk = small_cross_ratio_check(M, "(a)", "(b)", "(A)", "(B)", 0, 1)
        assert chk.pairing == 1 and chk.values[0] == 0
        chk = small_cross_ratio_check(M, "(a)", "(b)", "(A)", "aaa(b)", 0, 1)
        assert chk.ok and 0 in chk.values
        assert not small_cross_ratio_check(M, "(a)", "(b)", "(A)", "(B)", 0, 0).ok

    @given(points)
    def test_some_pairing_vanishes(self, pts):
        assert min(small_cross_ratio_check(M, *pts, 0, 1).values) == 0


def check_sequence(seq, start, end, C):
    assert len(seq.triples) <= 5
    assert set(seq.triples[0]) == set(start) and set(seq.triples[-1]) == set(end)
    for s, t in zip(seq.triples, seq.triples[1:]):
        assert shares_two(s, t)
    assert all(v < C for v in seq.flip_values)
    for step in seq.steps:
        if step.kind == "bridge":
            assert step.value <= seq.bridge_bound


class TestFlips:
    def test_identical(self):
        seq = flip_path(M, ["(a)", "(b)", "(A)"], ["(a)", "(b)", "(A)"], 0, 1)
        assert len(seq.triples) == 1 and seq.case == "direct"

    def test_single_flip(self):
        seq = flip_path(M, ["(a)", "(b)", "(A)"], ["(a)", "(B)", "(A)"], 0, 1)
        assert len(seq.triples) == 2 and seq.flip_values == [0]

    def test_disjoint(self):
        start, end = ["(a)", "(b)", "(A)"], ["(B)", "a(b)", "b(a)"]
        seq = flip_path(M, start, end, 0, 1)
        check_sequence(seq, [P(x) for x in start], [P(x) for x in end], 1)
        assert seq.case in ("case1", "case2") and all(v == 0 for v in seq.flip_values)

    def test_stuck(self):
        with pytest.raises(FlipError) as err:
            flip_path(M, ["(a)", "(b)", "(A)"], ["(B)", "a(b)", "b(a)"], 0, 0)
        assert err.value.config

    @settings(max_examples=60)
    @given(st.integers(0, 10**6))
    def test_random(self, seed):
        pts = random_distinct_points(random.Random(seed), 6)
        seq = flip_path(M, pts[:3], pts[3:], 0, 1)
        check_sequence(seq, pts[:3], pts[3:], 1)

    @settings(max_examples=30)
    @given(st.integers(0, 10**6))
    def test_overlapping(self, seed):
        pts = random_distinct_points(random.Random(seed), 4)
        start, end = pts[:3], [pts[0], pts[1], pts[3]]
        try:
            seq = flip_path(M, start, end, 0, 1)
        except FlipError:
            # only when no small flip exists among the four points
            assert cross_ratio_centers(M, pts[0], pts[2], pts[1], pts[3], 0) >= 1
            return
        check_sequence(seq, start, end, 1)


def test_close_centers_give_morse_sides():
    a, b, c, u, v, w = map(P, ("(a)", "(b)", "(A)", "(B)", "a(b)", "b(a)"))
    m = center_set(M, a, b, c, 0).points | center_set(M, u, v, w, 0).points
    assert max(tree_dist(x, y) for x in m for y in m) <= 2
    model = FreeGroupModel(2, 12)
    from morse_scope.groups import boundary_geodesic

    for p, q in itertools.combinations((a, b, c, u, v, w), 2):
        side = boundary_geodesic(model, p, q, 2)
        table = morse_gauge_estimate(model, side, maxlen=8)
        assert table.column(0) == [0, 0, 0, 0]
        assert max(table.defect.values()) <= 4
