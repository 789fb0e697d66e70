import math

import pytest

from joinspace.boundary import (
    ExtendedSpace,
    TruncationError,
    boundary_point,
    parse_point,
    stabilize,
    structural_infinity,
    trivial_triple,
)
from joinspace.extsmooth import INF
from joinspace.hatmetric import HatMetric
from joinspace.hypgraph import path_graph, tripod
from joinspace.join import RAW


@pytest.fixture(scope="module")
def E(f2_10):
    return ExtendedSpace(HatMetric(f2_10), "e", f2_10)


@pytest.fixture(scope="module")
def rays(f2_10):
    return {k: boundary_point(f2_10, w) for k, w in {"A": "A" * 10, "B": "B" * 10, "ab": "ab" * 5, "a": "a" * 10}.items()}


class TestStabilize:
    def test_constant_sequence(self):
        res = stabilize(lambda i: 1.5, 10, 1e-9)
        assert res.value == 1.5 and res.trace == [1.5] * len(res.trace)

    def test_truncation_reports_iterates(self):
        with pytest.raises(TruncationError) as exc:
            stabilize(lambda i: float(i), 8, 1e-9)
        assert list(exc.value.iterates) == [7.0, 8.0]

    def test_converging_sequence(self):
        res = stabilize(lambda i: 2.0 - 2.0**-i, 60, 1e-9)
        assert res.value == pytest.approx(2.0, abs=1e-8)


class TestBoundaryPoints:
    def test_equality(self, f2_10, rays):
        assert rays["A"] == boundary_point(f2_10, "A" * 9)
        assert rays["A"] != rays["B"]

    def test_parse(self, f2_10):
        assert parse_point(f2_10, "ray " + "b" * 10) == boundary_point(f2_10, "b" * 10)
        assert parse_point(f2_10, "ab") == "ab"


class TestExtendedProducts:
    def test_gromov_at_identity(self, E, rays):
        res = E.dd_trace(rays["A"], "e", "e", rays["B"])
        assert res.value == 0 and set(res.trace) == {0.0}

    def test_structural_plus_infinity(self, E, rays):
        assert E.dd(rays["A"], rays["ab"], "b", rays["A"]) == INF

    def test_structural_minus_infinity(self, E, rays):
        assert E.dd(rays["A"], rays["B"], rays["A"], rays["B"]) == -INF

    def test_gp_of_equal_points(self, E, rays):
        assert E.gp(rays["A"], rays["A"], "e") == INF

    def test_all_trivial_side_pair_patterns(self, E, rays):
        A, B = rays["A"], rays["B"]
        plus = [(A, "a", "b", A), ("a", A, A, "b"), (A, B, B, A), (A, "b", B, A)]
        minus = [(A, "a", A, "b"), ("a", A, "b", A), (A, B, A, B), (A, "b", A, B)]
        for q in plus:
            assert structural_infinity(*q) == INF and E.dd(*q) == INF
        for q in minus:
            assert structural_infinity(*q) == -INF and E.dd(*q) == -INF

    def test_trivial_triple(self, rays):
        A = rays["A"]
        assert trivial_triple((A, A, A, "e"))
        assert not trivial_triple((A, A, "e", "a"))

    def test_lines(self, E, rays):
        AB = E.make_line(rays["A"], rays["B"])
        assert (AB.alpha, AB.beta) == (-INF, INF)
        eA = E.make_line("e", rays["A"])
        assert (eA.alpha, eA.beta) == (0.0, INF)
        assert E.make_line(rays["A"], rays["A"]).degenerate

    def test_cross_ratio_path(self):
        g = path_graph(11)
        Ep = ExtendedSpace(HatMetric(g), 0, g)
        assert Ep.cross_ratio(2, 8, 0, 10) == 0.0024787521766663585
        assert Ep.cross_ratio(2, 8, 0, 10) == pytest.approx(math.exp(-6), rel=1e-15)


class TestHorofunctions:
    def test_path_value(self):
        g = path_graph(11)
        Ep = ExtendedSpace(HatMetric(g), 0, g)
        u = boundary_point(g, 10)
        assert Ep.horofunction(u, Ep.ground_point(2), Ep.ground_point(5)) == 3.0

    def test_tripod_horosphere(self):
        g = tripod(8)
        Et = ExtendedSpace(HatMetric(g), 0, g)
        u = boundary_point(g, 8)
        for a, b in [(12, 20), (3, 16), (0, 24)]:
            assert Et.horosphere_check(u, a, b) <= 1e-9

    def test_f2_horosphere(self, E, rays):
        for a, b in [("ab", "Ba"), ("b", "BB"), ("a", "e")]:
            assert E.horosphere_check(rays["A"], a, b) <= 1e-9

    def test_line_isometry(self, E, rays):
        p = E.point_at(rays["A"], rays["B"], 0.5, RAW)
        q = E.point_at(rays["A"], rays["B"], 2.0, RAW)
        assert abs(E.horofunction(rays["A"], p, q)) == pytest.approx(E.d_cross(p, q))
        assert E.d_cross(p, q) == 1.5
