import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from joinspace.extsmooth import INF, DomainError, omega_inv
from joinspace.hatmetric import HatMetric
from joinspace.hypgraph import path_graph
from joinspace.join import RAW, SMOOTH, Isometry, IsometryError, JoinError, JoinSpace


def dstar_oracle(J, x, y):
    """Adaptive quadrature of d-cross along the shift orbit (independent of the certified scheme)."""
    f = lambda r: J.d_cross(J.r_action(r, x), J.r_action(r, y)) * 0.5 * math.exp(-abs(r))
    pts = sorted({0.0, *(v for p in (x, y) for v in (p.line.alpha - p.pre, p.line.beta - p.pre) if math.isfinite(v) and abs(v) < 60)})
    edges = [-60.0] + pts + [60.0]
    return sum(quad(f, lo, hi, epsabs=1e-11, epsrel=1e-11, limit=400)[0] for lo, hi in zip(edges[:-1], edges[1:]))


class TestLines:
    def test_line_coordinates(self, J_path):
        line = J_path.make_line(2, 8)
        assert (line.alpha, line.beta) == (0.0, 6.0)
        L5 = J_path.with_basepoint(5).make_line(0, 10)
        assert (L5.alpha, L5.beta) == (-5.0, 5.0)

    def test_no_negative_zero(self, J_path):
        line = J_path.make_line(0, 4)
        assert math.copysign(1.0, line.alpha) == 1.0

    def test_degenerate(self, J_path):
        assert J_path.make_line(3, 3).degenerate

    def test_endpoints_are_ground_points(self, J_path):
        p = J_path.point_at(2, 8, 0.0, RAW)
        assert p == J_path.ground_point(2)
        assert J_path.point_at(2, 8, INF) == J_path.ground_point(8)

    def test_projection(self, J_path):
        assert J_path.project_coord(2, 8, 5) == 3.0
        assert J_path.project(2, 8, 5).coord == 3.0

    def test_bad_basepoint(self, path11):
        with pytest.raises(JoinError):
            JoinSpace(HatMetric(path11), 99)

    def test_from_coord_domain(self, J_path):
        with pytest.raises(DomainError):
            J_path.from_coord(J_path.make_line(2, 8), 7.0)


class TestCocycle:
    def test_worked_values(self, J_path):
        x = J_path.point_at(2, 8, 3.0, RAW)
        assert J_path.ell(10, x) == 5.0
        y = J_path.point_at(2, 8, 1.0, RAW)
        assert J_path.beta_cross(10, y, x) == 2.0
        assert J_path.d_cross(x, y) == 2.0

    def test_tripod_values(self, J_tripod):
        x = J_tripod.point_at(6, 9, 1.0, RAW)
        assert J_tripod.ell(3, x) == 4.0
        y = J_tripod.point_at(6, 9, 3.0, RAW)
        assert J_tripod.d_cross(x, y) == 2.0

    def test_reversed_line(self, J_path):
        x = J_path.point_at(2, 8, 3.0, RAW)
        assert J_path.d_cross(x, J_path.star(x)) == 0.0
        assert J_path.star(x) == J_path.point_at(8, 2, -3.0, RAW)


class TestBasepoint:
    def test_change_basepoint_example(self, J_path):
        p = J_path.point_at(2, 8, 0.0, RAW)
        assert J_path.change_basepoint(p, 10) == -6.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10), st.integers(0, 10), st.floats(-3, 9), st.integers(0, 10))
    def test_rebase_preserves_distance(self, a, b, t, x1):
        J = JoinSpace(HatMetric(path_graph(11)), 0)
        p, q = J.point_at(a, b, t, RAW), J.point_at(b, a, -t / 2, SMOOTH)
        J1 = J.with_basepoint(x1)
        assert J1.d_cross(J.rebase(p, x1), J.rebase(q, x1)) == pytest.approx(J.d_cross(p, q), abs=1e-12)


class TestActions:
    def test_isometry_maps_to_star(self, J_path):
        g = Isometry.from_permutation(J_path.metric, {i: 10 - i for i in range(11)})
        x = J_path.point_at(2, 8, 3.0, RAW)
        gx = J_path.isom_action(g, x)
        assert gx == J_path.point_at(8, 2, -3.0, RAW)
        assert gx == J_path.star(x)

    def test_bad_permutation(self, J_path):
        with pytest.raises(IsometryError):
            Isometry.from_permutation(J_path.metric, {i: (i + 1) % 11 for i in range(11)})

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10), st.integers(0, 10), st.floats(-5, 10), st.floats(-4, 4))
    def test_star_anticommutes(self, a, b, t, r):
        J = JoinSpace(HatMetric(path_graph(11)), 0)
        x = J.point_at(a, b, t)
        lhs, rhs = J.star(J.r_action(r, x)), J.r_action(-r, J.star(x))
        assert J.d_cross(lhs, rhs) <= 1e-9


class TestDStar:
    def test_ground_example(self, J_path):
        assert J_path.d_star(J_path.ground_point(2), J_path.ground_point(8)) == 6.0

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_quadrature_oracle(self, J_tripod, seed):
        rng = random.Random(seed)
        pts = J_tripod.ground
        a, b, c, d = (rng.choice(pts) for _ in range(4))
        x = J_tripod.point_at(a, b, rng.uniform(-2, 6))
        y = J_tripod.point_at(c, d, rng.uniform(-2, 6))
        v, err = J_tripod.d_star_certified(x, y, 1e-8)
        assert err <= 1e-8
        assert v == pytest.approx(dstar_oracle(J_tripod, x, y), abs=1e-7)

    def test_certified_error_within_budget(self, J_tree):
        x = J_tree.point_at(1, 7, 0.3)
        y = J_tree.point_at(4, 9, -0.4)
        _, err = J_tree.d_star_certified(x, y, 1e-6)
        assert err <= 1e-6

    def test_eps_must_be_positive(self, J_path):
        with pytest.raises(DomainError):
            J_path.d_star_certified(J_path.ground_point(0), J_path.ground_point(1), 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 9), st.integers(0, 9), st.integers(0, 9), st.integers(0, 9), st.floats(-3, 8), st.floats(-3, 8))
    def test_gap_and_omega(self, a, b, c, d, s, t):
        from joinspace.hypgraph import random_tree

        g = random_tree(10, 0)
        J = JoinSpace(HatMetric(g), g.x0)
        x, y = J.point_at(a, b, s), J.point_at(c, d, t)
        dc, ds = J.d_cross(x, y), J.d_star(x, y)
        assert abs(ds - dc) <= 2.0 + 1e-9
        assert dc <= omega_inv(ds) + 1e-6


class TestPhiPsi:
    def test_phi_centre(self, J_path):
        assert J_path.phi(J_path.point_at(2, 8, 3.0)).coord == pytest.approx(3.0, abs=1e-9)

    def test_psi(self, J_path):
        x = J_path.point_at(2, 8, 3.0, RAW)
        assert J_path.psi(x) == 5
        assert J_path.psi(J_path.star(x)) == 5

    def test_json_roundtrip(self, J_path):
        x = J_path.point_at(2, 8, 1.25, SMOOTH)
        y = J_path.from_json(x.to_json())
        assert y == x
