import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from joinspace.extsmooth import INF
from joinspace.mspace import (
    ConvexPoint,
    FiniteMetricSpace,
    MetricError,
    check_metric,
    double_difference,
    estimate_equivalence,
    gromov_product,
    linear_extend_dist,
)


def line_space(xs):
    xs = np.asarray(xs, dtype=float)
    return FiniteMetricSpace.from_matrix(list(range(len(xs))), np.abs(np.subtract.outer(xs, xs)))


class TestFiniteMetricSpace:
    def test_rejects_asymmetric(self):
        with pytest.raises(MetricError):
            check_metric(np.array([[0, 1], [2, 0]], dtype=float))

    def test_rejects_triangle_violation(self):
        with pytest.raises(MetricError):
            check_metric(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float))

    def test_basepoint(self):
        S = line_space([0, 1, 3])
        assert S.x0 == 0
        assert S.with_basepoint(2).x0 == 2
        with pytest.raises(MetricError):
            S.with_basepoint(9)

    def test_infinite_components(self):
        M = np.array([[0, 1, INF], [1, 0, INF], [INF, INF, 0]])
        S = FiniteMetricSpace(["a", "b", "c"], M, check=False)
        assert sorted(map(sorted, S.components())) == [["a", "b"], ["c"]]


class TestProducts:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=4, max_size=4))
    def test_line_double_difference(self, xs):
        # direct evaluation of the defining formula
        S = line_space(xs)
        d = lambda i, j: abs(xs[i] - xs[j])
        want = 0.5 * (d(0, 2) - d(1, 2) - d(0, 3) + d(1, 3))
        assert double_difference(S, 0, 1, 2, 3) == pytest.approx(want, abs=1e-12)
        assert gromov_product(S, 0, 1, 2) >= -1e-12

    def test_infinite_convention(self):
        M = np.array([[0, INF], [INF, 0]])
        S = FiniteMetricSpace(["a", "b"], M, check=False)
        assert double_difference(S, "a", "b", "a", "b") == -INF
        assert gromov_product(S, "a", "a", "b") == INF

    def test_convex_extension(self):
        S = line_space([0, 2])
        m = ConvexPoint.midpoint(0, 1)
        assert linear_extend_dist(S, m, ConvexPoint.vertex(0)) == 1.0
        assert linear_extend_dist(S, m, m) == 1.0
        with pytest.raises(ValueError):
            ConvexPoint([(0, 0.3)])


class TestEquivalence:
    def test_plus(self):
        r = estimate_equivalence([1, 2, 3], [1.5, 2, 2], "plus")
        assert r.B == 1.0

    def test_times(self):
        r = estimate_equivalence([2, 4], [1, 2], "times")
        assert r.A == 2.0 and r.max_violation == 0.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.1, 100), min_size=2, max_size=20), st.floats(1, 3), st.floats(0, 2))
    def test_timesplus_certifies(self, g, A, B):
        f = [A * x + B for x in g]
        r = estimate_equivalence(f, g, "timesplus")
        assert r.max_violation <= 1e-9
