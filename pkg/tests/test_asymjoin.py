import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from joinspace.asymjoin import (
    AsymJoin,
    GroupPair,
    UnionSpace,
    bundled_examples,
    monotone_sweep,
    parse_action_spec,
    rotation_counterexample,
    slice_at,
    sweep_out,
    worked_example,
)
from joinspace.extsmooth import INF
from joinspace.join import IsometryError, JoinError
from joinspace.mspace import FiniteMetricSpace


class TestUnionMetric:
    def test_worked_example(self):
        u = worked_example()
        assert u.dist((1, "p0"), (2, "q0")) == 1
        assert u.dist((1, "p1"), (2, "q0")) == 2
        assert u.dist((1, "p0"), (1, "p1")) == 1

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(0, 10), min_size=2, max_size=5), st.lists(st.floats(0, 10), min_size=1, max_size=4))
    def test_trivial_group_formula(self, xs, ys):
        # with one cross edge the metric is d1(p, y1) + 1 + d2(y2, q)
        Y1 = FiniteMetricSpace.from_matrix(list(range(len(xs))), np.abs(np.subtract.outer(xs, xs)))
        Y2 = FiniteMetricSpace.from_matrix(list(range(len(ys))), np.abs(np.subtract.outer(ys, ys)))
        u = UnionSpace(Y1, Y2, (0, 0))
        for p in Y1.points:
            for q in Y2.points:
                want = min(Y1.dist(p, 0) + 1 + Y2.dist(0, q), np.inf)
                assert u.dist((1, p), (2, q)) == pytest.approx(want, abs=1e-12)

    def test_bad_action(self):
        Y = FiniteMetricSpace.from_matrix(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
        with pytest.raises(IsometryError):
            UnionSpace(Y, Y, ("a", "a"), [GroupPair("g", {"a": "b", "b": "a", "c": "c"}, {"a": "a", "b": "b", "c": "c"})])

    def test_orbit_cross_pairs(self):
        u = rotation_counterexample()
        assert len(u.cross_pairs) == 4

    def test_action_spec(self):
        Y = FiniteMetricSpace.from_matrix([0, 1], [[0, 1], [1, 0]])
        bp, acts = parse_action_spec(json.dumps({"pairs": [["s", [1, 0], [1, 0]]], "basepoints": [0, 1]}), Y, Y)
        assert bp == (0, 1) and acts[0].perm1 == {0: 1, 1: 0}


class TestJoin:
    def test_lines_and_dstar(self):
        aj = AsymJoin(worked_example())
        assert len(aj.lines()) == 2
        assert aj.d_star(aj.ground_point((1, "p0")), aj.ground_point((2, "q0"))) == 1.0

    def test_wrong_direction(self):
        aj = AsymJoin(worked_example())
        with pytest.raises(JoinError):
            aj.cross_point((2, "q0"), (1, "p0"), 0.0)

    def test_slice_limits(self):
        aj = AsymJoin(worked_example())
        lo, hi = slice_at(aj, -INF), slice_at(aj, INF)
        assert {p.ground for p in lo.points} == {(1, "p0"), (1, "p1")}
        assert {p.ground for p in hi.points} == {(2, "q0")}

    @pytest.mark.parametrize("name", sorted(bundled_examples()))
    def test_bundled_sweeps_monotone(self, name):
        reps = sweep_out(bundled_examples()[name], [-8, -4, 0, 4, 8])
        assert monotone_sweep(reps)
        assert reps[0].distortion_y1 < 0.01 and reps[-1].distortion_y2 < 0.01

    def test_rotation_counterexample_not_monotone(self):
        reps = sweep_out(rotation_counterexample(), [-8, -4, 4, 8])
        assert not monotone_sweep(reps)
        assert reps[1].distortion_y2 > reps[0].distortion_y2
