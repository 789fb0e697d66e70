import numpy as np
import pytest

from joinspace.hatmetric import (
    HatMetric,
    fit_decay,
    geodesic_additivity,
    projection_constant,
    read_hat_csv,
    unit_pair_profile,
    verify_contract,
    write_hat_csv,
)
from joinspace.hypgraph import cycle_graph, path_graph, random_tree, tripod
from joinspace.join import Isometry
from joinspace.mspace import MetricError


class TestHatMetric:
    def test_word_metric(self):
        g = tripod(2)
        h = HatMetric(g)
        assert h.dist(2, 4) == 4 and h.x0 == 0

    def test_csv_roundtrip(self):
        g = path_graph(5)
        h = HatMetric(g, 2.0 * g.matrix)
        h2 = read_hat_csv(g, write_hat_csv(h))
        assert np.array_equal(h2.matrix, h.matrix)

    def test_csv_missing_vertex(self):
        g = path_graph(3)
        with pytest.raises(MetricError):
            read_hat_csv(g, ",0,1\n0,0,1\n1,1,0\n")

    def test_invariance_check(self):
        g = path_graph(5)
        flip = Isometry.from_permutation(g, {i: 4 - i for i in range(5)})
        HatMetric(g, automorphisms=[flip])
        M = g.matrix.copy()
        M[0, 1] = M[1, 0] = 1.5
        with pytest.raises(MetricError):
            HatMetric(g, M, automorphisms=[flip])


class TestContract:
    @pytest.mark.parametrize("g", [path_graph(11), tripod(3), random_tree(40, 2)], ids=["path", "tripod", "random"])
    def test_tree_profile_vanishes(self, g):
        prof = unit_pair_profile(HatMetric(g), min_sep=2)
        assert all(v == 0 for v in prof.values())

    def test_path_constants_zero(self):
        h = HatMetric(path_graph(11))
        assert geodesic_additivity(h) == 0 and projection_constant(h) == 0

    def test_cycle_profile_positive_then_certified(self):
        h = HatMetric(cycle_graph(12))
        rep = verify_contract(h, samples=500)
        for n, v in rep.c_profile.items():
            assert v <= rep.C * rep.mu**n + 1e-12

    def test_fit_decay_certifies(self):
        prof = {1: 1.0, 2: 0.6, 3: 0.3, 4: 0.0}
        fit = fit_decay(prof)
        assert all(v <= fit.bound(n) + 1e-12 for n, v in prof.items())
        assert fit.zero_from == 4
