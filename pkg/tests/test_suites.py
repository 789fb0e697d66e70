import numpy as np
import pytest

from joinspace.hatmetric import HatMetric
from joinspace.hypgraph import cayley_ball, cycle_graph, path_graph, tripod
from joinspace.suites import ORDER, SUITES, Context, SuiteReport, dd_tensor_checks, run_suite


class TestReport:
    def test_pass_flag_follows_tolerance(self):
        rep = SuiteReport("x", 0)
        rep.add("a", [0.1, 0.2], 0.2)
        assert rep.passed
        rep.add("b", [0.3], 0.2)
        assert not rep.passed and rep.max_violation == pytest.approx(0.3)

    def test_json_has_no_runtime_by_default(self):
        rep = SuiteReport("x", 0)
        rep.runtime = 1.0
        assert "runtime" not in rep.to_json() and rep.to_json(timing=True)["runtime"] == 1.0

    def test_registry(self):
        assert set(ORDER) == set(SUITES)


class TestDetection:
    def test_dd_checks_catch_non_metric_noise(self):
        rng = np.random.default_rng(0)
        M = path_graph(6).matrix + rng.uniform(0, 0.1, (6, 6))
        rep = SuiteReport("dd", 0)
        dd_tensor_checks(M, rep, 1e-12)
        assert not rep.passed

    def test_dd_checks_pass_on_metric(self):
        rep = SuiteReport("dd", 0)
        dd_tensor_checks(np.asarray(cycle_graph(7).matrix, dtype=float), rep, 1e-12)
        assert rep.passed


@pytest.mark.parametrize("name", [n for n in ORDER if n != "asym"])
@pytest.mark.parametrize("graph", ["path", "tripod"])
def test_suites_pass_on_trees(name, graph):
    g = path_graph(11) if graph == "path" else tripod(4)
    rep = run_suite(name, Context(g, HatMetric(g), seed=1, scale=0.1))
    assert rep.passed, rep.to_json()


def test_flow_suite_on_f2():
    g = cayley_ball("f2", 8)
    rep = run_suite("flow", Context(g, HatMetric(g), seed=0, scale=0.1))
    assert rep.passed and "limit-vs-formula" in rep.checks


def test_reports_reproducible():
    g = tripod(3)
    a = run_suite("join-coherence", Context(g, HatMetric(g), seed=5, scale=0.1)).to_json()
    b = run_suite("join-coherence", Context(g, HatMetric(g), seed=5, scale=0.1)).to_json()
    assert a == b
