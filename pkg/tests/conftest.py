import pytest

from joinspace.hatmetric import HatMetric
from joinspace.hypgraph import cayley_ball, path_graph, random_tree, tripod
from joinspace.join import JoinSpace


@pytest.fixture(scope="session")
def path11():
    return path_graph(11)


@pytest.fixture(scope="session")
def J_path(path11):
    return JoinSpace(HatMetric(path11), 0, path11)


@pytest.fixture(scope="session")
def J_tripod():
    g = tripod(3)
    return JoinSpace(HatMetric(g), 0, g)


@pytest.fixture(scope="session")
def J_tree():
    g = random_tree(10, 0)
    return JoinSpace(HatMetric(g), g.x0, g)


@pytest.fixture(scope="session")
def f2_10():
    return cayley_ball("f2", 10)


@pytest.fixture(scope="session")
def f2_12():
    return cayley_ball("f2", 12)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
