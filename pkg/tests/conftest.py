import numpy as np
import pytest

from harmball.chart import EuclideanChart, WarpedChart
from harmball.gluing import build_euclidean_end
from harmball.mesh import make_disk_mesh
from harmball.warping import sine


@pytest.fixture(scope="session")
def sphere_glued():
    return build_euclidean_end(sine(), 1.0)


@pytest.fixture(scope="session")
def sphere_chart(sphere_glued):
    return WarpedChart(sphere_glued.warping(), 2)


@pytest.fixture(scope="session")
def flat_chart():
    return EuclideanChart(2)


@pytest.fixture(scope="session")
def disk3():
    return make_disk_mesh(1.0, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    if request.param == "numpy":
        monkeypatch.setenv("HARMBALL_DISABLE_NUMBA", "1")
    else:
        monkeypatch.delenv("HARMBALL_DISABLE_NUMBA", raising=False)
    return request.param


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
