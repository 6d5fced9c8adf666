import numpy as np
import pytest

from nullgeo.catalog import make_null_cone, make_null_hyperplane, make_twisted
from nullgeo.forms import PointGeometry

CONE_POINT = np.array([2.0, np.pi / 2, 0.0])


@pytest.fixture(scope="session")
def cone():
    return make_null_cone(2)


@pytest.fixture(scope="session")
def cone3():
    return make_null_cone(3)


@pytest.fixture(scope="session")
def plane():
    return make_null_hyperplane(2)


@pytest.fixture(scope="session")
def twisted():
    return make_twisted(2)


@pytest.fixture(scope="session")
def cone_geom(cone):
    return PointGeometry(cone.chart, CONE_POINT)


@pytest.fixture(scope="session")
def plane_geom(plane):
    return PointGeometry(plane.chart, [0.1, -0.3, 0.4])


@pytest.fixture(scope="session")
def twisted_geom(twisted):
    return PointGeometry(twisted.chart, [0.1, 0.2, -0.3])


# acceptance criteria report: one line per criterion, shown after the test summary
_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    log = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])
    return log.append


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
