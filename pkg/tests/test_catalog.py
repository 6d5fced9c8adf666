import numpy as np
import pytest

from nullgeo.catalog import ConfigError, families, load_custom, make_null_cone, make_null_hyperplane
from nullgeo.classify import mean_curvature_H, screen_conformality, screen_umbilicity, umbilicity
from nullgeo.forms import PointGeometry
from nullgeo.nullframe import Grid


def test_cone_embedding(cone):
    np.testing.assert_allclose(cone.chart.F([2.0, np.pi / 2, 0.0]), [2, 2, 0, 0], atol=1e-15)
    assert cone.expected["lambda"]([2.0, 0, 0]) == 0.5
    assert cone.expected["r2"]([2.0, 0, 0]) == 4.0


def test_cone_rejects_small_n():
    with pytest.raises(ConfigError):
        make_null_cone(1)


def test_hyperplane_rejects_non_null():
    with pytest.raises(ConfigError):
        make_null_hyperplane(2, [1.0, 0.5, 0, 0])
    with pytest.raises(ConfigError):
        make_null_hyperplane(2, [1.0, 1.0, 0])


def test_load_custom():
    assert load_custom({"family": "cone", "n": 3}).chart.F.codomain == 5
    e = load_custom({"family": "hyperplane", "dir": [1, 1, 0, 0]})
    assert e.chart.n == 2 and e.expected == {}
    with pytest.raises(ConfigError):
        load_custom({"family": "nosuch"})
    with pytest.raises(ConfigError):
        load_custom({"family": "cone", "radius": 2})
    with pytest.raises(ConfigError):
        load_custom({"family": "cone", "n": "two"})
    assert families() == ["cone", "hyperplane", "twisted"]


@pytest.mark.parametrize("n,counts", [(2, (5, 5, 5)), (3, (5, 5, 5, 5))])
def test_golden_agreement(n, counts):
    e = make_null_cone(n)
    worst = 0.0
    for p in Grid.over(e.chart, counts).points():
        t = PointGeometry(e.chart, p).tables
        got = {"rho": umbilicity(t).factor, "varrho": screen_umbilicity(t).factor,
               "psi": screen_conformality(t).factor, "H_coeff": mean_curvature_H(t).coeff}
        for k, v in got.items():
            worst = max(worst, abs(v - e.expected[k](p)))
    assert worst < 1e-9
