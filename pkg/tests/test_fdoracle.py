import numpy as np
import pytest

from nullgeo.fdoracle import FDConfig, fd_directional, fd_gradient


def test_cubic_second_derivative():
    assert fd_directional(lambda p: p[0] ** 3, [2.0], [1.0], 2) == pytest.approx(12.0, abs=1e-7)


def test_exp_third_derivative():
    assert fd_directional(lambda p: np.exp(p[0]), [0.0], [1.0], 3) == pytest.approx(1.0, abs=1e-5)


def test_cone_embedding_along_theta(cone):
    d = fd_directional(cone.chart.F, [2.0, np.pi / 2, 0.0], [0.0, 1.0, 0.0], 1)
    assert abs(d[1]) < 1e-8
    np.testing.assert_allclose(d, [0, 0, 0, -2], atol=1e-8)


@pytest.mark.parametrize("levels", [1, 2, 3])
def test_richardson_improves_or_holds(levels):
    err = abs(fd_directional(lambda p: np.sin(p[0]), [0.7], [1.0], 1, FDConfig(h=1e-2, levels=levels))
              - np.cos(0.7))
    assert err < {1: 1e-4, 2: 1e-9, 3: 1e-11}[levels]


def test_gradient():
    g = fd_gradient(lambda p: p[0] * p[1] ** 2, [1.5, -2.0])
    np.testing.assert_allclose(g, [4.0, -6.0], atol=1e-8)


def test_domain_margin_rejected():
    with pytest.raises(ValueError):
        fd_directional(lambda p: p[0], [0.0005], [1.0], 1, domain=[(0.0, 1.0)])
    assert fd_directional(lambda p: p[0], [0.5], [1.0], 1, domain=[(0.0, 1.0)]) == pytest.approx(1.0)


@pytest.mark.parametrize("kw", [dict(h=0.0), dict(h=-1e-3), dict(levels=0), dict(levels=4)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        FDConfig(**kw)


def test_bad_order():
    with pytest.raises(ValueError):
        fd_directional(lambda p: p[0], [0.0], [1.0], 4)
