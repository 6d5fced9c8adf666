import numpy as np
import pytest

from nullgeo.curvature import (corollary_equivalence, commutator_remark, covariant_derivative_Rperp,
                               curvature_relation_residual, dtau, first_normal_space,
                               kernel_subbundle_D, normal_curvature_algebraic,
                               normal_curvature_direct, normal_curvature_samples, rperp_actions)
from nullgeo.fdoracle import fd_directional
from nullgeo.forms import FormTables, PointGeometry
from nullgeo.minkowski import minkowski_inner
from nullgeo.nullframe import Grid


def test_dtau_cone_and_plane(cone_geom, plane_geom):
    assert np.max(np.abs(dtau(cone_geom))) < 1e-12
    assert np.max(np.abs(dtau(plane_geom))) == 0


def test_dtau_against_finite_differences(cone, twisted):
    # oracle: antisymmetrised finite differences of the tau covector field
    for e, p in ((cone, [1.7, 1.1, 0.9]), (twisted, [0.1, 0.2, -0.3])):
        tau = lambda x: PointGeometry(e.chart, x).tables.tau
        D = np.array([fd_directional(tau, p, np.eye(3)[i], 1) for i in range(3)])
        np.testing.assert_allclose(dtau(PointGeometry(e.chart, p)), 0.5 * (D - D.T), atol=1e-8)


def test_curvature_relation(twisted_geom, cone_geom):
    assert curvature_relation_residual(twisted_geom) < 1e-10
    assert curvature_relation_residual(cone_geom) < 1e-10
    assert np.max(np.abs(dtau(twisted_geom))) > 0.1


def test_direct_vanishes_on_cone(cone, cone_geom, plane_geom):
    for V in (cone.normal_fields["V1"], cone.normal_fields["V2"], (0.3, -1.1)):
        assert np.max(np.abs(normal_curvature_direct(cone_geom, V))) < 1e-12
    assert np.max(np.abs(normal_curvature_direct(plane_geom, (1.0, 1.0)))) == 0


def test_algebraic_cone(cone_geom):
    t = cone_geom.tables
    alg = normal_curvature_algebraic(t, -0.25, -2.0)
    assert np.max(np.abs(alg.xi_coeff)) < 1e-13 and np.max(np.abs(alg.N_coeff)) < 1e-13
    assert np.max(np.abs(alg.dtau_xi)) < 1e-13


def test_algebraic_bruteforce_synthetic():
    # A_V = diag(1, 2) from A* = diag(1, 2), A_N = 0, a = 1; C from a symmetric matrix
    S = np.array([[0.3, -0.7], [-0.7, 1.1]])
    Bs = np.diag([1.0, 2.0])
    t = FormTables.synthetic(Bs, S, np.diag([1.0, 2.0]), S)
    a, b = 1.0, 0.0
    AV = a * np.diag([1.0, 2.0]) + b * S
    alg = normal_curvature_algebraic(t, a, b)
    for i in range(2):
        for j in range(2):
            X, Y = np.eye(2)[i], np.eye(2)[j]
            c = X @ S @ (AV @ Y) - Y @ S @ (AV @ X)
            bb = X @ Bs @ (AV @ Y) - Y @ Bs @ (AV @ X)
            assert alg.xi_coeff[i + 1, j + 1] == pytest.approx(c, abs=1e-14)
            assert alg.N_coeff[i + 1, j + 1] == pytest.approx(bb, abs=1e-14)


@pytest.mark.parametrize("name", ["cone", "plane", "twisted"])
def test_direct_equals_algebraic_and_dtau_form(name, cone, plane, twisted):
    e = {"cone": cone, "plane": plane, "twisted": twisted}[name]
    rng = np.random.default_rng(3)
    for p in Grid.over(e.chart, (2, 3, 3)).points():
        g = PointGeometry(e.chart, p)
        fr = g.frame_data
        for s in normal_curvature_samples(g, [tuple(v) for v in rng.uniform(-2, 2, (10, 2))]):
            assert s.residual < 1e-8
            assert np.max(np.abs(s.direct - s.dtau_form)) < 1e-8
            a, b = minkowski_inner(s.direct, fr.N), minkowski_inner(s.direct, fr.xi)
            assert np.max(np.abs(s.direct - a * fr.xi - b * fr.N)) < 1e-9


def test_dtau_sign_on_twisted(twisted_geom):
    # with 2 d tau(X,Y) = X tau(Y) - Y tau(X), flat space gives R(X,Y)V = -2 d tau(X,Y) W
    s = normal_curvature_samples(twisted_geom, [(0.7, 1.3)])[0]
    D = dtau(twisted_geom)[s.X, s.Y]
    fr = twisted_geom.frame_data
    W = 0.7 * fr.xi - 1.3 * fr.N
    np.testing.assert_allclose(s.direct, -2 * D * W, atol=1e-10)
    assert np.max(np.abs(s.direct - 2 * D * W)) > 0.1


def test_nabla_rperp(cone_geom, plane_geom, cone):
    for V in (cone.normal_fields["V1"], (1.0, 0.0), (0.0, 1.0)):
        assert np.max(np.abs(covariant_derivative_Rperp(cone_geom, V))) < 1e-7
        assert np.max(np.abs(covariant_derivative_Rperp(cone_geom, V, tensorial=True))) < 1e-7
    assert np.max(np.abs(covariant_derivative_Rperp(plane_geom, (1.0, 1.0)))) == 0


def test_kernel_D(cone_geom, plane_geom, twisted_geom):
    assert kernel_subbundle_D(rperp_actions(cone_geom)).shape[0] == 2
    assert kernel_subbundle_D(rperp_actions(plane_geom)).shape[0] == 2
    assert kernel_subbundle_D(rperp_actions(twisted_geom)).shape[0] == 0
    # synthetic action V -> 2 d tau W on (a, b) coefficients: (a, b) -> (2 d a, -2 d b)
    d = 0.4
    assert kernel_subbundle_D([np.diag([2 * d, -2 * d])]).shape[0] == 0


def test_first_normal_space(cone_geom, plane_geom):
    Q = first_normal_space(cone_geom.tables).Q
    assert Q.shape == (1, 2)
    # proportional to V1 = (-1/4, -2)
    assert abs(Q[0, 0] * -2 - Q[0, 1] * -0.25) < 1e-12
    assert first_normal_space(plane_geom.tables).dim == 0
    # A* != 0, A_N = 0: vanishing normals are the N line; Q is its g-complement, the N line too
    t = FormTables.synthetic(np.eye(2), np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)))
    fns = first_normal_space(t)
    np.testing.assert_allclose(np.abs(fns.vanishing[0]), [0, 1], atol=1e-14)
    np.testing.assert_allclose(np.abs(fns.Q[0]), [0, 1], atol=1e-14)


@pytest.mark.parametrize("name,expect", [("cone", True), ("plane", True), ("twisted", False)])
def test_corollary_equivalence(name, expect, cone, plane, twisted):
    e = {"cone": cone, "plane": plane, "twisted": twisted}[name]
    for p in Grid.over(e.chart, (2, 2, 3)).points():
        eq = corollary_equivalence(PointGeometry(e.chart, p))
        assert eq.agree and eq.booleans[0] == expect


def test_remark_commutator(cone_geom):
    rng = np.random.default_rng(4)
    for a, b in rng.uniform(-2, 2, (10, 2)):
        assert commutator_remark(cone_geom.tables, a, b) < 1e-8
