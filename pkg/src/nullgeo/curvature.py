"""Normal curvature of the screen leaves, d tau, and normal subbundles.

The leaf normal bundle is span{xi, N}.  Its curvature is computed two ways:
directly, by differentiating the normal connection twice, and algebraically
from the forms (h*(X, A_V Y) - h*(Y, A_V X)).  In flat ambient space both
also equal -2 d tau(X, Y) W with W = a xi - b N; see
:func:`normal_curvature_algebraic` for the sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jetcalc as jc
from .forms import (FormJets, FormTables, NormalField, PointGeometry, constant_normal,
                    form_jets, nabla_perp_jets, normal_projection)
from .jetcalc import DiffScalar
from .minkowski import minkowski_inner

KERNEL_SV_REL = 1e-7
DEFAULT_EQ_TOL = 1e-8


def _mm(A, B):
    if isinstance(A, DiffScalar) or isinstance(B, DiffScalar):
        p, q = A.shape
        r = B.shape[1]
        return (A.reshape(p, q, 1) * B.reshape(1, q, r)).sum(axis=1)
    return np.asarray(A) @ np.asarray(B)


def _screen_pairs(n: int):
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


# -- d tau ---------------------------------------------------------------------------

def dtau(geom: PointGeometry) -> np.ndarray:
    """d tau(T_i, T_j) = (T_i tau(T_j) - T_j tau(T_i)) / 2 on coordinate fields."""
    D = np.asarray(geom.jets1.tau.inner_partials().value)   # D[i, j] = d_i tau_j
    return 0.5 * (D - D.T)


def curvature_relation_residual(geom: PointGeometry) -> float:
    """max |2 d tau(X,Y) - (C(Y, A*X) - C(X, A*Y))| over chart pairs (flat ambient)."""
    t = geom.tables
    CA = t.C.T @ t.Astar[1:]          # CA[i, j] = C(T_i, A* T_j)
    return float(np.max(np.abs(2.0 * dtau(geom) - (CA.T - CA))))


# -- normal curvature ------------------------------------------------------------------

def _field(V) -> NormalField:
    if callable(V):
        return V
    a, b = V
    return constant_normal(float(a), float(b))


def normal_curvature_direct(geom: PointGeometry, V) -> np.ndarray:
    """R-perp(T_i, T_j) V for all chart pairs, shape (m, m, n+2).

    ``V`` is (a, b) for the constant-coefficient field a xi + b N, or a normal
    field (frame -> coefficients).
    """
    fj = geom.jets1
    U = nabla_perp_jets(fj, _field(V))                  # depth 1, (m, n+2)
    dU = U.inner_partials()                             # (m, m, n+2) at depth 0
    fr0 = geom.jets0.frame
    proj = np.asarray(normal_projection(fr0, dU).value)
    return proj - np.swapaxes(proj, 0, 1)


def _algebraic_coeffs(tab_B, tab_C, Astar, AN, a, b):
    AV = Astar * a + AN * b
    CA = _mm(tab_C.T, AV[1:])          # C(T_i, A_V T_j)
    BA = _mm(tab_B, AV)                # B(T_i, A_V T_j)
    return CA - CA.T, BA - BA.T


@dataclass
class AlgebraicCurvature:
    xi_coeff: np.ndarray     # (m, m): C(X, A_V Y) - C(Y, A_V X)
    N_coeff: np.ndarray      # (m, m): B(X, A_V Y) - B(Y, A_V X)
    dtau_xi: np.ndarray      # -2 dtau a: xi part of -2 dtau W
    dtau_N: np.ndarray       # +2 dtau b: N part of -2 dtau W

    def vector(self, xi, N) -> np.ndarray:
        return self.xi_coeff[..., None] * xi + self.N_coeff[..., None] * N

    def dtau_vector(self, xi, N) -> np.ndarray:
        return self.dtau_xi[..., None] * xi + self.dtau_N[..., None] * N


def normal_curvature_algebraic(t: FormTables, a: float, b: float,
                               dtau_matrix: np.ndarray | None = None) -> AlgebraicCurvature:
    """Curvature of the leaf normal bundle from the forms alone.

    With the convention 2 d tau(X,Y) = X tau(Y) - Y tau(X), flat ambient
    space gives R-perp(X,Y)V = -2 d tau(X,Y) W, W = a xi - b N.  The
    ``dtau_*`` fields hold that combination; if ``dtau_matrix`` is not given
    d tau is taken from the curvature relation 2 d tau(X,Y) = C(Y,A*X) - C(X,A*Y).
    """
    xc, nc = _algebraic_coeffs(t.B, t.C, t.Astar, t.AN, a, b)
    if dtau_matrix is None:
        CA = t.C.T @ t.Astar[1:]
        dtau_matrix = 0.5 * (CA.T - CA)
    return AlgebraicCurvature(xi_coeff=xc, N_coeff=nc,
                              dtau_xi=-2.0 * dtau_matrix * a, dtau_N=2.0 * dtau_matrix * b)


def normal_curvature_jets(fj: FormJets, field: NormalField) -> DiffScalar:
    """Algebraic R-perp(T_i, T_j)V as DiffScalars at fj's depth, (m, m, n+2)."""
    a, b = field(fj.frame)
    xc, nc = _algebraic_coeffs(fj.B, fj.C, fj.Astar, fj.AN, a, b)
    m, dim = fj.frame.T.shape
    xi = fj.frame.xi.reshape(1, 1, dim)
    N = fj.frame.N.reshape(1, 1, dim)
    return xc.reshape(m, m, 1) * xi + nc.reshape(m, m, 1) * N


def covariant_derivative_Rperp(geom: PointGeometry, V, tensorial: bool = False) -> np.ndarray:
    """(nabla-perp_Z R-perp)(X,Y)V for chart directions, shape (m, m, m, n+2) [Z, X, Y].

    By default this is the difference nabla-perp_Z(R(X,Y)V) - R(X,Y) nabla-perp_Z V
    on coordinate fields.  ``tensorial=True`` also subtracts
    R(nabla*_Z X, Y)V + R(X, nabla*_Z Y)V.
    """
    field = _field(V)
    fj1 = geom.jets1
    fj0 = geom.jets0
    fr0 = fj0.frame
    R = normal_curvature_jets(fj1, field)                       # depth 1
    dR = np.asarray(normal_projection(fr0, R.inner_partials()).value)   # (Z, X, Y, dim)
    xi, N = np.asarray(fr0.xi.value), np.asarray(fr0.N.value)
    nabV = np.asarray(nabla_perp_jets(fj0, field).value)        # (Z, dim)
    t = geom.tables
    out = np.empty_like(dR)
    for z in range(nabV.shape[0]):
        alpha = minkowski_inner(nabV[z], N)    # xi coefficient
        beta = minkowski_inner(nabV[z], xi)    # N coefficient
        xc, nc = _algebraic_coeffs(t.B, t.C, t.Astar, t.AN, alpha, beta)
        out[z] = dR[z] - (xc[..., None] * xi + nc[..., None] * N)
    if tensorial:
        a, b = field(fr0)
        xc, nc = _algebraic_coeffs(t.B, t.C, t.Astar, t.AN, jc.value_of(a), jc.value_of(b))
        R0 = xc[..., None] * xi + nc[..., None] * N              # (X, Y, dim)
        dT = np.asarray(fj0.dT.value)
        gss_inv = np.linalg.inv(t.gss)
        W = np.asarray(fr0.T.value)[1:]
        # Gamma[z, x, e]: screen component e of nabla*_{T_z} T_x
        Gam = np.zeros((t.n + 1, t.n + 1, t.n + 1))
        Gam[:, :, 1:] = minkowski_inner(dT[:, :, None, :], W[None, None]) @ gss_inv
        out -= np.einsum("zxe,eyA->zxyA", Gam, R0) + np.einsum("zye,xeA->zxyA", Gam, R0)
    return out


@dataclass
class NormalCurvatureSample:
    p: np.ndarray
    X: int
    Y: int
    V: tuple
    direct: np.ndarray
    algebraic: np.ndarray
    dtau_form: np.ndarray
    dtau_value: float

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.direct - self.algebraic)))


def normal_curvature_samples(geom: PointGeometry, normals) -> list[NormalCurvatureSample]:
    """Direct and algebraic R-perp for every screen pair and each (a, b) in ``normals``."""
    t = geom.tables
    fr = geom.frame_data
    D = dtau(geom)
    # direct curvature is linear in constant (a, b): build from the xi and N fields
    Rxi = normal_curvature_direct(geom, (1.0, 0.0))
    RN = normal_curvature_direct(geom, (0.0, 1.0))
    out = []
    for a, b in normals:
        alg = normal_curvature_algebraic(t, a, b, D)
        av = alg.vector(fr.xi, fr.N)
        dv = alg.dtau_vector(fr.xi, fr.N)
        direct = a * Rxi + b * RN
        for i, j in _screen_pairs(t.n):
            out.append(NormalCurvatureSample(p=geom.p, X=i, Y=j, V=(a, b), direct=direct[i, j],
                                             algebraic=av[i, j], dtau_form=dv[i, j],
                                             dtau_value=float(D[i, j])))
    return out


# -- subbundles ------------------------------------------------------------------------

def _null_space(M: np.ndarray, abs_tol: float, rel_tol: float = KERNEL_SV_REL) -> np.ndarray:
    _, s, vt = np.linalg.svd(M)
    s_full = np.zeros(vt.shape[0])
    s_full[: s.size] = s
    smax = s_full.max() if s_full.size else 0.0
    zero = s_full <= max(rel_tol * smax, abs_tol)
    return vt[zero]


def rperp_actions(geom: PointGeometry) -> list[np.ndarray]:
    """2x2 matrices of R-perp(X,Y) on normal coefficients (a, b) -> (a', b')."""
    fr = geom.frame_data
    Rxi = normal_curvature_direct(geom, (1.0, 0.0))
    RN = normal_curvature_direct(geom, (0.0, 1.0))
    acts = []
    for i, j in _screen_pairs(geom.chart.n):
        cols = []
        for R in (Rxi[i, j], RN[i, j]):
            cols.append([minkowski_inner(R, fr.N), minkowski_inner(R, fr.xi)])
        acts.append(np.array(cols).T)
    return acts


def kernel_subbundle_D(actions, tol: float = DEFAULT_EQ_TOL) -> np.ndarray:
    """Basis (rows of (a, b)) of the normals killed by every R-perp(X, Y)."""
    M = np.vstack([np.asarray(A, dtype=float) for A in actions]) if len(actions) else np.zeros((1, 2))
    return _null_space(M, tol)


@dataclass
class FirstNormalSpace:
    vanishing: np.ndarray   # rows (a, b) with a A* + b A_N = 0 on the screen
    Q: np.ndarray           # rows (a, b) spanning the g-orthogonal complement

    @property
    def dim(self) -> int:
        return self.Q.shape[0]


def first_normal_space(t: FormTables, tol: float = DEFAULT_EQ_TOL) -> FirstNormalSpace:
    M = np.column_stack([t.screen_block("Astar").ravel(), t.screen_block("AN").ravel()])
    ker = _null_space(M, tol)
    if ker.shape[0] == 0:
        Q = np.eye(2)
    elif ker.shape[0] == 2:
        Q = np.zeros((0, 2))
    else:
        a, b = ker[0]
        # g(a xi + b N, a' xi + b' N) = a b' + b a' = 0
        Q = np.array([[a, -b]]) / np.hypot(a, b)
    return FirstNormalSpace(vanishing=ker, Q=Q)


def normal_vector_from_coeffs(fr, coeffs) -> np.ndarray:
    a, b = coeffs
    return a * np.asarray(fr.xi) + b * np.asarray(fr.N)


# -- parallel candidate basis and the four-way equivalence -------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


def _leaf_base_point(chart, p: np.ndarray) -> np.ndarray:
    p0 = p.copy()
    for a in range(1, chart.dim):
        lo, hi = chart.domain[a]
        h = 0.25 * (hi - lo)
        p0[a] = p[a] - h if p[a] > 0.5 * (lo + hi) else p[a] + h
    return p0


def parallel_candidate_residual(geom: PointGeometry) -> float:
    """How far the gauge-integrated basis {e^I xi, e^-I N} is from parallel at p.

    I(q) integrates tau along the straight leaf segment from a fixed base
    point to q.  The fields are parallel along every leaf direction exactly
    when d tau vanishes on the swept region.
    """
    chart, p = geom.chart, geom.p
    p0 = _leaf_base_point(chart, p)
    q = jc.lift_point(p, 1)
    I = None
    for node, w in zip(_GL_NODES, _GL_WEIGHTS):
        s = 0.5 * (node + 1.0)
        gamma = (q - p0) * s + p0
        tau = form_jets(chart, gamma).tau
        term = (tau * (q - p0)).sum() * (0.5 * w)
        I = term if I is None else I + term
    dI = np.array([I.derivative(j + 1) for j in range(chart.dim)])
    fr = geom.jets0.frame
    xi, N = np.asarray(fr.xi.value), np.asarray(fr.N.value)
    nxi = np.asarray(nabla_perp_jets(geom.jets0, constant_normal(1.0, 0.0)).value)
    nN = np.asarray(nabla_perp_jets(geom.jets0, constant_normal(0.0, 1.0)).value)
    e = np.exp(I.value)
    worst = 0.0
    for a in range(1, chart.dim):
        r1 = e * (dI[a] * xi + nxi[a])
        r2 = (1.0 / e) * (-dI[a] * N + nN[a])
        worst = max(worst, float(np.max(np.abs(r1))), float(np.max(np.abs(r2))))
    return worst


@dataclass
class Equivalence:
    dtau: float
    commutator: float
    rperp: float
    parallel: float
    tol: float

    @property
    def booleans(self) -> tuple[bool, bool, bool, bool]:
        return tuple(v < self.tol for v in (self.dtau, self.commutator, self.rperp, self.parallel))

    @property
    def agree(self) -> bool:
        return len(set(self.booleans)) == 1


def corollary_equivalence(geom: PointGeometry, tol: float = DEFAULT_EQ_TOL) -> Equivalence:
    n = geom.chart.n
    pairs = _screen_pairs(n)
    D = dtau(geom)
    t = geom.tables
    As, AN = t.screen_block("Astar"), t.screen_block("AN")
    Rxi = normal_curvature_direct(geom, (1.0, 0.0))
    RN = normal_curvature_direct(geom, (0.0, 1.0))
    return Equivalence(
        dtau=float(max(abs(D[i, j]) for i, j in pairs)),
        commutator=float(np.max(np.abs(As @ AN - AN @ As))),
        rperp=max(float(np.max(np.abs(R[i, j]))) for R in (Rxi, RN) for i, j in pairs),
        parallel=parallel_candidate_residual(geom),
        tol=tol,
    )


def commutator_remark(t: FormTables, a: float, b: float) -> float:
    """|| A_V A_W - A_W A_V || for V = a xi + b N, W = a xi - b N."""
    AV = t.A_V(a, b)[1:, 1:]
    AW = t.A_V(a, -b)[1:, 1:]
    return float(np.max(np.abs(AV @ AW - AW @ AV)))
