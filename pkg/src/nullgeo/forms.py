"""Fundamental forms, shape operators and connections of a null hypersurface.

Everything is obtained by flat ambient differentiation of the frame fields
followed by algebraic projections with the (xi, N) dual pairing; no
Christoffel symbols are formed.

Matrix conventions (chart frame, t first):

* ``B[i, j] = B(T_i, T_j)``
* ``C[a, i] = C(T_i, W_a)``, screen slot first
* ``Astar[:, j]`` and ``AN[:, j]`` are the chart components of A*T_j and
  A_N T_j; row 0 (the t slot) is zero because both are screen-valued.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from . import jetcalc as jc
from .jetcalc import DiffScalar
from .minkowski import minkowski_inner
from .nullframe import FrameData, FrameJets, NullChart, frame_at, frame_jets


@dataclass(frozen=True)
class FormJets:
    """Forms as DiffScalars at a lifted point, plus the frame one level deeper."""

    frame: FrameJets
    outer: FrameJets
    dT: DiffScalar      # (m, m, n+2): dT[i, j] = d_i T_j
    dxi: DiffScalar     # (m, n+2)
    dN: DiffScalar      # (m, n+2)
    B: DiffScalar
    C: DiffScalar
    tau: DiffScalar
    Astar: DiffScalar
    AN: DiffScalar

    def base(self) -> "FormJets":
        f = lambda x: x.base()
        return FormJets(frame=self.frame.map(f), outer=self.outer.map(f),
                        **{k: getattr(self, k).base() for k in
                           ("dT", "dxi", "dN", "B", "C", "tau", "Astar", "AN")})


def _screen_operator(fr: FrameJets, vecs: DiffScalar) -> DiffScalar:
    # columns = chart components of screen vectors vecs[j]; t row is zero
    coords = fr.screen_coords(vecs)                     # (m, n)
    m, n = coords.shape
    rows = [jc.as_diff(np.zeros(m), coords[0, 0])] + [coords[:, a] for a in range(n)]
    return jc.stack(rows)


def form_jets(chart: NullChart, q: DiffScalar) -> FormJets:
    m = chart.n + 1
    outer = frame_jets(chart, jc.extend(q))
    fr = outer.map(lambda x: x.base())
    dT = outer.T.inner_partials()
    dxi = outer.xi.inner_partials()
    dN = outer.N.inner_partials()
    xi, N = fr.xi, fr.N
    B = minkowski_inner(dT, xi)
    C = minkowski_inner(dT[:, 1:], N).T
    tau = minkowski_inner(dN, xi)
    Astar = _screen_operator(fr, -dxi - tau.reshape(m, 1) * xi)
    AN = _screen_operator(fr, -dN + tau.reshape(m, 1) * N)
    return FormJets(frame=fr, outer=outer, dT=dT, dxi=dxi, dN=dN, B=B, C=C, tau=tau,
                    Astar=Astar, AN=AN)


@dataclass
class FormTables:
    """Per-point forms in the chart frame (plain arrays)."""

    n: int
    B: np.ndarray
    C: np.ndarray
    tau: np.ndarray
    Astar: np.ndarray
    AN: np.ndarray
    gram: np.ndarray
    xi_coeffs: np.ndarray
    eta: np.ndarray

    @property
    def gss(self) -> np.ndarray:
        return self.gram[1:, 1:]

    def screen_block(self, name: str) -> np.ndarray:
        """n x n screen restriction of B, C, Astar or AN."""
        M = getattr(self, name)
        return M[:, 1:] if name == "C" else M[1:, 1:]

    def A_V(self, a: float, b: float) -> np.ndarray:
        return a * self.Astar + b * self.AN

    @classmethod
    def synthetic(cls, B_s, C_s, Astar_s, AN_s, gss=None, tau_s=None) -> "FormTables":
        """Tables given only on the screen block (radical slots zero).

        Useful for checking algebraic statements without a chart.
        """
        B_s, C_s = np.asarray(B_s, float), np.asarray(C_s, float)
        n = B_s.shape[0]
        gss = np.eye(n) if gss is None else np.asarray(gss, float)
        m = n + 1
        pad = lambda M: np.block([[np.zeros((1, 1)), np.zeros((1, n))],
                                  [np.zeros((n, 1)), np.asarray(M, float)]])
        gram = pad(gss)
        C = np.hstack([np.zeros((n, 1)), C_s])
        tau = np.zeros(m) if tau_s is None else np.r_[0.0, tau_s]
        k = np.eye(m)[0]
        return cls(n=n, B=pad(B_s), C=C, tau=tau, Astar=pad(Astar_s), AN=pad(AN_s),
                   gram=gram, xi_coeffs=k, eta=k.copy())


def tables_from_jets(fj: FormJets, n: int) -> FormTables:
    v = lambda x: np.asarray(x.value, dtype=float)
    return FormTables(n=n, B=v(fj.B), C=v(fj.C), tau=v(fj.tau), Astar=v(fj.Astar),
                      AN=v(fj.AN), gram=v(fj.frame.gram), xi_coeffs=v(fj.frame.k),
                      eta=v(fj.frame.eta))


class PointGeometry:
    """Lazy per-point evaluation of frames, forms and their derivatives.

    ``jets0`` needs two derivatives of the chart map; ``jets1`` carries one
    more user level (all chart directions seeded) and needs three.
    """

    def __init__(self, chart: NullChart, p, check: bool = True):
        self.chart = chart
        self.p = np.asarray(p, dtype=float)
        if check:
            self.frame_data  # raises on bad points

    @cached_property
    def frame_data(self) -> FrameData:
        return frame_at(self.chart, self.p)

    @cached_property
    def jets1(self) -> FormJets:
        return form_jets(self.chart, jc.lift_point(self.p, 1))

    @cached_property
    def jets0(self) -> FormJets:
        if "jets1" in self.__dict__:
            return self.jets1.base()
        return form_jets(self.chart, DiffScalar(self.p))

    @cached_property
    def tables(self) -> FormTables:
        return tables_from_jets(self.jets0, self.chart.n)


def geometry(chart: NullChart, p) -> PointGeometry:
    return PointGeometry(chart, p)


# -- evaluation on frame vectors -------------------------------------------------

def _vec(t: FormTables, X) -> np.ndarray:
    if isinstance(X, (int, np.integer)):
        return np.eye(t.n + 1)[X]
    return np.asarray(X, dtype=float)


def second_form_B(t: FormTables, X, Y) -> float:
    return float(_vec(t, X) @ t.B @ _vec(t, Y))


def screen_form_C(t: FormTables, X, PY) -> float:
    """C(X, PY); PY given in chart components, its t slot must vanish."""
    y = _vec(t, PY)
    return float(y[1:] @ t.C @ _vec(t, X))


def one_form_tau(t: FormTables, X) -> float:
    return float(t.tau @ _vec(t, X))


def shape_operator_star(t: FormTables) -> np.ndarray:
    return t.Astar


def shape_operator_AN(t: FormTables) -> np.ndarray:
    return t.AN


def screen_projection(t: FormTables, X) -> np.ndarray:
    """P X in chart components: remove the xi part eta(X) xi."""
    x = _vec(t, X)
    return x - (t.eta @ x) * t.xi_coeffs


def metric(t: FormTables, X, Y) -> float:
    return float(_vec(t, X) @ t.gram @ _vec(t, Y))


# -- leaf shape operators and normal connection ------------------------------------

@dataclass
class ShapeOperatorV:
    combination: np.ndarray   # a A*_xi + b A_N on the screen (n x n)
    weingarten: np.ndarray    # -(screen part of d_X V), V = a xi + b N
    residual: float


def shape_operator_V(geom: PointGeometry, a: float, b: float) -> ShapeOperatorV:
    if a == 0 or b == 0:
        raise ValueError("the leaf normal V = a xi + b N needs a, b != 0")
    fj = geom.jets0
    t = geom.tables
    comb = t.A_V(a, b)[1:, 1:]
    dV = fj.dxi * a + fj.dN * b                         # (m, n+2)
    direct = -np.asarray(fj.frame.screen_coords(dV).value)[1:].T
    return ShapeOperatorV(combination=comb, weingarten=direct,
                          residual=float(np.max(np.abs(comb - direct))))


NormalField = Callable[[FrameJets], tuple]


def constant_normal(a: float, b: float) -> NormalField:
    return lambda fr: (a, b)


def normal_vector(fr: FrameJets, field: NormalField) -> DiffScalar:
    a, b = field(fr)
    return fr.xi * a + fr.N * b


def normal_projection(fr: FrameJets, w):
    """g(w, N) xi + g(w, xi) N for w of shape (..., n+2)."""
    dim = fr.xi.shape[0]
    lead = w.shape[:-1]
    alpha = minkowski_inner(w, fr.N).reshape(lead + (1,))
    beta = minkowski_inner(w, fr.xi).reshape(lead + (1,))
    return alpha * fr.xi.reshape((1,) * len(lead) + (dim,)) + \
        beta * fr.N.reshape((1,) * len(lead) + (dim,))


def nabla_perp_jets(fj: FormJets, field: NormalField) -> DiffScalar:
    """grad-perp along every chart direction, at fj's depth: shape (m, n+2)."""
    V = normal_vector(fj.outer, field)
    return normal_projection(fj.frame, V.inner_partials())


def normal_connection(geom: PointGeometry, field: NormalField, X) -> np.ndarray:
    """Normal-bundle derivative of the leaf normal field along X (ambient vector)."""
    x = _vec(geom.tables, X)
    D = np.asarray(nabla_perp_jets(geom.jets0, field).value)
    return x @ D


# -- structure equation residuals -----------------------------------------------------

def gauss_weingarten_residuals(geom: PointGeometry, N_override=None) -> dict:
    """Max residuals of the structure equations at one point.

    ``N_override`` replaces the transversal by a given ambient vector (used to
    show that a corrupted N is flagged).
    """
    fj = geom.jets0
    val = lambda x: np.asarray(x.value, dtype=float)
    T, xi, N = val(fj.frame.T), val(fj.frame.xi), val(fj.frame.N)
    if N_override is not None:
        N = np.asarray(N_override, dtype=float)
    W = T[1:]
    gss_inv = np.linalg.inv(T[1:] @ np.diag(np.r_[-1.0, np.ones(T.shape[1] - 1)]) @ T[1:].T)
    dT, dxi, dN = val(fj.dT), val(fj.dxi), val(fj.dN)
    tab = geom.tables
    g = minkowski_inner

    def split(v):
        # v = alpha xi + beta^a W_a + nu N, reading coefficients off the dual pairing
        alpha = g(v, N)
        beta = g(v[..., None, :], W) @ gss_inv
        nu = g(v, xi)
        return alpha, beta, nu

    def recompose(alpha, beta, nu):
        return alpha[..., None] * xi + beta @ W + nu[..., None] * N

    res = {}
    B = g(dT, xi)
    # (1) dbar_X Y = nabla_X Y + B(X,Y) N with nabla_X Y tangent
    al, be, nu = split(dT)
    nabla_XY = al[..., None] * xi + be @ W
    res["gauss"] = np.max(np.abs(dT - nabla_XY - B[..., None] * N))
    res["gauss_decomp"] = np.max(np.abs(dT - recompose(al, be, nu)))
    # (2) dbar_X N = -A_N X + tau(X) N
    tau = g(dN, xi)
    AN_X = (tab.AN[1:].T) @ W
    res["weingarten_N"] = np.max(np.abs(dN - (-AN_X + tau[:, None] * N)))
    # (3) nabla_X PY = nabla*_X PY + C(X,PY) xi, PY = W_a
    dW = dT[:, 1:]
    nabla_XW = dW - g(dW, xi)[..., None] * N
    alW, beW, _ = split(dW)
    Cxa = g(dW, N)
    res["screen_gauss"] = np.max(np.abs(nabla_XW - (beW @ W + Cxa[..., None] * xi)))
    res["C_table"] = np.max(np.abs(Cxa.T - tab.C))
    # (4) nabla_X xi = -A*X - tau(X) xi, and A* xi = 0
    BX_xi = g(dxi, xi)
    nabla_Xxi = dxi - BX_xi[:, None] * N
    Astar_X = (tab.Astar[1:].T) @ W
    res["weingarten_xi"] = np.max(np.abs(nabla_Xxi - (-Astar_X - tau[:, None] * xi)))
    res["Astar_xi"] = np.max(np.abs(tab.Astar @ tab.xi_coeffs))
    res["AN_xi_slot"] = np.max(np.abs(tab.AN[0]))
    res["B_radical"] = np.max(np.abs(tab.B @ tab.xi_coeffs))
    # shape operators vs forms
    G = tab.gram
    res["Astar_B"] = np.max(np.abs((tab.Astar.T @ G) - tab.B))
    res["AN_C"] = np.max(np.abs((tab.AN.T @ G)[:, 1:].T - tab.C))
    # leaf Gauss formula: dbar_X Y = nabla*_X Y + C(X,Y) xi + B(X,Y) N on the screen
    dWW = dT[1:, 1:]
    alL, beL, nuL = split(dWW)
    res["leaf_gauss"] = np.max(np.abs(dWW - (beL @ W + tab.C[:, 1:].T[..., None] * xi
                                             + tab.B[1:, 1:][..., None] * N)))
    # leaf Weingarten for V = xi, N: dbar_X V = -A_V X + nabla-perp_X V
    for name, dV, Vop in (("xi", dxi, tab.Astar), ("N", dN, tab.AN)):
        perp = g(dV[1:], N)[:, None] * xi + g(dV[1:], xi)[:, None] * N
        res[f"leaf_weingarten_{name}"] = np.max(np.abs(dV[1:] - (-(Vop[1:, 1:].T @ W) + perp)))
    # non-metricity: (nabla_X g)(Y,Z) = B(X,Y) eta(Z) + B(X,Z) eta(Y)
    eta = g(T, N)
    dG = val(fj.outer.gram.inner_partials())      # d_i g(T_j, T_k), Gram differentiated directly
    G3 = g(nabla_XY[:, :, None, :], T[None, None, :, :])   # g(nabla_i T_j, T_k)
    nm = dG - G3 - np.swapaxes(G3, 1, 2)
    expect = B[:, :, None] * eta[None, None, :] + B[:, None, :] * eta[None, :, None]
    res["nonmetricity"] = np.max(np.abs(nm - expect))
    # frame axioms
    res["frame_N"] = max(abs(g(N, xi) - 1.0), abs(g(N, N)), np.max(np.abs(g(W, N))))
    return {k: float(v) for k, v in res.items()}
