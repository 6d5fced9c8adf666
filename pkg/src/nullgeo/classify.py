"""Classification predicates and audits of the containment and minimality theorems.

Symmetric forms on the screen are compared through the screen Gram matrix G:
``<S, T> = tr(G^-1 S G^-1 T)``, so least-squares factors such as rho in
``B ~ rho g`` do not depend on the chart basis.  Residuals are sup norms of
the screen block divided by the sup norm of G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jetcalc as jc
from .curvature import (DEFAULT_EQ_TOL, covariant_derivative_Rperp, dtau, first_normal_space,
                        _screen_pairs)
from .forms import (FormTables, PointGeometry, constant_normal, nabla_perp_jets)
from .minkowski import minkowski_inner, quadric_residual
from .nullframe import Grid, NullChart

DEFAULT_VERDICT_TOL = 1e-8


def _gram_inner(G_inv, S, T) -> float:
    return float(np.trace(G_inv @ S @ G_inv @ T))


def _sym(M):
    return 0.5 * (M + M.T)


@dataclass
class Proportionality:
    """Least-squares factor of ``form ~ factor * reference`` and its residual."""

    factor: float | None
    residual: float
    tol: float

    @property
    def verdict(self) -> bool:
        return self.factor is not None and self.residual < self.tol


def _proportional(S, R, G, tol) -> Proportionality:
    G_inv = np.linalg.inv(G)
    scale = float(np.max(np.abs(G)))
    rr = _gram_inner(G_inv, R, R)
    if rr <= (tol * scale) ** 2:
        return Proportionality(None, math.inf, tol)
    k = _gram_inner(G_inv, S, R) / rr
    return Proportionality(k, float(np.max(np.abs(S - k * R))) / scale, tol)


def _screen_B(t: FormTables):
    return _sym(t.screen_block("B"))


def _screen_C(t: FormTables):
    # C[a, i] = C(T_i, W_a); the screen block is symmetric for integrable screens
    return _sym(t.screen_block("C").T)


def umbilicity(t: FormTables, tol: float = DEFAULT_VERDICT_TOL) -> Proportionality:
    """B = rho g on the screen."""
    return _proportional(_screen_B(t), t.gss, t.gss, tol)


def screen_umbilicity(t: FormTables, tol: float = DEFAULT_VERDICT_TOL) -> Proportionality:
    """C = varrho g on the screen."""
    return _proportional(_screen_C(t), t.gss, t.gss, tol)


def screen_conformality(t: FormTables, tol: float = DEFAULT_VERDICT_TOL) -> Proportionality:
    """C = psi B; ``factor`` is None when B vanishes on the screen."""
    return _proportional(_screen_C(t), _screen_B(t), t.gss, tol)


@dataclass
class MeanCurvature:
    coeff: float          # (1/n) trace of A* on the screen
    trace_Astar: float
    trace_AN: float
    tol: float

    @property
    def minimal(self) -> bool:
        return abs(self.trace_Astar) < self.tol


def mean_curvature_H(t: FormTables, tol: float = DEFAULT_VERDICT_TOL) -> MeanCurvature:
    trA = float(np.trace(t.screen_block("Astar")))
    trN = float(np.trace(t.screen_block("AN")))
    return MeanCurvature(coeff=trA / t.n, trace_Astar=trA, trace_AN=trN, tol=tol)


# -- leaf normal basis and mean curvature ----------------------------------------------

def normal_pair(t: FormTables, tol: float = DEFAULT_EQ_TOL) -> tuple[float, float]:
    """(a, b) with V = a xi + b N spanning the first normal space, 2ab = 1, a < 0.

    W = a xi - b N completes the orthonormal pair.  When the first normal
    space is a timelike line it is spanned by W instead.  If it is not a
    non-null line, a = b = -1/sqrt(2) is used.
    """
    Q = first_normal_space(t, tol).Q
    if Q.shape[0] == 1:
        qa, qb = Q[0]
        if abs(qa * qb) > tol:
            if qa * qb < 0:
                qb = -qb
            s = 1.0 / math.sqrt(2.0 * qa * qb)
            a, b = qa * s, qb * s
            if a > 0:
                a, b = -a, -b
            return float(a), float(b)
    r = -1.0 / math.sqrt(2.0)
    return r, r


@dataclass
class LeafMeanCurvature:
    a: float
    b: float
    trace_V: float
    trace_W: float
    half: np.ndarray          # 1/2 [(tr A_V) V + (tr A_W) W], ambient
    conventional: np.ndarray  # (1/n)(tr A_N xi + tr A* N), ambient
    tol: float

    @property
    def minimal(self) -> bool:
        return abs(self.trace_V) < self.tol and abs(self.trace_W) < self.tol


def leaf_mean_curvature(geom: PointGeometry, tol: float = DEFAULT_VERDICT_TOL) -> LeafMeanCurvature:
    t = geom.tables
    fr = geom.frame_data
    a, b = normal_pair(t)
    trV = float(np.trace(t.A_V(a, b)[1:, 1:]))
    trW = float(np.trace(t.A_V(a, -b)[1:, 1:]))
    V = a * fr.xi + b * fr.N
    W = a * fr.xi - b * fr.N
    mc = mean_curvature_H(t)
    conv = (mc.trace_AN * fr.xi + mc.trace_Astar * fr.N) / t.n
    return LeafMeanCurvature(a=a, b=b, trace_V=trV, trace_W=trW,
                             half=0.5 * (trV * V + trW * W), conventional=conv, tol=tol)


@dataclass
class PseudoUmbilic:
    a: float | None      # g(H, N): xi coefficient of the mean curvature vector
    b: float | None      # g(H, xi): N coefficient
    residual: float
    tol: float

    @property
    def defined(self) -> bool:
        return self.a is not None

    @property
    def verdict(self) -> bool:
        return self.defined and self.residual < self.tol


def pseudo_umbilic_check(geom: PointGeometry, tol: float = DEFAULT_VERDICT_TOL) -> PseudoUmbilic:
    """Check C = a g and B = b g with H = a xi + b N the leaf mean curvature vector."""
    t = geom.tables
    fr = geom.frame_data
    H = leaf_mean_curvature(geom, tol).conventional
    a, b = minkowski_inner(H, fr.N), minkowski_inner(H, fr.xi)
    return pseudo_umbilic_from_tables(t, a, b, tol)


def pseudo_umbilic_from_tables(t: FormTables, a: float, b: float,
                               tol: float = DEFAULT_VERDICT_TOL) -> PseudoUmbilic:
    G = t.gss
    scale = float(np.max(np.abs(G)))
    if max(abs(a), abs(b)) < tol:
        return PseudoUmbilic(None, None, math.inf, tol)
    res = max(np.max(np.abs(_screen_B(t) - b * G)), np.max(np.abs(_screen_C(t) - a * G))) / scale
    return PseudoUmbilic(float(a), float(b), float(res), tol)


# -- containment in a pseudo-sphere ------------------------------------------------------

def _coeff_field(V):
    if callable(V):
        return V
    a, b = V
    return constant_normal(float(a), float(b))


@dataclass
class ContainmentRecord:
    t0: float
    lam: float
    preconditions: bool
    shape_residual: float          # max |A_V - lam I|
    dtau_residual: float           # max |d tau| over screen pairs
    parallel_residual: float       # max |nabla-perp V|
    center: np.ndarray | None
    center_deviation: float
    epsilon: float | None
    kind: str | None
    r2: float | None
    worst_residual: float | None
    umbilic_follow_on: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)
    tol: float = DEFAULT_VERDICT_TOL

    @property
    def contained(self) -> bool:
        return (self.preconditions and self.kind is not None
                and self.center_deviation < self.tol and self.worst_residual < self.tol)


def sphere_containment(chart: NullChart, t0: float, V, lam: float, grid: Grid,
                       tol: float = DEFAULT_VERDICT_TOL) -> ContainmentRecord:
    """Check that the leaf t = t0 lies in a pseudo-sphere centred at f + V / lam.

    ``V`` is (a, b) or a field frame -> (a, b).  The hypotheses A_V = lam I
    and d tau = 0 are verified at every grid point first; if they fail, or
    lam = 0, nothing is asserted.
    """
    fieldV = _coeff_field(V)
    leaf = grid.leaf(t0)
    leaf.check(chart)
    msgs = []
    shape_res = dtau_res = par_res = 0.0
    centers, eps, positions, coeffs = [], [], [], []
    tables = []
    for p in leaf.points():
        geom = PointGeometry(chart, p)
        t = geom.tables
        fr = geom.frame_data
        a, b = (jc.value_of(c) for c in fieldV(geom.jets0.frame))
        coeffs.append((a, b))
        tables.append(t)
        AV = t.A_V(a, b)[1:, 1:]
        shape_res = max(shape_res, float(np.max(np.abs(AV - lam * np.eye(t.n)))))
        D = dtau(geom)
        dtau_res = max(dtau_res, max((abs(D[i, j]) for i, j in _screen_pairs(t.n)), default=0.0))
        nab = np.asarray(nabla_perp_jets(geom.jets0, fieldV).value)[1:]
        par_res = max(par_res, float(np.max(np.abs(nab))))
        Vvec = a * fr.xi + b * fr.N
        positions.append(fr.position)
        eps.append(minkowski_inner(Vvec, Vvec))
        if lam != 0:
            centers.append(fr.position + Vvec / lam)
    ok = True
    if lam == 0:
        msgs.append("lambda = 0: the shape operator hypothesis needs lambda != 0")
        ok = False
    if shape_res >= tol:
        msgs.append(f"A_V is not lambda I (residual {shape_res:.3e})")
        ok = False
    if dtau_res >= tol:
        msgs.append(f"d tau does not vanish on the screen (max {dtau_res:.3e})")
        ok = False
    rec = ContainmentRecord(t0=float(t0), lam=float(lam), preconditions=ok, shape_residual=shape_res,
                            dtau_residual=dtau_res, parallel_residual=par_res, center=None,
                            center_deviation=math.inf, epsilon=None, kind=None, r2=None,
                            worst_residual=None, messages=msgs, tol=tol)
    if not ok:
        return rec
    C = np.array(centers)
    center = C.mean(axis=0)
    rec.center = center
    rec.center_deviation = float(np.max(np.abs(C - center)))
    epsilon = float(np.mean(eps))
    rec.epsilon = epsilon
    if abs(epsilon) < tol:
        rec.messages.append("g(V, V) = 0: null normal, no pseudo-sphere")
        return rec
    rec.kind = "sphere" if epsilon > 0 else "hyperbolic"
    rec.r2 = abs(epsilon) / lam ** 2
    rec.worst_residual = max(quadric_residual(x, center, rec.kind, rec.r2) for x in positions)
    rec.umbilic_follow_on = _follow_on(tables, coeffs, lam, tol)
    return rec


def _follow_on(tables, coeffs, lam, tol) -> dict:
    """With A_W = 0 as well: A* = lam/(2a) I and A_N = lam/(2b) I."""
    w_res = star_res = n_res = 0.0
    for t, (a, b) in zip(tables, coeffs):
        I = np.eye(t.n)
        w_res = max(w_res, float(np.max(np.abs(t.A_V(a, -b)[1:, 1:]))))
        star_res = max(star_res, float(np.max(np.abs(t.screen_block("Astar") - lam / (2 * a) * I))))
        n_res = max(n_res, float(np.max(np.abs(t.screen_block("AN") - lam / (2 * b) * I))))
    out = {"A_W_zero": w_res < tol, "A_W_residual": w_res}
    if w_res < tol:
        out.update(Astar_residual=star_res, AN_residual=n_res,
                   umbilic=all(umbilicity(t, tol).verdict for t in tables),
                   screen_umbilic=all(screen_umbilicity(t, tol).verdict for t in tables))
    return out


# -- minimal leaves ------------------------------------------------------------------------

def solve_trace_equations(a: float, b: float, trace_P: float, trace_Q: float) -> tuple[float, float]:
    """Solve a tr A* + b tr A_N = trace_P and a tr A* - b tr A_N = trace_Q."""
    if a == 0 or b == 0:
        raise ValueError("the trace system is singular when a or b vanishes")
    x = np.linalg.solve(np.array([[a, b], [a, -b]], dtype=float), np.array([trace_P, trace_Q]))
    return float(x[0]), float(x[1])


@dataclass
class MinimalityTransfer:
    vanishing: tuple | None     # (a, b) with a A* + b A_N = 0
    trace_Astar: float | None
    trace_AN: float | None
    leaf_minimal: bool


def minimality_transfer(t: FormTables, tol: float = DEFAULT_EQ_TOL) -> MinimalityTransfer:
    """Solve for the traces from a vanishing shape operator and leaf minimality."""
    fns = first_normal_space(t, tol)
    lm_traces = (float(np.trace(t.screen_block("Astar"))), float(np.trace(t.screen_block("AN"))))
    minimal = max(abs(v) for v in lm_traces) < tol
    if fns.vanishing.shape[0] != 1:
        return MinimalityTransfer(None, None, None, minimal)
    a, b = fns.vanishing[0]
    if abs(a) < tol or abs(b) < tol:
        return MinimalityTransfer((float(a), float(b)), None, None, minimal)
    trP = float(np.trace(t.A_V(a, b)[1:, 1:]))
    trQ = float(np.trace(t.A_V(a, -b)[1:, 1:]))
    trA, trN = solve_trace_equations(a, b, trP, trQ)
    return MinimalityTransfer((float(a), float(b)), trA, trN, minimal)


def _vanishing_jets(fj):
    """Coefficients (a, b) of the vanishing-shape-operator direction, as jets."""
    A = fj.Astar[1:][:, 1:]
    N = fj.AN[1:][:, 1:]
    AA, NN, AN_ = (A * A).sum(), (N * N).sum(), (A * N).sum()
    if AA.value >= NN.value:
        return -AN_ / AA, jc.as_diff(1.0, AA)
    return jc.as_diff(1.0, NN), -AN_ / NN


def subbundle_parallel_residual(geom: PointGeometry) -> tuple[float, float]:
    """How far nabla-perp moves P (vanishing shape operators) and Q = P-perp out of themselves."""
    fj1 = geom.jets1
    a, b = _vanishing_jets(fj1)
    fr = geom.jets0.frame
    xi, N = np.asarray(fr.xi.value), np.asarray(fr.N.value)
    a0, b0 = a.value, b.value
    da = np.array([a.derivative(j + 1) for j in range(geom.chart.dim)])
    db = np.array([b.derivative(j + 1) for j in range(geom.chart.dim)])
    nxi = np.asarray(nabla_perp_jets(geom.jets0, constant_normal(1.0, 0.0)).value)
    nN = np.asarray(nabla_perp_jets(geom.jets0, constant_normal(0.0, 1.0)).value)
    VP = a0 * xi + b0 * N
    VQ = a0 * xi - b0 * N
    scale = math.hypot(a0, b0) ** 2
    resP = resQ = 0.0
    for k in range(1, geom.chart.dim):
        dP = da[k] * xi + db[k] * N + a0 * nxi[k] + b0 * nN[k]
        dQ = da[k] * xi - db[k] * N + a0 * nxi[k] - b0 * nN[k]
        resP = max(resP, abs(minkowski_inner(dP, VQ)) / scale)
        resQ = max(resQ, abs(minkowski_inner(dQ, VP)) / scale)
    return float(resP), float(resQ)


@dataclass
class Theorem2Audit:
    hypotheses: dict
    conclusions: dict
    residuals: dict
    tol: float

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def vacuous(self) -> bool:
        return not self.hypotheses_hold

    @property
    def implication_ok(self) -> bool:
        return self.vacuous or all(self.conclusions.values())


def theorem2_audit(chart: NullChart, t0: float, grid: Grid, tol: float = DEFAULT_VERDICT_TOL,
                   curvature_tol: float = 1e-7) -> Theorem2Audit:
    """Minimal non-geodesic leaf with parallel normal curvature => M minimal.

    Hypotheses: the leaf is minimal, some A_V is nonzero, and
    nabla-perp R-perp = 0.  Conclusions: tr A* = tr A_N = 0 and the
    subbundles P, Q are parallel.  Conclusions are only required when every
    hypothesis holds.
    """
    leaf = grid.leaf(t0)
    leaf.check(chart)
    r = dict(leaf_trace=0.0, shape_norm=0.0, nabla_R=0.0, trace_Astar=0.0, trace_AN=0.0,
             P_parallel=0.0, Q_parallel=0.0)
    q_dims = set()
    for p in leaf.points():
        geom = PointGeometry(chart, p)
        t = geom.tables
        lm = leaf_mean_curvature(geom, tol)
        r["leaf_trace"] = max(r["leaf_trace"], abs(lm.trace_V), abs(lm.trace_W))
        r["shape_norm"] = max(r["shape_norm"], float(np.max(np.abs(t.screen_block("Astar")))),
                              float(np.max(np.abs(t.screen_block("AN")))))
        nR = max(float(np.max(np.abs(covariant_derivative_Rperp(geom, V))))
                 for V in ((1.0, 0.0), (0.0, 1.0)))
        r["nabla_R"] = max(r["nabla_R"], nR)
        r["trace_Astar"] = max(r["trace_Astar"], abs(lm.trace_V + lm.trace_W) / abs(2 * lm.a))
        r["trace_AN"] = max(r["trace_AN"], abs(lm.trace_V - lm.trace_W) / abs(2 * lm.b))
        dimQ = first_normal_space(t).dim
        q_dims.add(dimQ)
        if dimQ == 1:
            rp, rq = subbundle_parallel_residual(geom)
            r["P_parallel"] = max(r["P_parallel"], rp)
            r["Q_parallel"] = max(r["Q_parallel"], rq)
    hyp = {"leaf_minimal": r["leaf_trace"] < tol,
           "not_totally_geodesic": r["shape_norm"] >= tol,
           "normal_curvature_parallel": r["nabla_R"] < curvature_tol}
    concl = {"trace_Astar_zero": r["trace_Astar"] < tol,
             "trace_AN_zero": r["trace_AN"] < tol,
             "P_Q_parallel": q_dims == {1} and r["P_parallel"] < tol and r["Q_parallel"] < tol}
    return Theorem2Audit(hypotheses=hyp, conclusions=concl, residuals=r, tol=tol)


# -- quasi-screen conformal proxy -------------------------------------------------------------

@dataclass
class QuasiScreenConformal:
    a: float
    b: float
    lam: float
    residual: float
    tol: float

    @property
    def verdict(self) -> bool:
        return self.residual < self.tol and self.lam != 0 and (self.a != 0 or self.b != 0)


def quasi_screen_conformal_proxy(tables: list[FormTables],
                                 tol: float = DEFAULT_VERDICT_TOL) -> QuasiScreenConformal:
    """Constants (a, b, lam), lam != 0, with a A* + b A_N = lam I at every given point.

    Normalised so that lam = 1 when possible; ``residual`` is the smallest
    singular value of the stacked linear system (relative to the largest).
    """
    rows = []
    for t in tables:
        rows.append(np.column_stack([t.screen_block("Astar").ravel(), t.screen_block("AN").ravel(),
                                     -np.eye(t.n).ravel()]))
    M = np.vstack(rows)
    _, s, vt = np.linalg.svd(M)
    v = vt[-1]
    res = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    if abs(v[2]) > tol:
        v = v / v[2]
    else:
        v = np.r_[v[:2], 0.0]
    return QuasiScreenConformal(a=float(v[0]), b=float(v[1]), lam=float(v[2]), residual=res, tol=tol)


# -- per-point report ---------------------------------------------------------------------------

def _opt(x):
    return None if x is None else float(x)


def classify_point(geom: PointGeometry, tol: float = DEFAULT_VERDICT_TOL) -> dict:
    """Flat record of the per-point classification quantities."""
    t = geom.tables
    um, su, sc = umbilicity(t, tol), screen_umbilicity(t, tol), screen_conformality(t, tol)
    mc = mean_curvature_H(t, tol)
    lm = leaf_mean_curvature(geom, tol)
    pu = pseudo_umbilic_check(geom, tol)
    return {
        "rho": _opt(um.factor), "rho_residual": um.residual, "umbilic": um.verdict,
        "totally_geodesic": um.verdict and abs(um.factor) < tol,
        "varrho": _opt(su.factor), "varrho_residual": su.residual, "screen_umbilic": su.verdict,
        "psi": _opt(sc.factor), "psi_residual": sc.residual if sc.factor is not None else None,
        "screen_conformal": sc.verdict,
        "H_coeff": mc.coeff, "trace_Astar": mc.trace_Astar, "trace_AN": mc.trace_AN,
        "minimal": mc.minimal,
        "leaf_H_half": lm.half.tolist(), "leaf_H": lm.conventional.tolist(),
        "leaf_minimal": lm.minimal,
        "pseudo_umbilic": pu.verdict if pu.defined else None,
        "pseudo_umbilic_residual": pu.residual if pu.defined else None,
        "tol": tol,
    }


@dataclass
class ClassificationReport:
    chart: str
    per_point: list
    per_leaf: list
    verdicts: dict
    tol: float


def classify_chart(chart: NullChart, grid: Grid, tol: float = DEFAULT_VERDICT_TOL,
                   leaves=(), normal=None, lam=None) -> ClassificationReport:
    """Classify every grid point; optionally run containment on the given leaves.

    ``lam`` is a function of the leaf parameter giving the eigenvalue of A_V.
    """
    per_point = []
    for idx, p in grid.indexed_points():
        rec = {"index": list(idx), "p": p.tolist()}
        rec.update(classify_point(PointGeometry(chart, p), tol))
        per_point.append(rec)
    per_leaf = []
    if normal is not None and lam is not None:
        for t0 in leaves:
            per_leaf.append(sphere_containment(chart, t0, normal, lam(t0), grid, tol))
    keys = ("umbilic", "screen_umbilic", "screen_conformal", "minimal", "totally_geodesic")
    verdicts = {k: all(bool(r[k]) for r in per_point) for k in keys}
    return ClassificationReport(chart=chart.name, per_point=per_point, per_leaf=per_leaf,
                                verdicts=verdicts, tol=tol)
