"""Verification suites: each checks one family of identities over a chart grid.

A suite returns a :class:`SuiteResult` with the worst residual seen and the
tolerance it was held to.  Suites that do not apply to a surface (no closed
forms, no sphere-contained leaves) report ``applicable=False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jetcalc as jc
from .catalog import CatalogEntry
from .classify import (DEFAULT_VERDICT_TOL, minimality_transfer, screen_conformality,
                       screen_umbilicity, sphere_containment, theorem2_audit, umbilicity,
                       mean_curvature_H)
from .curvature import (commutator_remark, corollary_equivalence, covariant_derivative_Rperp,
                        dtau, normal_curvature_samples)
from .fdoracle import FDConfig, fd_directional
from .forms import (FormTables, PointGeometry, form_jets,
                    gauss_weingarten_residuals, nabla_perp_jets, shape_operator_V)
from .nullframe import DEFAULT_FRAME_TOL, Grid, validate_chart

SEED = 20240611


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tol: float
    npoints: int = 0
    applicable: bool = True
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "applicable": self.applicable, "passed": self.passed,
                "worst": self.worst, "tol": self.tol, "npoints": self.npoints,
                "details": self.details}


class Context:
    """Chart, grid and a per-point geometry cache shared between suites."""

    def __init__(self, entry: CatalogEntry, grid: Grid):
        self.entry = entry
        self.chart = entry.chart
        self.grid = grid
        self._geoms: dict = {}

    def geometries(self):
        for idx, p in self.grid.indexed_points():
            if idx not in self._geoms:
                self._geoms[idx] = PointGeometry(self.chart, p)
            yield idx, self._geoms[idx]

    def leaves(self):
        lo, hi = self.grid.ranges[0]
        return [t for t in self.entry.leaves if lo - 1e-12 <= t <= hi + 1e-12]


def _result(name, worst, tol, npoints, **details):
    worst = float(worst)
    return SuiteResult(name, bool(worst < tol), worst, tol, npoints, details=details)


def _skip(name, tol, why):
    return SuiteResult(name, True, 0.0, tol, 0, applicable=False, details={"reason": why})


def suite_frame(ctx: Context, tol: float = DEFAULT_FRAME_TOL) -> SuiteResult:
    rep = validate_chart(ctx.chart, ctx.grid, tol)
    worst = max(rep.worst.values()) if rep.worst else 0.0
    return _result("frame", worst, tol, rep.npoints, residuals=rep.worst)


def suite_gauss_weingarten(ctx: Context, tol: float = 1e-9) -> SuiteResult:
    worst: dict = {}
    n = 0
    for _, g in ctx.geometries():
        n += 1
        for k, v in gauss_weingarten_residuals(g).items():
            worst[k] = max(worst.get(k, 0.0), v)
    return _result("gauss_weingarten", max(worst.values()), tol, n, residuals=worst)


def _golden_point(g: PointGeometry, entry: CatalogEntry) -> dict:
    t = g.tables
    u = g.p[0]
    exp = entry.expected
    P = np.eye(t.n + 1) - np.outer(t.xi_coeffs, t.eta)
    out = {
        "Astar_minus_P": np.max(np.abs(t.Astar + P)),
        "tau_minus_eta": np.max(np.abs(t.tau + t.eta)),
        "C_closed_form": np.max(np.abs(t.C + t.gram[1:] / (2 * u * u))),
        "AN_xi": np.max(np.abs(t.AN @ t.xi_coeffs)),
        "dtau": np.max(np.abs(dtau(g))),
    }
    lam = exp["lambda"](g.p)
    a, b = (jc.value_of(c) for c in entry.normal_fields["V1"](g.jets0.frame))
    out["A_V1"] = np.max(np.abs(t.A_V(a, b)[1:, 1:] - lam * np.eye(t.n)))
    for name in ("V1", "V2"):
        nab = np.asarray(nabla_perp_jets(g.jets0, entry.normal_fields[name]).value)[1:]
        out[f"nabla_perp_{name}"] = np.max(np.abs(nab))
    out["rho"] = abs(umbilicity(t).factor - exp["rho"](g.p))
    out["varrho"] = abs(screen_umbilicity(t).factor - exp["varrho"](g.p))
    out["psi"] = abs(screen_conformality(t).factor - exp["psi"](g.p))
    out["H_coeff"] = abs(mean_curvature_H(t).coeff - exp["H_coeff"](g.p))
    return {k: float(v) for k, v in out.items()}


def suite_golden(ctx: Context, tol: float = 1e-9) -> SuiteResult:
    exp = ctx.entry.expected
    if not {"lambda", "rho", "varrho", "psi"} <= set(exp) or "V1" not in ctx.entry.normal_fields:
        if exp.get("rho") is not None and "lambda" not in exp:
            return _zero_forms(ctx, tol)
        return _skip("golden", tol, "no closed forms for this surface")
    worst: dict = {}
    n = 0
    for _, g in ctx.geometries():
        n += 1
        for k, v in _golden_point(g, ctx.entry).items():
            worst[k] = max(worst.get(k, 0.0), v)
    return _result("golden", max(worst.values()), tol, n, residuals=worst)


def _zero_forms(ctx: Context, tol: float) -> SuiteResult:
    # surfaces whose closed forms all vanish (totally geodesic)
    worst = 0.0
    n = 0
    for _, g in ctx.geometries():
        n += 1
        t = g.tables
        worst = max(worst, *(float(np.max(np.abs(M))) for M in (t.B, t.C, t.tau, t.Astar, t.AN)),
                    float(np.max(np.abs(dtau(g)))))
    return _result("golden", worst, tol, n, all_forms_zero=worst < tol)


def suite_lemma(ctx: Context, tol: float = 1e-9, nsamples: int = 20) -> SuiteResult:
    """A_V from the Weingarten formula equals a A* + b A_N for random (a, b)."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    n = 0
    for _, g in ctx.geometries():
        n += 1
        for a, b in rng.uniform(-2.0, 2.0, size=(nsamples, 2)):
            worst = max(worst, shape_operator_V(g, a, b).residual)
    return _result("lemma", worst, tol, n, samples_per_point=nsamples)


def suite_proposition(ctx: Context, tol: float = 1e-8, nsamples: int = 10) -> SuiteResult:
    """Direct R-perp vs the algebraic form, and vs the d tau form (-2 d tau W)."""
    rng = np.random.default_rng(SEED + 1)
    alg = dform = plus = normal = 0.0
    n = 0
    for _, g in ctx.geometries():
        n += 1
        fr = g.frame_data
        normals = [tuple(v) for v in rng.uniform(-2.0, 2.0, size=(nsamples, 2))]
        for s in normal_curvature_samples(g, normals):
            alg = max(alg, s.residual)
            dform = max(dform, float(np.max(np.abs(s.direct - s.dtau_form))))
            plus = max(plus, float(np.max(np.abs(s.direct + s.dtau_form))))
            # screen part of the direct curvature: remove the normal projection
            a_ = float(s.direct @ np.diag(np.r_[-1.0, np.ones(fr.N.size - 1)]) @ fr.N)
            b_ = float(s.direct @ np.diag(np.r_[-1.0, np.ones(fr.N.size - 1)]) @ fr.xi)
            normal = max(normal, float(np.max(np.abs(s.direct - a_ * fr.xi - b_ * fr.N))))
    worst = max(alg, dform, normal)
    return _result("proposition", worst, tol, n, direct_vs_algebraic=alg, direct_vs_dtau=dform,
                   direct_vs_plus_2dtau_W=plus, screen_component=normal)


def suite_corollary(ctx: Context, tol: float = 1e-8) -> SuiteResult:
    """The four flatness conditions agree pointwise; commuting A* and A_N => commuting A_V, A_W."""
    rng = np.random.default_rng(SEED + 2)
    disagree = 0
    remark = 0.0
    counts = [0, 0, 0, 0]
    n = 0
    closest = math.inf   # smallest distance of a residual from the shared tolerance
    for _, g in ctx.geometries():
        n += 1
        eq = corollary_equivalence(g, tol)
        bools = eq.booleans
        counts = [c + int(bv) for c, bv in zip(counts, bools)]
        disagree += not eq.agree
        for v in (eq.dtau, eq.commutator, eq.rperp, eq.parallel):
            if v > 0:
                closest = min(closest, abs(math.log10(v / tol)))
        if bools[1]:
            for a, b in rng.uniform(-2.0, 2.0, size=(5, 2)):
                remark = max(remark, commutator_remark(g.tables, a, b))
    ok = disagree == 0 and remark < tol
    return SuiteResult("corollary", ok, float(disagree) if disagree else remark, tol, n,
                       details={"disagreements": disagree, "true_counts": counts,
                                "remark_commutator": remark,
                                "decades_from_tol": None if closest == math.inf else closest})


def suite_theorem1(ctx: Context, tol: float = 1e-9) -> SuiteResult:
    exp = ctx.entry.expected
    if "V1" not in ctx.entry.normal_fields or "lambda" not in exp:
        return _skip("theorem1", tol, "no sphere-contained leaf family known for this surface")
    worst: dict = {}
    leaves = []
    ok = True
    for t0 in ctx.leaves():
        p0 = np.r_[t0, np.zeros(ctx.chart.dim - 1)]
        lam = exp["lambda"](p0)
        rec = sphere_containment(ctx.chart, t0, ctx.entry.normal_fields["V1"], lam, ctx.grid, tol)
        ok &= rec.preconditions and rec.kind == "sphere"
        res = {
            "center": float(np.max(np.abs(rec.center - exp["center"](p0)))) if rec.center is not None else math.inf,
            "center_deviation": rec.center_deviation,
            "epsilon": abs(rec.epsilon - exp["epsilon"](p0)) if rec.epsilon is not None else math.inf,
            "r2": abs(rec.r2 - exp["r2"](p0)) if rec.r2 is not None else math.inf,
            "quadric": rec.worst_residual if rec.worst_residual is not None else math.inf,
            "follow_on_Astar": rec.umbilic_follow_on.get("Astar_residual", math.inf),
            "follow_on_AN": rec.umbilic_follow_on.get("AN_residual", math.inf),
        }
        for k, v in res.items():
            worst[k] = max(worst.get(k, 0.0), v)
        leaves.append({"t0": t0, "kind": rec.kind, "r2": rec.r2, "epsilon": rec.epsilon,
                       "center": None if rec.center is None else rec.center.tolist()})
    if not leaves:
        return _skip("theorem1", tol, "no catalog leaf inside the grid range")
    worst_v = max(worst.values())
    return SuiteResult("theorem1", bool(ok and worst_v < tol), worst_v, tol, len(leaves),
                       details={"residuals": worst, "leaves": leaves})


def suite_theorem2(ctx: Context, tol: float = DEFAULT_VERDICT_TOL,
                   curvature_tol: float = 1e-7) -> SuiteResult:
    """Implication audit on each leaf plus the trace solve on a synthetic minimal leaf."""
    audits = []
    ok = True
    for t0 in ctx.leaves() or [0.5 * sum(ctx.grid.ranges[0])]:
        au = theorem2_audit(ctx.chart, t0, ctx.grid, tol, curvature_tol)
        ok &= au.implication_ok
        audits.append({"t0": t0, "vacuous": au.vacuous, "hypotheses": au.hypotheses,
                       "conclusions": au.conclusions, "nabla_R": au.residuals["nabla_R"]})
    # synthetic leaf: 2 A* + A_N = 0 with traceless shape operators
    A = np.diag([1.0, -1.0])
    mt = minimality_transfer(FormTables.synthetic(A, -2 * A, A, -2 * A))
    synth = max(abs(mt.trace_Astar), abs(mt.trace_AN))
    worst = synth
    return SuiteResult("theorem2", bool(ok and synth < 1e-12), worst, 1e-12, len(audits),
                       details={"audits": audits, "synthetic_traces": [mt.trace_Astar, mt.trace_AN]})


def suite_nabla_rperp(ctx: Context, tol: float = 1e-7, dtau_tol: float = 1e-8) -> SuiteResult:
    """Normal curvature parallel along a whole sampled leaf forces d tau = 0 there.

    Points are grouped by their leaf (first grid index).  ``worst`` is the
    largest nabla-perp R-perp seen; the suite fails only for a leaf on which
    the curvature is parallel at every sample but d tau is not zero.
    """
    nabla: dict = {}
    dt: dict = {}
    for idx, g in ctx.geometries():
        nR = max(float(np.max(np.abs(covariant_derivative_Rperp(g, V)[1:, 1:, 1:])))
                 for V in ((1.0, 0.0), (0.0, 1.0)))
        nabla[idx[0]] = max(nabla.get(idx[0], 0.0), nR)
        dt[idx[0]] = max(dt.get(idx[0], 0.0), float(np.max(np.abs(dtau(g)[1:, 1:]))))
    parallel = [k for k, v in nabla.items() if v < tol]
    violations = [k for k in parallel if dt[k] >= dtau_tol]
    return SuiteResult("nabla_rperp", not violations, max(nabla.values()), tol, len(ctx.grid),
                       details={"parallel_leaves": len(parallel), "violations": len(violations)})


# -- oracle concordance ------------------------------------------------------------------

def field_components(chart, q) -> jc.DiffScalar:
    """xi, N, tau, B and C stacked into one vector field, evaluated at q."""
    fj = form_jets(chart, q)
    parts = [fj.frame.xi, fj.frame.N, fj.tau, fj.B.reshape(-1), fj.C.reshape(-1)]
    return jc.stack([x for part in parts for x in part])


def _interior_points(chart, count, rng, margin=0.1):
    lo = np.array([d[0] for d in chart.domain])
    hi = np.array([d[1] for d in chart.domain])
    w = hi - lo
    return rng.uniform(lo + margin * w, hi - margin * w, size=(count, chart.dim))


def oracle_concordance(chart, npoints: int = 50, orders=(1, 2), seed: int = SEED + 3,
                       cfg: FDConfig | None = None) -> dict:
    """Worst relative jet-vs-finite-difference disagreement per order.

    Relative to max(1, |field derivative|_inf) along each random direction.
    """
    rng = np.random.default_rng(seed)
    cfg = cfg or FDConfig()
    f = lambda x: np.asarray(field_components(chart, jc.DiffScalar(x)).value)
    worst = {k: 0.0 for k in orders}
    for p in _interior_points(chart, npoints, rng):
        v = rng.normal(size=chart.dim)
        v /= np.linalg.norm(v)
        for k in orders:
            q = jc.lift_point(p, k, directions=v[None])
            jet = np.asarray(field_components(chart, q).derivative(*([1] * k)))
            fd = fd_directional(f, p, v, k, cfg, domain=chart.domain)
            rel = np.max(np.abs(jet - fd)) / max(1.0, float(np.max(np.abs(jet))))
            worst[k] = max(worst[k], float(rel))
    return worst


def suite_oracle(ctx: Context, tol: float = 1e-6, npoints: int = 50) -> SuiteResult:
    worst = oracle_concordance(ctx.chart, npoints)
    return _result("oracle", max(worst.values()), tol, npoints,
                   per_order={str(k): v for k, v in worst.items()})


SUITES = {
    "frame": suite_frame,
    "gauss_weingarten": suite_gauss_weingarten,
    "golden": suite_golden,
    "lemma": suite_lemma,
    "proposition": suite_proposition,
    "corollary": suite_corollary,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "nabla_rperp": suite_nabla_rperp,
    "oracle": suite_oracle,
}


def run_suites(entry: CatalogEntry, grid: Grid, names=("all",)) -> list[SuiteResult]:
    names = list(SUITES) if "all" in names else list(names)
    unknown = [nm for nm in names if nm not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; known: {sorted(SUITES)}")
    ctx = Context(entry, grid)
    return [SUITES[nm](ctx) for nm in names]
