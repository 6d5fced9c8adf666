"""Acceptance criteria 1-10, one test each.

Each test logs a single ``criterion NN: PASS|FAIL ...`` line, printed in the
"acceptance criteria" section at the end of the run.
"""

import json
import math
import time

import numpy as np

from nullgeo.catalog import make_null_cone, make_null_hyperplane, make_twisted
from nullgeo.classify import (minimality_transfer, screen_conformality, screen_umbilicity,
                              sphere_containment, theorem2_audit, umbilicity)
from nullgeo.cli import main
from nullgeo.forms import FormTables, PointGeometry
from nullgeo.nullframe import Grid, validate_chart
from nullgeo.suites import Context, SUITES, oracle_concordance

# n = 3 grids are kept small for the heavy suites; the frame check uses 5^4 points
GRIDS = {"cone2": (5, 5, 5), "cone3": (3, 3, 3, 3), "hyperplane2": (5, 5, 5),
         "twisted2": (5, 5, 5)}
MAKERS = {"cone2": lambda: make_null_cone(2), "cone3": lambda: make_null_cone(3),
          "hyperplane2": lambda: make_null_hyperplane(2), "twisted2": lambda: make_twisted(2)}
_CTX: dict = {}


def ctx(name):
    if name not in _CTX:
        entry = MAKERS[name]()
        _CTX[name] = Context(entry, Grid.over(entry.chart, GRIDS[name]))
    return _CTX[name]


def suite(name, which):
    return SUITES[which](ctx(name))


class Check:
    """Collects named sub-checks, then logs one line and asserts."""

    def __init__(self, number, title, log):
        self.number, self.title, self.log = number, title, log
        self.items = []
        self.t0 = time.perf_counter()

    def __call__(self, label, ok, value=None):
        self.items.append((label, bool(ok), value))

    def finish(self):
        failed = [lbl for lbl, ok, _ in self.items if not ok]
        status = "FAIL" if failed else "PASS"
        vals = [v for _, _, v in self.items if isinstance(v, float) and math.isfinite(v)]
        worst = f" worst={max(vals):.2e}" if vals else ""
        extra = f" failed: {', '.join(failed)}" if failed else ""
        self.log(f"criterion {self.number:>2}: {status} {self.title} "
                 f"({len(self.items)} checks{worst}, {time.perf_counter() - self.t0:.1f}s){extra}")
        assert not failed, failed


def test_01_frame_axioms(acceptance_log):
    c = Check(1, "frame axioms", acceptance_log)
    for name, counts in (("cone2", (5, 5, 5)), ("cone3", (5, 5, 5, 5)),
                         ("hyperplane2", (5, 5, 5))):
        chart = ctx(name).chart
        grid = Grid.over(chart, counts)
        rep = validate_chart(chart, grid, 1e-10)
        worst = max(rep.worst.values())
        c(f"{name} {len(grid)} points", rep.npoints >= 125 and not rep.failures and worst < 1e-10,
          worst)
    c.finish()


def test_02_gauss_weingarten(acceptance_log):
    c = Check(2, "Gauss-Weingarten closure and non-metricity", acceptance_log)
    for name in GRIDS:
        r = suite(name, "gauss_weingarten")
        c(name, r.passed and r.worst < 1e-9, r.worst)
        c(f"{name} non-metricity checked", "nonmetricity" in r.details["residuals"])
    c.finish()


def test_03_golden_cone(acceptance_log):
    c = Check(3, "cone golden forms", acceptance_log)
    keys = ("Astar_minus_P", "tau_minus_eta", "C_closed_form", "AN_xi", "A_V1",
            "nabla_perp_V1", "nabla_perp_V2", "dtau")
    for name in ("cone2", "cone3"):
        r = suite(name, "golden")
        res = r.details["residuals"]
        for k in keys:
            c(f"{name} {k}", res[k] < 1e-9, res[k])
    c.finish()


def test_04_lemma(acceptance_log):
    c = Check(4, "shape operator of a normal combination", acceptance_log)
    for name in GRIDS:
        r = suite(name, "lemma")
        c(name, r.passed and r.details["samples_per_point"] == 20 and r.worst < 1e-9, r.worst)
    c.finish()


def test_05_proposition(acceptance_log):
    c = Check(5, "normal curvature, direct vs algebraic and vs 2 d tau W", acceptance_log)
    for name in ("cone2", "cone3", "hyperplane2"):
        d = suite(name, "proposition").details
        c(f"{name} direct-algebraic", d["direct_vs_algebraic"] < 1e-8, d["direct_vs_algebraic"])
        # the criterion as written: direct - 2 d tau W
        c(f"{name} direct-2dtauW", d["direct_vs_plus_2dtau_W"] < 1e-8, d["direct_vs_plus_2dtau_W"])
    c.finish()


def test_05b_proposition_sign_on_twisted(acceptance_log):
    # d tau != 0 here, so the sign of the d tau form is observable
    c = Check("5b", "twisted chart: direct = -2 d tau W, not +2 d tau W", acceptance_log)
    d = suite("twisted2", "proposition").details
    c("direct-algebraic", d["direct_vs_algebraic"] < 1e-8, d["direct_vs_algebraic"])
    c("direct+2dtauW", d["direct_vs_dtau"] < 1e-8, d["direct_vs_dtau"])
    c("direct-2dtauW is large", d["direct_vs_plus_2dtau_W"] > 1e-3)
    c.finish()


def test_06_corollary(acceptance_log):
    c = Check(6, "flat normal bundle equivalences", acceptance_log)
    for name in GRIDS:
        r = suite(name, "corollary")
        c(f"{name} agree", r.passed and r.details["disagreements"] == 0,
          float(r.details["disagreements"]))
    c.finish()


def test_07_sphere_containment(acceptance_log):
    c = Check(7, "cone leaves in pseudo-spheres", acceptance_log)
    e = ctx("cone2").entry
    grid = ctx("cone2").grid
    for u in (1.0, 2.0, 4.0):
        rec = sphere_containment(e.chart, u, e.normal_fields["V1"], 1 / u, grid)
        c(f"u={u} preconditions", rec.preconditions)
        c(f"u={u} center", np.max(np.abs(rec.center - [u, 0, 0, 0])) < 1e-9,
          float(np.max(np.abs(rec.center - [u, 0, 0, 0]))))
        c(f"u={u} center deviation", rec.center_deviation < 1e-9, rec.center_deviation)
        c(f"u={u} epsilon", rec.epsilon == 1)
        c(f"u={u} kind", rec.kind == "sphere")
        c(f"u={u} r2", abs(rec.r2 - u * u) < 1e-9, abs(rec.r2 - u * u))
        c(f"u={u} quadric", rec.worst_residual < 1e-9, rec.worst_residual)
        f = rec.umbilic_follow_on
        c(f"u={u} A_V2 = 0 detected", f["A_W_zero"])
        c(f"u={u} umbilic", f["umbilic"] and f["screen_umbilic"])
        for p in grid.leaf(u).points():
            t = PointGeometry(e.chart, p).tables
            for label, got, want in (("rho", umbilicity(t), -1.0),
                                     ("varrho", screen_umbilicity(t), -1 / (2 * u * u)),
                                     ("psi", screen_conformality(t), 1 / (2 * u * u))):
                c(f"u={u} {label}", got.verdict and abs(got.factor - want) < 1e-9,
                  abs(got.factor - want))
    c.finish()


def test_08_minimal_leaf_audit(acceptance_log):
    c = Check(8, "minimal leaf audit", acceptance_log)
    e = ctx("cone2").entry
    grid = ctx("cone2").grid
    for u in (1.0, 2.0, 4.0):
        au = theorem2_audit(e.chart, u, grid)
        c(f"u={u} minimal-leaf hypothesis fails", not au.hypotheses["leaf_minimal"])
        c(f"u={u} asserts nothing", au.vacuous and au.implication_ok)
        c(f"u={u} nabla R-perp", au.residuals["nabla_R"] < 1e-7, au.residuals["nabla_R"])
    A = np.diag([1.0, -1.0])
    for a, b in ((1.0, 0.5), (-0.25, 2.0)):
        # a A* + b A_N = 0 with a traceless (minimal) leaf
        mt = minimality_transfer(FormTables.synthetic(A, -(a / b) * A, A, -(a / b) * A))
        c(f"synthetic a={a} b={b}", max(abs(mt.trace_Astar), abs(mt.trace_AN)) < 1e-12,
          max(abs(mt.trace_Astar), abs(mt.trace_AN)))
    r = suite("cone2", "nabla_rperp")
    c("cone grid nabla R-perp", r.worst < 1e-7, r.worst)
    c.finish()


def test_09_oracle(acceptance_log):
    c = Check(9, "jets vs finite differences", acceptance_log)
    for name in ("cone2", "cone3", "hyperplane2", "twisted2"):
        worst = oracle_concordance(ctx(name).chart, npoints=50, orders=(1, 2))
        for k, v in worst.items():
            c(f"{name} order {k}", v < 1e-6, v)
    c.finish()


def test_10_determinism(acceptance_log, tmp_path):
    c = Check(10, "byte-identical verify output", acceptance_log)
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        code = main(["verify", "--surface", "cone", "--suite", "all", "--out", str(path)])
        c(f"run {i} exit 0", code == 0)
        outs.append(path.read_bytes())
    c("identical", outs[0] == outs[1])
    doc = json.loads(outs[0])
    c("all suites pass", all(s["passed"] for s in doc["suites"]))
    c.finish()
