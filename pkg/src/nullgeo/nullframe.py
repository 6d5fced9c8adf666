"""Null hypersurface charts and their pointwise frames.

A chart F(t, s^1..s^n) -> R^{n+2}_1 is adapted when the t-lines carry the
radical direction and the coordinate leaves {t = const} are the screen
leaves.  At every point we build the tangent frame T_i = dF/dx^i, the
degenerate Gram matrix, the radical vector xi, the screen W_a = T_{s^a} and
the transversal N (g(N, xi) = 1, g(N, N) = g(N, W_a) = 0).

The construction in :func:`frame_jets` is written over DiffScalars so that
xi and N can themselves be differentiated by the forms and curvature code.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jetcalc as jc
from .jetcalc import DiffScalar, FieldHandle
from .minkowski import minkowski_inner

# smallest |eigenvalue| below KERNEL_REL_TOL * largest counts as zero; the next
# one must exceed GAP_REL_TOL * largest
KERNEL_REL_TOL = 1e-9
GAP_REL_TOL = 1e-6
ADAPT_TOL = 1e-8
DEFAULT_FRAME_TOL = 1e-10


class ChartError(Exception):
    """Base for chart problems detected while building a frame."""


class ChartDegeneracyError(ChartError):
    """The induced metric does not have exactly one kernel direction."""


class ChartAdaptationError(ChartError):
    """The t-lines are not transverse to the coordinate screen."""


class FrameDegeneracyError(ChartError):
    """The linear system defining the transversal is singular."""


class DomainError(ValueError):
    """A requested point or grid leaves the chart's domain box."""


@dataclass(frozen=True)
class NullChart:
    n: int
    F: FieldHandle
    domain: tuple[tuple[float, float], ...]
    xi_override: FieldHandle | None = None
    name: str = ""
    coord_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("null charts need n >= 2")
        m = self.n + 1
        if self.F.arity != m or self.F.codomain != self.n + 2:
            raise ValueError("chart map must send R^{n+1} to R^{n+2}")
        if len(self.domain) != m:
            raise ValueError("domain box needs one interval per coordinate")
        if self.xi_override is not None and (
                self.xi_override.arity != m or self.xi_override.codomain != self.n + 2):
            raise ValueError("xi override has the wrong signature")
        if not self.coord_names:
            names = ("t",) + tuple(f"s{a}" for a in range(1, self.n + 1))
            object.__setattr__(self, "coord_names", names)

    @property
    def dim(self) -> int:
        return self.n + 1

    def contains(self, p, slack: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(p, self.domain))


@dataclass(frozen=True)
class FrameJets:
    """Frame quantities as DiffScalars at one (possibly lifted) chart point."""

    pos: DiffScalar       # (n+2,)
    T: DiffScalar         # (m, n+2) tangents, t first
    gram: DiffScalar      # (m, m)
    xi: DiffScalar        # (n+2,)
    N: DiffScalar         # (n+2,)
    k: DiffScalar         # (m,) chart components of xi
    eta: DiffScalar       # (m,) g(N, T_i)
    gss_inv: DiffScalar   # (n, n) inverse screen Gram

    @property
    def W(self) -> DiffScalar:
        return self.T[1:]

    def screen_coords(self, v: DiffScalar) -> DiffScalar:
        """Coefficients of v along W_a, read off with the screen metric.

        v has shape (..., n+2); the result has shape (..., n).
        """
        n = self.gss_inv.shape[0]
        lead = v.shape[:-1]
        gw = minkowski_inner(v.reshape(lead + (1, v.shape[-1])), self.W)   # (..., n)
        prod = gw.reshape(lead + (1, n)) * self.gss_inv                    # (..., n, n)
        return prod.sum(axis=-1)

    def map(self, fn) -> "FrameJets":
        return FrameJets(**{k: fn(getattr(self, k)) for k in self.__dataclass_fields__})


def frame_jets(chart: NullChart, q: DiffScalar) -> FrameJets:
    """Build the frame at a lifted point ``q`` (shape (m,)); result has q's depth."""
    n, m = chart.n, chart.n + 1
    Fq = chart.F(jc.extend(q))
    pos = Fq.base()
    T = Fq.inner_partials()
    gram = minkowski_inner(T.reshape(m, 1, n + 2), T.reshape(1, m, n + 2))
    gss = gram[1:, 1:]
    gss_inv = jc.solve(gss, jc.as_diff(np.eye(n), gss))
    if chart.xi_override is not None:
        xi = chart.xi_override(q)
    else:
        ks = -(gss_inv * gram[1:, 0].reshape(1, n)).sum(axis=1)
        k_full = jc.stack([jc.as_diff(1.0, ks[0])] + [ks[a] for a in range(n)])
        xi = (T * k_full.reshape(m, 1)).sum(axis=0)
    N = _transversal_jets(T[1:], xi)
    eta = minkowski_inner(T, N.reshape(1, n + 2))
    # xi = (T_t - beta_t^a W_a) / eta_t
    beta_t = (gss_inv * gram[1:, 0].reshape(1, n)).sum(axis=1)
    k = jc.stack([jc.as_diff(1.0, eta[0])] + [-beta_t[a] for a in range(n)]) / eta[0]
    return FrameJets(pos=pos, T=T, gram=gram, xi=xi, N=N, k=k, eta=eta, gss_inv=gss_inv)


def _transversal_jets(W: DiffScalar, xi: DiffScalar) -> DiffScalar:
    # minimum-norm z with g(z, W_a) = 0 and g(z, xi) = 1, then N = z - g(z,z)/2 xi
    n, dim = W.shape
    eta = np.ones(dim)
    eta[0] = -1.0
    rows = jc.stack([W[a] for a in range(n)] + [xi]) * eta        # (n+1, dim)
    mmt = (rows.reshape(n + 1, 1, dim) * rows.reshape(1, n + 1, dim)).sum(axis=2)
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    try:
        y = jc.solve(mmt, jc.as_diff(rhs, mmt[0]))
    except np.linalg.LinAlgError as exc:
        raise FrameDegeneracyError("transversal system is singular") from exc
    z = (rows * y.reshape(n + 1, 1)).sum(axis=0)
    return z - xi * (minkowski_inner(z, z) * 0.5)


# -- pointwise frames -----------------------------------------------------------

@dataclass
class FrameData:
    p: np.ndarray
    tangents: np.ndarray
    gram: np.ndarray
    xi: np.ndarray
    screen: np.ndarray
    N: np.ndarray
    xi_coeffs: np.ndarray
    position: np.ndarray
    residuals: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.flags.values())


def _as_point(chart: NullChart, p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (chart.dim,):
        raise ValueError(f"point needs {chart.dim} coordinates")
    if not chart.contains(p):
        raise DomainError(f"point {p.tolist()} outside domain of chart {chart.name!r}")
    return p


def tangent_frame(chart: NullChart, p) -> np.ndarray:
    """Rows T_i = dF/dx^i at p, t first."""
    p = _as_point(chart, p)
    return chart.F(jc.extend(DiffScalar(p))).inner_partials().value


def _check_kernel(gram: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(gram)
    order = np.argsort(np.abs(w))
    w, v = w[order], v[:, order]
    big = np.max(np.abs(w))
    if big == 0.0 or abs(w[0]) >= KERNEL_REL_TOL * big or abs(w[1]) <= GAP_REL_TOL * big:
        raise ChartDegeneracyError(
            f"induced metric kernel is not one-dimensional (|eigenvalues| {np.abs(w).tolist()})")
    return v[:, 0]


def induced_gram(chart: NullChart, p) -> np.ndarray:
    T = tangent_frame(chart, p)
    gram = minkowski_inner(T[:, None, :], T[None, :, :])
    _check_kernel(gram)
    return gram


def frame_at(chart: NullChart, p, tol: float = DEFAULT_FRAME_TOL) -> FrameData:
    """Evaluate and validate the frame at a plain point."""
    p = _as_point(chart, p)
    T = tangent_frame(chart, p)
    gram = minkowski_inner(T[:, None, :], T[None, :, :])
    kernel = _check_kernel(gram)
    if abs(kernel[0]) < ADAPT_TOL:
        raise ChartAdaptationError("radical direction has no t-component; t-lines lie in the screen")
    if np.any(np.linalg.eigvalsh(gram[1:, 1:]) <= 0):
        raise ChartAdaptationError("coordinate screen is not Riemannian")
    fj = frame_jets(chart, DiffScalar(p))
    xi, N, W = fj.xi.value, fj.N.value, T[1:]
    res = {
        "radical": float(np.max(np.abs(minkowski_inner(T, xi)))),
        "xi_null": float(abs(minkowski_inner(xi, xi))),
        "N_xi": float(abs(minkowski_inner(N, xi) - 1.0)),
        "N_null": float(abs(minkowski_inner(N, N))),
        "N_screen": float(np.max(np.abs(minkowski_inner(W, N)))),
    }
    return FrameData(p=p, tangents=T, gram=gram, xi=xi, screen=W, N=N,
                     xi_coeffs=fj.k.value, position=fj.pos.value, residuals=res,
                     flags={k: v < tol for k, v in res.items()})


def radical_direction(chart: NullChart, p) -> np.ndarray:
    return frame_at(chart, p).xi


def transversal(chart: NullChart, p) -> np.ndarray:
    return frame_at(chart, p).N


# -- sampling -------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Tensor grid: ``counts[i]`` samples over ``ranges[i]`` (endpoints included)."""

    counts: tuple[int, ...]
    ranges: tuple[tuple[float, float], ...]

    @classmethod
    def over(cls, chart: NullChart, counts: Sequence[int], ranges=None) -> "Grid":
        ranges = tuple(tuple(map(float, r)) for r in (ranges or chart.domain))
        grid = cls(tuple(int(c) for c in counts), ranges)
        grid.check(chart)
        return grid

    def check(self, chart: NullChart):
        if len(self.counts) != chart.dim or len(self.ranges) != chart.dim:
            raise DomainError(f"grid needs {chart.dim} coordinates")
        if any(c < 1 for c in self.counts):
            raise DomainError("grid counts must be positive")
        for (lo, hi), (dlo, dhi) in zip(self.ranges, chart.domain):
            if lo > hi or lo < dlo - 1e-12 or hi > dhi + 1e-12:
                raise DomainError(f"range [{lo}, {hi}] leaves domain [{dlo}, {dhi}]")

    def axis(self, i: int) -> np.ndarray:
        lo, hi = self.ranges[i]
        if self.counts[i] == 1:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, self.counts[i])

    def __len__(self):
        return int(np.prod(self.counts))

    def indexed_points(self):
        axes = [self.axis(i) for i in range(len(self.counts))]
        for idx in itertools.product(*(range(c) for c in self.counts)):
            yield idx, np.array([axes[i][j] for i, j in enumerate(idx)])

    def points(self):
        for _, p in self.indexed_points():
            yield p

    def leaf(self, t0: float) -> "Grid":
        """The same screen sampling on the leaf t = t0."""
        return Grid((1,) + self.counts[1:], ((t0, t0),) + self.ranges[1:])


@dataclass
class ValidityReport:
    chart: str
    npoints: int
    worst: dict
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_chart(chart: NullChart, grid: Grid, tol: float = DEFAULT_FRAME_TOL) -> ValidityReport:
    grid.check(chart)
    worst: dict[str, float] = {}
    failures = []
    for idx, p in grid.indexed_points():
        try:
            fd = frame_at(chart, p, tol)
        except ChartError as exc:
            failures.append({"index": list(idx), "point": p.tolist(),
                             "error": type(exc).__name__, "message": str(exc)})
            continue
        for k, v in fd.residuals.items():
            worst[k] = max(worst.get(k, 0.0), v)
        bad = [k for k, ok in fd.flags.items() if not ok]
        if bad:
            failures.append({"index": list(idx), "point": p.tolist(),
                             "error": "InvariantViolation", "message": ", ".join(bad)})
    return ValidityReport(chart=chart.name, npoints=len(grid), worst=worst, failures=failures)
