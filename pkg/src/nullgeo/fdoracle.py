"""Finite-difference directional derivatives with Richardson extrapolation.

This is the independent check on :mod:`nullgeo.jetcalc`.  It only ever
evaluates the field at plain float points.

Error model: the central stencils below have error ``c_1 h^2 + c_2 h^4 + ...``;
``levels`` rounds of Richardson extrapolation with step ratio 2 remove the
first ``levels - 1`` terms, leaving ``O(h^(2 levels))`` plus rounding noise of
order ``eps / h^order``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# central-difference stencils: offsets (in units of h) and weights
_STENCILS = {
    1: (np.array([-1.0, 1.0]), np.array([-0.5, 0.5])),
    2: (np.array([-1.0, 0.0, 1.0]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([-0.5, 1.0, -1.0, 0.5])),
}
_REACH = {1: 1.0, 2: 1.0, 3: 2.0}
ORDER3_STEP = 1e-2


@dataclass(frozen=True)
class FDConfig:
    h: float = 1e-3
    levels: int = 2
    scale_by_point: bool = True

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step size must be positive")
        if not 1 <= self.levels <= 3:
            raise ValueError("Richardson levels must be 1, 2 or 3")

    def step(self, p, order: int) -> float:
        h = ORDER3_STEP if order == 3 and self.h < ORDER3_STEP else self.h
        if self.scale_by_point:
            h *= max(1.0, float(np.max(np.abs(p))))
        return h


def _stencil(f, p, v, order, h):
    offs, w = _STENCILS[order]
    vals = np.array([np.asarray(f(p + o * h * v), dtype=float) for o in offs])
    return np.tensordot(w, vals, axes=1) / h ** order


def fd_directional(f, p, v, order: int, cfg: FDConfig | None = None, domain=None) -> np.ndarray:
    """``order``-th derivative of ``f`` along ``v`` at ``p``.

    ``f`` takes the point as a 1-d array and returns a scalar or a
    sequence; a :class:`~nullgeo.jetcalc.FieldHandle` works.
    If ``domain`` (a box of (lo, hi) pairs) is given, every stencil point
    must stay inside it.
    """
    cfg = cfg or FDConfig()
    if order not in _STENCILS:
        raise ValueError("order must be 1, 2 or 3")
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    h = cfg.step(p, order)
    if domain is not None:
        reach = _REACH[order] * h * np.abs(v)
        for x, r, (lo, hi) in zip(p, reach, domain):
            if x - r < lo or x + r > hi:
                raise ValueError(f"stencil leaves the domain near {x} (margin {r:.3g} needed)")
    # Richardson table on steps h, h/2, h/4, ...
    rows = [_stencil(f, p, v, order, h / 2 ** k) for k in range(cfg.levels)]
    for j in range(1, cfg.levels):
        fac = 4.0 ** j
        rows = [(fac * rows[k + 1] - rows[k]) / (fac - 1.0) for k in range(len(rows) - 1)]
    out = rows[0]
    return float(out) if np.ndim(out) == 0 else out


def fd_gradient(f, p, cfg: FDConfig | None = None, domain=None) -> np.ndarray:
    """First derivatives along every coordinate axis, stacked on axis 0."""
    p = np.asarray(p, dtype=float)
    eye = np.eye(p.size)
    return np.array([fd_directional(f, p, eye[i], 1, cfg, domain) for i in range(p.size)])
