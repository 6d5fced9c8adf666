"""Ambient Minkowski space R^{n+2}_1, timelike coordinate first.

Functions accept plain numpy arrays or batched DiffScalars whose last batch
axis runs over the n+2 ambient components.
"""

from __future__ import annotations

import enum

import numpy as np

from .jetcalc import DiffScalar

DEFAULT_CAUSAL_TOL = 1e-9


class CausalClass(str, enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"
    ZERO = "zero"


def signature(dim: int) -> np.ndarray:
    eta = np.ones(dim)
    eta[0] = -1.0
    return eta


def minkowski_inner(x, y):
    """-x^0 y^0 + sum_a x^a y^a, contracted over the last (ambient) axis.

    Leading axes broadcast, so frames of shape (k, n+2) work directly.
    """
    nx = x.shape[-1] if isinstance(x, DiffScalar) else np.shape(x)[-1]
    ny = y.shape[-1] if isinstance(y, DiffScalar) else np.shape(y)[-1]
    if nx != ny:
        raise ValueError(f"length mismatch: {nx} vs {ny}")
    eta = signature(nx)
    if not isinstance(x, DiffScalar) and not isinstance(y, DiffScalar):
        return (np.asarray(x, dtype=float) * np.asarray(y, dtype=float) * eta).sum(axis=-1)
    prod = x * y if isinstance(x, DiffScalar) else y * x
    return (prod * eta).sum(axis=-1)


def causal_character(v, tol: float = DEFAULT_CAUSAL_TOL) -> CausalClass:
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.asarray(v, dtype=float)
    e2 = float(v @ v)
    if np.sqrt(e2) <= tol:
        return CausalClass.ZERO
    q = float(minkowski_inner(v, v))
    if abs(q) <= tol * max(1.0, e2):
        return CausalClass.NULL
    return CausalClass.SPACELIKE if q > 0 else CausalClass.TIMELIKE


def quadric_residual(x, center, kind: str, r2: float) -> float:
    """g(x - c, x - c) - sigma r2, with sigma = +1 (sphere) or -1 (hyperbolic)."""
    if r2 <= 0:
        raise ValueError("r2 must be positive")
    sigma = {"sphere": 1.0, "hyperbolic": -1.0}.get(kind)
    if sigma is None:
        raise ValueError(f"unknown quadric kind {kind!r}")
    d = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
    return float(minkowski_inner(d, d) - sigma * r2)
