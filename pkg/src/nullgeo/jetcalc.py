"""Nested forward-mode differentiation on chart domains.

A :class:`DiffScalar` is a nested dual number.  Each nesting level carries its
own set of infinitesimals ``eps_1 .. eps_k`` with ``eps_i * eps_j = 0`` inside
the level, and levels commute with each other.  Seeding the same coordinate
direction at every level makes the coefficient with one infinitesimal taken
from each of ``r`` levels equal to an ``r``-th order mixed partial.

Coefficients live in one numpy array of shape ``batch + levels`` where
``levels[l] = nseeds[l] + 1`` (index 0 is "no infinitesimal at this level").
The level axes are trailing, the outermost level first, so a DiffScalar may
also carry a leading batch shape and act elementwise like a small ndarray.
That is what lets ambient vectors and frame matrices be single objects.

    >>> x = lift(3.0, 0, 1)
    >>> (x * x).derivative(1)
    6.0
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MAX_ORDER",
    "DiffScalar",
    "FieldHandle",
    "lift",
    "lift_point",
    "extend",
    "directional_derivative",
    "as_diff",
    "stack",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "power",
    "solve",
    "value_of",
]

# Highest derivative order a caller may request.  Composite fields (frames,
# forms) add their own internal levels on top of the user's seeds.
MAX_ORDER = 3
_MAX_TOTAL_DEPTH = 6


def _split(c, d):
    """Return (c0, ci): the level-0 slice and the seeded slice of the outer level."""
    tail = (slice(None),) * (d - 1)
    return c[(Ellipsis, 0) + tail], c[(Ellipsis, slice(1, None)) + tail]


def _expand(c, d):
    """Insert a length-1 axis where the outer level of a depth-d array was."""
    return np.expand_dims(c, axis=-d)


def _join(z0, zi, d):
    return np.concatenate([_expand(z0, d), zi], axis=-d)


def _mul(a, b, d):
    if d == 0:
        return a * b
    a0, ai = _split(a, d)
    b0, bi = _split(b, d)
    z0 = _mul(a0, b0, d - 1)
    zi = _mul(_expand(a0, d), bi, d - 1) + _mul(ai, _expand(b0, d), d - 1)
    return _join(z0, zi, d)


def _apply(derivs, a, d, j=0):
    # derivs(x, j) is the j-th derivative of the scalar function at plain x
    if d == 0:
        return derivs(a, j)
    a0, ai = _split(a, d)
    z0 = _apply(derivs, a0, d - 1, j)
    g = _apply(derivs, a0, d - 1, j + 1)
    zi = _mul(_expand(g, d), ai, d - 1)
    return _join(z0, zi, d)


class DiffScalar:
    """Nested dual number (optionally batched) of fixed level structure.

    ``levels`` is the tuple of per-level coefficient counts (seeds + 1);
    its length is the nesting depth.  Depth 0 is an ordinary real.
    """

    __slots__ = ("c", "levels")
    __array_ufunc__ = None

    def __init__(self, c, levels: tuple[int, ...] = ()):
        c = np.asarray(c, dtype=float)
        levels = tuple(int(v) for v in levels)
        if len(levels) > _MAX_TOTAL_DEPTH:
            raise ValueError(f"nesting depth {len(levels)} exceeds {_MAX_TOTAL_DEPTH}")
        if levels and c.shape[c.ndim - len(levels):] != levels:
            raise ValueError(f"coefficient shape {c.shape} does not end with {levels}")
        self.c = c
        self.levels = levels

    # -- structure ---------------------------------------------------------
    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[: self.c.ndim - self.depth]

    @property
    def nseeds(self) -> tuple[int, ...]:
        return tuple(v - 1 for v in self.levels)

    @property
    def value(self):
        v = self.c[(Ellipsis,) + (0,) * self.depth]
        return float(v) if v.ndim == 0 else v

    @property
    def partials(self) -> list["DiffScalar"]:
        """First-order coefficients of the outermost level (depth d-1 each)."""
        if self.depth == 0:
            return []
        _, ci = _split(self.c, self.depth)
        return [DiffScalar(ci[(Ellipsis, i) + (slice(None),) * (self.depth - 1)], self.levels[1:])
                for i in range(self.levels[0] - 1)]

    def derivative(self, *seeds: int):
        """Coefficient picking seed ``seeds[l]`` (1-based, 0 = none) at level l."""
        if len(seeds) > self.depth:
            raise ValueError("more seed indices than nesting levels")
        idx = tuple(seeds) + (0,) * (self.depth - len(seeds))
        v = self.c[(Ellipsis,) + idx]
        return float(v) if v.ndim == 0 else v

    def base(self) -> "DiffScalar":
        """Drop the innermost level, keeping its no-infinitesimal part."""
        return DiffScalar(self.c[..., 0], self.levels[:-1])

    def inner_partials(self) -> "DiffScalar":
        """Innermost-level first-order parts, stacked on a new leading axis."""
        k = self.levels[-1] - 1
        c = np.moveaxis(self.c[..., 1:], -1, 0)
        assert c.shape[0] == k
        return DiffScalar(c, self.levels[:-1])

    # -- batch handling ----------------------------------------------------
    def __len__(self):
        if not self.shape:
            raise TypeError("len() of unbatched DiffScalar")
        return self.shape[0]

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key) or len(key) > len(self.shape):
            raise IndexError("index must address batch axes only")
        return DiffScalar(self.c[key], self.levels)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def reshape(self, *shape) -> "DiffScalar":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return DiffScalar(self.c.reshape(tuple(shape) + self.levels), self.levels)

    def sum(self, axis=None) -> "DiffScalar":
        nb = len(self.shape)
        if axis is None:
            axis = tuple(range(nb))
        elif isinstance(axis, int):
            axis = (axis % nb,)
        else:
            axis = tuple(a % nb for a in axis)
        return DiffScalar(self.c.sum(axis=axis), self.levels)

    def swap(self, i: int = 0, j: int = 1) -> "DiffScalar":
        """Swap two batch axes (matrix transpose for 2-d batches)."""
        return DiffScalar(np.swapaxes(self.c, i, j), self.levels)

    @property
    def T(self) -> "DiffScalar":
        return self.swap(0, 1)

    # -- arithmetic --------------------------------------------------------
    def _const(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x.reshape(x.shape + (1,) * self.depth)

    def _check(self, other: "DiffScalar"):
        if other.levels != self.levels:
            raise ValueError(
                f"cannot mix DiffScalars with level structures {self.levels} and {other.levels}")

    def _add_const(self, x, sign=1.0) -> "DiffScalar":
        x = np.asarray(x, dtype=float)
        shape = np.broadcast_shapes(self.shape, x.shape)
        c = np.array(np.broadcast_to(self.c, shape + self.levels))
        c[(Ellipsis,) + (0,) * self.depth] += sign * x
        return DiffScalar(c, self.levels)

    def __add__(self, other):
        if isinstance(other, DiffScalar):
            self._check(other)
            return DiffScalar(self.c + other.c, self.levels)
        return self._add_const(other)

    __radd__ = __add__

    def __neg__(self):
        return DiffScalar(-self.c, self.levels)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, DiffScalar):
            self._check(other)
            return DiffScalar(self.c - other.c, self.levels)
        return self._add_const(other, -1.0)

    def __rsub__(self, other):
        return (-self)._add_const(other)

    def __mul__(self, other):
        if isinstance(other, DiffScalar):
            self._check(other)
            return DiffScalar(_mul(self.c, other.c, self.depth), self.levels)
        return DiffScalar(self.c * self._const(other), self.levels)

    __rmul__ = __mul__

    def reciprocal(self) -> "DiffScalar":
        return DiffScalar(_apply(_power_derivs(-1.0), self.c, self.depth), self.levels)

    def __truediv__(self, other):
        if isinstance(other, DiffScalar):
            return self * other.reciprocal()
        return DiffScalar(self.c / self._const(other), self.levels)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = self * 0.0 + 1.0
            for _ in range(p):
                out = out * self
            return out
        return power(self, float(p))

    def __repr__(self):
        return f"DiffScalar(value={self.value!r}, levels={self.levels}, shape={self.shape})"


# -- elementary functions ---------------------------------------------------

def _sin_derivs(x, j):
    return (np.sin, np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))[j % 4](x)


def _cos_derivs(x, j):
    return (np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v), np.sin)[j % 4](x)


def _exp_derivs(x, j):
    return np.exp(x)


def _log_derivs(x, j):
    if j == 0:
        return np.log(x)
    return (-1.0) ** (j - 1) * math.factorial(j - 1) * np.power(x, -float(j))


def _power_derivs(p: float):
    def derivs(x, j):
        coef = 1.0
        for i in range(j):
            coef *= p - i
        return coef * np.power(x, p - j)
    return derivs


def _unary(derivs, numpy_fn):
    def fn(x):
        if isinstance(x, DiffScalar):
            return DiffScalar(_apply(derivs, x.c, x.depth), x.levels)
        return numpy_fn(x)
    return fn


sin = _unary(_sin_derivs, np.sin)
cos = _unary(_cos_derivs, np.cos)
exp = _unary(_exp_derivs, np.exp)
log = _unary(_log_derivs, np.log)
sqrt = _unary(_power_derivs(0.5), np.sqrt)


def power(x, p: float):
    if isinstance(x, DiffScalar):
        return DiffScalar(_apply(_power_derivs(p), x.c, x.depth), x.levels)
    return np.power(x, p)


# -- construction -------------------------------------------------------------

def _check_depth(depth: int):
    if not 0 <= depth <= MAX_ORDER:
        raise ValueError(f"depth must be in [0, {MAX_ORDER}], got {depth}")


def lift(x: float, seed_index: int, depth: int, nseeds: int = 1) -> DiffScalar:
    """Seed ``x`` as the independent variable along ``seed_index`` at every level."""
    _check_depth(depth)
    if not 0 <= seed_index < nseeds:
        raise ValueError("seed_index out of range")
    dirs = np.zeros((nseeds, 1))
    dirs[seed_index, 0] = 1.0
    return lift_point([x], depth, directions=dirs)[0]


def lift_point(p: Sequence[float], depth: int, directions=None) -> DiffScalar:
    """Lift a point of R^m to a batched DiffScalar of shape (m,).

    ``directions`` is a (k, m) array of seed directions shared by every level
    (default: the m coordinate directions).
    """
    _check_depth(depth)
    q = DiffScalar(np.asarray(p, dtype=float))
    for _ in range(depth):
        q = extend(q, directions)
    return q


def extend(q: DiffScalar, directions=None) -> DiffScalar:
    """Append an innermost level seeded along ``directions`` (k, m)."""
    if not isinstance(q, DiffScalar):
        q = DiffScalar(np.asarray(q, dtype=float))
    if len(q.shape) != 1:
        raise ValueError("extend expects a point: a DiffScalar of shape (m,)")
    m = q.shape[0]
    dirs = np.eye(m) if directions is None else np.atleast_2d(np.asarray(directions, dtype=float))
    if dirs.shape[1] != m:
        raise ValueError(f"seed directions must have {m} columns")
    k = dirs.shape[0]
    c = np.zeros(q.c.shape + (k + 1,))
    c[..., 0] = q.c
    base = (slice(None),) + (0,) * q.depth
    for i in range(k):
        c[base + (i + 1,)] = dirs[i]
    return DiffScalar(c, q.levels + (k + 1,))


def as_diff(x, like: DiffScalar) -> DiffScalar:
    """Promote a constant (scalar or array) to the level structure of ``like``."""
    if isinstance(x, DiffScalar):
        like._check(x)
        return x
    x = np.asarray(x, dtype=float)
    c = np.zeros(x.shape + like.levels)
    c[(Ellipsis,) + (0,) * like.depth] = x
    return DiffScalar(c, like.levels)


def stack(items: Sequence, axis: int = 0) -> DiffScalar:
    """Stack DiffScalars (and constants) along a new batch axis."""
    template = next((v for v in items if isinstance(v, DiffScalar)), None)
    if template is None:
        return DiffScalar(np.stack([np.asarray(v, dtype=float) for v in items], axis=axis))
    parts = [as_diff(v, template) for v in items]
    shape = np.broadcast_shapes(*(p.shape for p in parts))
    cs = [np.broadcast_to(p.c, shape + template.levels) for p in parts]
    if axis < 0:
        axis += len(shape) + 1
    return DiffScalar(np.stack(cs, axis=axis), template.levels)


def value_of(x):
    return x.value if isinstance(x, DiffScalar) else x


def solve(A: DiffScalar, b: DiffScalar) -> DiffScalar:
    """Solve A x = b by Gaussian elimination, pivoting on values.

    ``A`` has batch shape (r, r); ``b`` has shape (r,) or (r, k).  Works at any
    nesting depth, so the solution can be differentiated further.
    """
    r = A.shape[0]
    if b.levels != A.levels:
        b = as_diff(b.value if isinstance(b, DiffScalar) else b, A)
    rows = [A[i] for i in range(r)]
    rhs = [b[i] for i in range(r)]
    for col in range(r):
        piv = max(range(col, r), key=lambda i: abs(rows[i].c[(col,) + (0,) * A.depth]))
        if abs(rows[piv].c[(col,) + (0,) * A.depth]) == 0.0:
            raise np.linalg.LinAlgError("singular system")
        rows[col], rows[piv] = rows[piv], rows[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = rows[col][col].reciprocal()
        for i in range(col + 1, r):
            f = rows[i][col] * inv
            rows[i] = rows[i] - f * rows[col]
            rhs[i] = rhs[i] - f * rhs[col]
    x = [None] * r
    for i in range(r - 1, -1, -1):
        acc = rhs[i]
        for j in range(i + 1, r):
            acc = acc - rows[i][j] * x[j]
        x[i] = acc / rows[i][i]
    return stack(x)


# -- fields -------------------------------------------------------------------

@dataclass(frozen=True)
class FieldHandle:
    """A map R^arity -> R^codomain written once, evaluable at any depth.

    ``evaluator`` receives ``arity`` scalars (floats or DiffScalars) and returns
    a sequence of ``codomain`` scalars.  It must use the functions of this
    module (``sin``, ``exp``...) rather than numpy ones.
    """

    arity: int
    codomain: int
    evaluator: Callable
    name: str = ""

    def __call__(self, point):
        if isinstance(point, DiffScalar):
            if point.shape != (self.arity,):
                raise ValueError(f"expected point of shape ({self.arity},), got {point.shape}")
            args = [point[i] for i in range(self.arity)]
        else:
            args = [float(v) for v in np.asarray(point, dtype=float).reshape(-1)]
            if len(args) != self.arity:
                raise ValueError(f"expected {self.arity} coordinates, got {len(args)}")
        out = list(self.evaluator(*args))
        if len(out) != self.codomain:
            raise ValueError(f"{self.name or 'field'} returned {len(out)} components, "
                             f"expected {self.codomain}")
        if isinstance(point, DiffScalar):
            return stack([as_diff(v, point[0]) for v in out])
        return np.array([value_of(v) for v in out], dtype=float)


def directional_derivative(f: FieldHandle, p, v, order: int) -> np.ndarray:
    """order-th derivative of f at p along v, by nested lifting."""
    if order > MAX_ORDER or order < 0:
        raise ValueError(f"order must be in [0, {MAX_ORDER}]")
    p = np.asarray(p, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(1, -1)
    q = lift_point(p, order, directions=v)
    out = f(q)
    return np.asarray(out.derivative(*([1] * order)), dtype=float).reshape(-1)
