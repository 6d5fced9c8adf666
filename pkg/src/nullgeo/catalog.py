"""Built-in null hypersurface charts with known geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jetcalc as jc
from .jetcalc import FieldHandle
from .minkowski import minkowski_inner
from .nullframe import NullChart

POLE_MARGIN = 0.2


class ConfigError(ValueError):
    """Bad catalog configuration record."""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    chart: NullChart
    config: dict
    # closed forms as functions of the chart point
    expected: dict[str, Callable] = field(default_factory=dict)
    # normal fields as coefficient functions frame -> (a, b), V = a xi + b N
    normal_fields: dict[str, Callable] = field(default_factory=dict)
    # default leaf parameters for sweeps and containment checks
    leaves: tuple[float, ...] = ()


def _sphere_embedding(angles):
    """Unit S^n from n angles (theta_1..theta_{n-1}, phi); returns n+1 components."""
    *thetas, phi = angles
    comps = []
    prod = 1.0
    for th in thetas:
        comps.append(prod * jc.cos(th))
        prod = prod * jc.sin(th)
    comps.append(prod * jc.sin(phi))
    comps.append(prod * jc.cos(phi))
    return comps[::-1]


def make_null_cone(n: int = 2, u_range=(0.5, 4.0)) -> CatalogEntry:
    """Future null cone -(x^0)^2 + sum (x^a)^2 = 0, x^0 > 0.

    Chart F(u, angles) = u (1, unit sphere point); xi is the position field.
    For n = 2 the angles are (theta, phi) with x^1 = sin(theta) cos(phi).
    """
    if n < 2:
        raise ConfigError("cone needs n >= 2")
    if u_range[0] <= 0:
        raise ConfigError("only the x^0 > 0 branch is supported")

    def F(u, *angles):
        return [u] + [u * c for c in _sphere_embedding(angles)]

    Fh = FieldHandle(n + 1, n + 2, F, name="cone")
    domain = ((float(u_range[0]), float(u_range[1])),) + \
        ((POLE_MARGIN, math.pi - POLE_MARGIN),) * (n - 1) + ((0.0, 2.0 * math.pi),)
    names = ("u",) + (("theta",) if n == 2 else tuple(f"theta{i}" for i in range(1, n))) + ("phi",)
    chart = NullChart(n=n, F=Fh, domain=domain, xi_override=Fh, name=f"cone{n}", coord_names=names)

    # V1 = -xi/(2x0) - x0 N, V2 = -xi/(2x0) + x0 N
    def v1(fr):
        x0 = fr.pos[0]
        return -0.5 / x0, -x0

    def v2(fr):
        x0 = fr.pos[0]
        return -0.5 / x0, x0

    expected = {
        "rho": lambda p: -1.0,
        "varrho": lambda p: -0.5 / p[0] ** 2,
        "psi": lambda p: 0.5 / p[0] ** 2,
        "lambda": lambda p: 1.0 / p[0],
        "epsilon": lambda p: 1.0,
        "center": lambda p: np.r_[p[0], np.zeros(n + 1)],
        "r2": lambda p: p[0] ** 2,
        "H_coeff": lambda p: -1.0,
    }
    return CatalogEntry(name=f"cone{n}", chart=chart, config={"family": "cone", "n": n},
                        expected=expected, normal_fields={"V1": v1, "V2": v2},
                        leaves=(1.0, 2.0, 4.0))


def _screen_basis(d: np.ndarray) -> np.ndarray:
    # spatial unit vectors Euclidean-orthogonal to the spatial part of d
    dim = d.size
    dsp = d[1:] / np.linalg.norm(d[1:])
    basis = []
    for j in range(dim - 1):
        v = np.zeros(dim - 1)
        v[j] = 1.0
        v -= (v @ dsp) * dsp
        for b in basis:
            v -= (v @ b) * b
        if np.linalg.norm(v) > 1e-6:
            basis.append(v / np.linalg.norm(v))
    return np.array([np.r_[0.0, b] for b in basis[: dim - 2]])


def make_null_hyperplane(n: int = 2, null_dir=None, box: float = 1.0) -> CatalogEntry:
    """Affine null hyperplane F(t, s) = t d + sum s^a e_a."""
    d = np.r_[1.0, 1.0, np.zeros(n)] if null_dir is None else np.asarray(null_dir, dtype=float)
    if d.shape != (n + 2,):
        raise ConfigError(f"null direction needs {n + 2} components")
    if np.linalg.norm(d) == 0 or abs(minkowski_inner(d, d)) > 1e-12 * (d @ d):
        raise ConfigError("hyperplane direction must be a nonzero null vector")
    E = _screen_basis(d)

    def F(t, *s):
        return [t * d[A] + sum(s[a] * E[a, A] for a in range(n)) for A in range(n + 2)]

    chart = NullChart(n=n, F=FieldHandle(n + 1, n + 2, F, name="hyperplane"),
                      domain=((-box, box),) * (n + 1), name=f"hyperplane{n}")
    zero = lambda p: 0.0
    return CatalogEntry(name=f"hyperplane{n}", chart=chart,
                        config={"family": "hyperplane", "n": n, "dir": d.tolist()},
                        expected={"rho": zero, "varrho": zero, "H_coeff": zero},
                        leaves=(-0.5, 0.0, 0.5))


def make_twisted(n: int = 2, kappa: float = 0.6, mu: float = 0.8, box: float = 0.5,
                 t_box: float = 0.3) -> CatalogEntry:
    """Null hypersurface swept by the null normals L of a graph surface.

    S: s -> (phi(s), s^1..s^n, psi(s)) with phi = kappa s1 s2 and
    psi = mu (s1^2 - s2^2)/2, and F(t, s) = S(s) + t L(s).  The two normal
    shape operators of S do not commute, so the leaves have curved normal
    bundles and d tau does not vanish.
    """
    if n < 2:
        raise ConfigError("twisted chart needs n >= 2")
    if kappa * box * math.sqrt(2) >= 1.0:
        raise ConfigError("kappa * box too large: the base surface must stay spacelike")

    def F(t, *s):
        s1, s2 = s[0], s[1]
        phi = kappa * s1 * s2
        psi = 0.5 * mu * (s1 * s1 - s2 * s2)
        dphi = [kappa * s2, kappa * s1] + [0.0] * (n - 2)
        dpsi = [mu * s1, -mu * s2] + [0.0] * (n - 2)
        A = 1.0 + sum(g * g for g in dpsi)
        B = sum(a * b for a, b in zip(dphi, dpsi))
        C = sum(g * g for g in dphi) - 1.0
        n3 = (B + jc.sqrt(B * B - A * C)) / A
        L = [1.0] + [dphi[a] - dpsi[a] * n3 for a in range(n)] + [n3]
        S = [phi] + list(s) + [psi]
        return [S[A_] + t * L[A_] for A_ in range(n + 2)]

    chart = NullChart(n=n, F=FieldHandle(n + 1, n + 2, F, name="twisted"),
                      domain=((-t_box, t_box),) + ((-box, box),) * n, name=f"twisted{n}")
    return CatalogEntry(name=f"twisted{n}", chart=chart,
                        config={"family": "twisted", "n": n, "kappa": kappa, "mu": mu},
                        leaves=(-0.2, 0.0, 0.2))


_FAMILIES = {
    "cone": (make_null_cone, {"n"}),
    "hyperplane": (make_null_hyperplane, {"n", "dir"}),
    "twisted": (make_twisted, {"n", "kappa", "mu"}),
}


def load_custom(config: dict) -> CatalogEntry:
    """Instantiate a registered family from a configuration record."""
    if not isinstance(config, dict) or "family" not in config:
        raise ConfigError("configuration record needs a 'family' key")
    family = config["family"]
    if family not in _FAMILIES:
        raise ConfigError(f"unknown family {family!r}; known: {sorted(_FAMILIES)}")
    maker, allowed = _FAMILIES[family]
    params = {k: v for k, v in config.items() if k != "family"}
    extra = set(params) - allowed
    if extra:
        raise ConfigError(f"unknown parameters for {family}: {sorted(extra)}")
    kwargs = dict(params)
    if "dir" in kwargs:
        kwargs["null_dir"] = kwargs.pop("dir")
        kwargs.setdefault("n", len(kwargs["null_dir"]) - 2)
    try:
        entry = maker(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad parameters for {family}: {exc}") from exc
    return CatalogEntry(name=entry.name, chart=entry.chart, config={"family": family, **params},
                        expected={}, normal_fields=entry.normal_fields, leaves=entry.leaves)


def families() -> list[str]:
    return sorted(_FAMILIES)
