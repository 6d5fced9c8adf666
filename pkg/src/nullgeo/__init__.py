"""Geometry of null hypersurfaces in Minkowski space, computed from a chart.

Frames, fundamental forms, shape operators, the normal curvature of the
screen leaves and the classification predicates built on them are all
evaluated by nested forward-mode differentiation of the chart map.
"""

from .catalog import CatalogEntry, ConfigError, load_custom, make_null_cone, make_null_hyperplane, make_twisted
from .classify import (leaf_mean_curvature, mean_curvature_H, pseudo_umbilic_check,
                       screen_conformality, screen_umbilicity, sphere_containment,
                       theorem2_audit, umbilicity)
from .curvature import (corollary_equivalence, covariant_derivative_Rperp, dtau,
                        first_normal_space, kernel_subbundle_D, normal_curvature_algebraic,
                        normal_curvature_direct)
from .fdoracle import FDConfig, fd_directional
from .forms import FormTables, PointGeometry, geometry
from .jetcalc import DiffScalar, FieldHandle, directional_derivative
from .minkowski import causal_character, minkowski_inner, quadric_residual
from .nullframe import Grid, NullChart, frame_at, validate_chart

__version__ = "0.1.0"

__all__ = [
    "CatalogEntry", "ConfigError", "load_custom", "make_null_cone", "make_null_hyperplane",
    "make_twisted",
    "leaf_mean_curvature", "mean_curvature_H", "pseudo_umbilic_check", "screen_conformality",
    "screen_umbilicity", "sphere_containment", "theorem2_audit", "umbilicity",
    "corollary_equivalence", "covariant_derivative_Rperp", "dtau", "first_normal_space",
    "kernel_subbundle_D", "normal_curvature_algebraic", "normal_curvature_direct",
    "FDConfig", "fd_directional",
    "FormTables", "PointGeometry", "geometry",
    "DiffScalar", "FieldHandle", "directional_derivative",
    "causal_character", "minkowski_inner", "quadric_residual",
    "Grid", "NullChart", "frame_at", "validate_chart",
]
