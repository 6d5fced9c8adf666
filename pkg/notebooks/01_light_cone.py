# %% [markdown]
# # The light cone, leaf by leaf
#
# The future light cone of the origin in R^4_1 is a null hypersurface.  Its
# screen leaves (fixed u) are round 2-spheres of radius u.  Here we compute the
# forms at a few points, read off the classification and recover each leaf's
# sphere from the normal field V1.

# %%
import numpy as np

from nullgeo import PointGeometry, Grid, make_null_cone, sphere_containment
from nullgeo.classify import classify_point

cone = make_null_cone(2)
chart = cone.chart
print(chart.coord_names, chart.domain)

# %% [markdown]
# One point on the equator of the u = 2 leaf.  The screen blocks of B and C are
# proportional to the induced metric.

# %%
g = PointGeometry(chart, [2.0, np.pi / 2, 0.0])
t = g.tables
print("B screen\n", t.screen_block("B"))
print("C screen\n", t.screen_block("C"))
print("tau", t.tau)

# %%
row = classify_point(g, 1e-8)
for k in ("rho", "varrho", "psi", "H_coeff", "umbilic", "screen_umbilic", "leaf_H_half"):
    print(f"{k:>15}: {row[k]}")

# %% [markdown]
# rho stays at -1 on every leaf while varrho = -1/(2u^2) shrinks with u.

# %%
for u in (0.75, 1.0, 2.0, 4.0):
    r = classify_point(PointGeometry(chart, [u, 1.1, 0.3]), 1e-8)
    print(f"u={u:5.2f}  rho={r['rho']: .6f}  varrho={r['varrho']: .6f}  "
          f"-1/(2u^2)={-1 / (2 * u * u): .6f}")

# %% [markdown]
# V1 has A_V1 = (1/u) I and d tau = 0 on the cone, so every leaf sits on a
# pseudo-sphere centred at f + V1/lambda.

# %%
grid = Grid.over(chart, (5, 7, 7))
for u in cone.leaves:
    rec = sphere_containment(chart, u, cone.normal_fields["V1"], 1 / u, grid)
    print(f"u={u}: kind={rec.kind} eps={rec.epsilon} r2={rec.r2:.12g} "
          f"center={np.round(rec.center, 12)} residual={rec.worst_residual:.1e}")
