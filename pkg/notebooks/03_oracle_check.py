# %% [markdown]
# # Checking jets against finite differences
#
# Every derivative in nullgeo comes from nested dual numbers.  The fdoracle
# module recomputes them with Richardson-extrapolated central differences so
# the two can be compared.

# %%
import numpy as np

from nullgeo import FDConfig, fd_directional, make_null_cone
from nullgeo.suites import oracle_concordance

# %%
print(fd_directional(lambda p: p[0] ** 3, [2.0], [1.0], 2))
print(fd_directional(lambda p: np.exp(p[0]), [0.0], [1.0], 3))

# %% [markdown]
# Extrapolation levels against the error on sin'.

# %%
for levels in (1, 2, 3):
    for h in (1e-1, 1e-2, 1e-3):
        d = fd_directional(lambda p: np.sin(p[0]), [0.7], [1.0], 1, FDConfig(h=h, levels=levels))
        print(f"levels={levels} h={h:g}  error={abs(d - np.cos(0.7)):.1e}")

# %% [markdown]
# Frame, tau, B and C on the cone: worst relative disagreement per order.

# %%
print(oracle_concordance(make_null_cone(2).chart, npoints=20))
