# %% [markdown]
# # From a Gumbel density to its potential
#
# Write the density as P = A exp(-f).  The potential whose ground state has
# |psi|^2 = P is V - E = (hbar^2/4m)(-f'' + f'^2/2).  For the Gumbel density the
# result is a Morse-like well.

# %%
import numpy as np

from pdfpot import distributions as D
from pdfpot.grids import Grid1D
from pdfpot.inverse import ground_energy, potential_from_exponent, potential_minimum

# %%
spec = D.gumbel(beta=1.0, x0=1.0)
grid = Grid1D(-4.0, 12.0, 801)
curve = potential_from_exponent(spec, grid)
print("E0 relative to the grid minimum:", curve.energy)

# %% [markdown]
# The continuous minimum sits at x0 - beta ln 2 and E0 = 3 / (2 beta^2).

# %%
for beta in (1.0, 2.0, 3.0):
    s = D.gumbel(beta, 1.0)
    x_min, _ = potential_minimum(s)
    print(f"beta={beta}: x_min={x_min:.12f} (expected {1 - beta * np.log(2):.12f}), E0={ground_energy(s)}")

# %% [markdown]
# A few samples of the well, shifted so that its minimum is zero.

# %%
for xi in (-2.0, 0.0, 1.0 - np.log(2), 2.0, 6.0, 12.0):
    i = int(round((xi - grid.a) / grid.h))
    print(f"x={grid.x[i]:7.3f}  V={curve.values[i]:10.5f}")
