# %% [markdown]
# # Two dimensions
#
# A product density gives an additive potential, and the 2D ground energy is
# the sum of the 1D energies.  The same construction applied to a hydrogen
# momentum density gives a potential in momentum space.

# %%
import numpy as np

from pdfpot import distributions as D
from pdfpot.forward import verify_separable_2d
from pdfpot.grids import Grid1D, Grid2D
from pdfpot.hydrogen import HQuantumNumbers, MomentumGrid, normalization_2d, potential_2d

# %%
g = Grid2D(Grid1D(-4, 16, 129), Grid1D(-7, 7, 129))
rep = verify_separable_2d(D.gumbel(1, 0), D.gaussian(1, 0), g)
print("2D energy:", rep["e_fd"], " sum of 1D energies:", rep["e_sum_1d"])

# %%
q = HQuantumNumbers(2, 1, 0)
mg = MomentumGrid(1.0, 201, 201)
print("normalization:", normalization_2d(q, mg))
field = potential_2d(q, mg)
print("valid cells: %.1f%%" % (100 * field.mask.mean()))
print("V range on valid cells:", np.nanmin(field.values), np.nanmax(field.values[field.mask]))
