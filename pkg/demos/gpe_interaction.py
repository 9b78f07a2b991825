# %% [markdown]
# # Adding a mean-field interaction
#
# With a nonlinear term gN*|psi|^2 the same density requires a different
# external potential.  Two readings are compared: V_tise + gN*P (chemical
# potential read from its minimum) and the exact effective potential.

# %%
from pdfpot import distributions as D
from pdfpot.grids import Grid1D
from pdfpot.inverse import gpe_derive, gpe_residual_report

spec = D.gumbel(1.0, 1.0)
grid = Grid1D(-5.0, 10.0, 2001)

# %%
for gn in (-1.0, 0.0, 1.0, 2.0, 3.0):
    d = gpe_derive(spec, grid, gn)
    print(
        f"gN={gn:+.0f}  mu={d.mu:.10f}  min at {d.min_location:.6f}  "
        f"residual(V_tise + gN P)={gpe_residual_report(d, 'PaperTilde'):.3g}  "
        f"residual(effective)={gpe_residual_report(d, 'EffTilde'):.1e}"
    )
