# %% [markdown]
# # Forward round trip
#
# Derive V from a density, then solve the finite-difference Schroedinger
# equation in that V and compare the ground energy and |psi|^2 with the input.

# %%
from pdfpot import distributions as D
from pdfpot.forward import verify_roundtrip
from pdfpot.inverse import default_grid

# %%
for spec in (D.gaussian(1.0), D.gumbel(1.0), D.logistic(1.0), D.chi(3), D.chi(6)):
    rep = verify_roundtrip(spec, default_grid(spec, 3201))
    print(
        f"{str(spec):28s} E_fd={rep.e_fd:.8f} E={rep.e_exact:.8f} "
        f"order={rep.order_estimate:.2f} pdf err={rep.pdf_sup_error:.1e}"
    )

# %% [markdown]
# The Lorentzian is marginal: its ground energy coincides with the continuum
# threshold, so the density converges much more slowly than the energy.

# %%
spec = D.lorentzian(1.0)
rep = verify_roundtrip(spec, default_grid(spec, 3201))
print(f"lorentzian E_fd={rep.e_fd:.6f} pdf err={rep.pdf_sup_error:.1e}")
