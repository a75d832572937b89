# %% [markdown]
# # The Stieltjes fixed point and the tilting factor
#
# Ridge-type estimators shrink the signal by a factor that depends on the spectrum of Sigma, the
# aspect ratio phi = p / n and the penalty lam. That factor comes out of a scalar fixed point.

# %%
from __future__ import annotations

import numpy as np

from prsclt import build_covariance, closed_form_identity, solve_fixed_point

# %% [markdown]
# With Sigma = I the fixed point has a closed form, and the iterative solver should land on it.

# %%
for phi, lam in [(0.5, 0.1), (1.0, 1.0), (2.0, 1.0), (5.0, 10.0)]:
    solved = solve_fixed_point(np.ones(500), phi, lam)
    exact = closed_form_identity(phi, lam)
    print(f"phi={phi:<4} lam={lam:<5} m={solved.m_value:.12f} closed={exact.m_value:.12f} "
          f"tilting={solved.tilting:.6f}")

# %% [markdown]
# The tilting factor r = m^2 / m' lies in (0, 1]. It rises towards 1 as the penalty grows, which is
# where the reference-panel estimator starts to behave like the marginal one.

# %%
cov = build_covariance("ar1", 400, m=100, rho=0.8)
for lam in (0.01, 0.1, 1.0, 10.0, 100.0, 1e4):
    pt = solve_fixed_point(cov.eigenvalues, 0.5, lam)
    print(f"lam={lam:>8g}  r={pt.tilting:.6f}")

# %% [markdown]
# Strong correlation (rho = 0.8) spreads the spectrum. At the same penalty that pulls r further
# below 1 than the identity case does.

# %%
for rho in (0.0, 0.5, 0.9):
    sig = build_covariance("ar1", 400, m=100, rho=rho).eigenvalues
    print(f"rho={rho}: r(lam=0.1, phi=1) = {solve_fixed_point(sig, 1.0, 0.1).tilting:.4f}")
