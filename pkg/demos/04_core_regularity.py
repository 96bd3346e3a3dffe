# %% [markdown]
# # Regularity at the core
#
# At r = 0 the meridian circle collapses. Smoothness there needs
# f_s = 2 pi and alpha = beta. The ghost cells impose f odd and g, h even,
# and the curvature limits at the core come from extrapolation in r^2.
# The gap |alpha - beta| at the innermost cell should shrink by four
# each time n doubles.

# %%
from xcftorus import RadialGrid, core_slope, curvatures, make_two_pi_metric
from xcftorus.acceptance import PERTURBED, TWO_PI

for n in (32, 64, 128, 256):
    c = curvatures(make_two_pi_metric(PERTURBED, RadialGrid(n)))
    print(f"n={n:4d}  |alpha-beta| innermost {abs(c.alpha[0] - c.beta[0]):.3e}"
          f"  core alpha {c.core_alpha:.6f}  core beta {c.core_beta:.6f}")

# %% [markdown]
# The flow keeps the core slope at 2 pi.

# %%
from xcftorus.acceptance import two_pi_run

for snap in two_pi_run(64).snapshots[::2]:
    print(f"t={snap.t:.1f}  f_s(0) - 2pi = {core_slope(snap.metric) - TWO_PI:+.2e}")

# %% [markdown]
# A profile that is not smooth at the core is caught by the validator.

# %%
import numpy as np

from xcftorus import MetricProfile, validate_smoothness

grid = RadialGrid(64)
s = grid.centers
bad = MetricProfile(grid, 3.0 * np.sinh(s), np.cosh(s), np.ones(64), (3.0 * np.sinh(1.0), np.cosh(1.0), 1.0))
print(validate_smoothness(bad))
