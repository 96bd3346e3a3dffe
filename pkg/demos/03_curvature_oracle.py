# %% [markdown]
# # Checking the curvature evolution
#
# The flow of f, g, h implies evolution equations for alpha, beta, gamma.
# Here we evaluate those equations on a snapshot and compare them with
# centred time differences of the curvatures over two small steps.

# %%
import numpy as np

from xcftorus.acceptance import oracle_errors, forms_disagreement, smooth_alpha_forms

for n in (64, 128):
    errs = oracle_errors(n)
    print(n, {k: f"{v:.2e}" for k, v in errs.items()})

# %% [markdown]
# alpha_t can be written in four equivalent ways. On a profile whose
# derivatives are known in closed form they agree to round-off.

# %%
print("spread of the four alpha_t forms:", forms_disagreement(smooth_alpha_forms()))

# %% [markdown]
# The length of the core-to-boundary radius changes at the rate set by
# the integral of sqrt(beta gamma). Comparing the two along a tube run:

# %%
from xcftorus import arclength
from xcftorus.acceptance import hyperbolic_run
from xcftorus.diagnostics import beta_gamma_integral, transport_residuals

run = hyperbolic_run(64, snapshot_every=0.02)
times = [s.t for s in run.snapshots]
s1 = [arclength(s.metric)[1] for s in run.snapshots]
q = [beta_gamma_integral(s.metric, s.curv) for s in run.snapshots]
print("max transport residual:", np.max(transport_residuals(times, s1, q)))
