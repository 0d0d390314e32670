"""
MSD trends and steady-state theory
==================================

The switched scheme tracks a diagonal approximation of the weight-error
covariance.  Here it is compared with the full-matrix recursion, and the
closed-form steady-state MSD is compared with a measured one.
"""

# %%
import numpy as np

from sssanc import (FullMsdOracle, SssState, convergence_factor, load_scenario,
                    ms_stability_bound, optimal_step, simulate, sss_iteration,
                    theoretical_steady_msd)
from pathlib import Path

SCEN = Path(__file__).resolve().parent.parent / "scenarios"

# %%
L = 16
print(f"stable steps: 0 < mu < {ms_stability_bound(L):.5f}")
print(f"fastest step mu_opt = {optimal_step(L):.6f}, h = {convergence_factor(optimal_step(L), L):.6f}")
for mu in (0.6, 0.3, 0.15, 0.075):
    print(f"mu={mu:<6} h={convergence_factor(mu, L):.5f}  "
          f"J(inf)={theoretical_steady_msd(mu, L, 1e-3, 1.0):.4g}")

# %%
# With a single tap there are no off-diagonal terms, so both recursions agree.
rng = np.random.default_rng(0)
cands = (0.6, 0.3, 0.15, 0.075)
diag, full = SssState(cands, 1), FullMsdOracle(cands, 1)
for _ in range(2000):
    x = rng.standard_normal(1)
    sss_iteration(diag, x, 0.5)
    full.step(x, 0.5)
print("single tap, relative J difference:", np.max(np.abs(diag.J - full.J) / full.J))

# %%
# Identification mode: unit secondary paths, so the optimum is the primary
# path itself and the weight error can be measured exactly.
s = load_scenario(SCEN / "theory_identification.ini").replace(trials=20, iterations=40_000)
b = simulate(s)
measured = b.records["true_msd"].mean(axis=0)[-10_000:].mean()
closed = theoretical_steady_msd(0.075, L, 1e-3, 1.0)
print(f"measured steady-state MSD {measured:.4g}")
print(f"closed form               {closed:.4g}  (ratio {measured / closed:.1f})")

# %%
# Summing the noise term over L taps gives mu^2 s2 / (L sf2), not / (L^2 sf2),
# and for white Gaussian input E[1/|x_f|^2] = 1 / ((L - 2) sf2).  With both
# corrections the prediction lands on the measurement.
corrected = closed * L * L / (L - 2)
print(f"corrected prediction      {corrected:.4g}  (ratio {measured / corrected:.3f})")
