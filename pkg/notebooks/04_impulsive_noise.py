"""
Impulsive noise and robust scaling
==================================

Under alpha-stable noise a single large sample can throw the weights far
off.  The robust variants multiply the update by a factor g[e] that is
close to one for ordinary errors and close to zero for outliers.
"""

# %%
from pathlib import Path

import numpy as np

from sssanc import ScalingKind, load_scenario, scaling_factor, simulate
from sssanc.harness import ALL_FIELDS

SCEN = Path(__file__).resolve().parent.parent / "scenarios"
TRIALS = 20

# %%
e = np.array([0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 50.0])
print("e       ", e)
print("MCC g   ", np.round(scaling_factor(ScalingKind.mcc(1.0), e), 4))
print("EHCF g  ", np.round(scaling_factor(ScalingKind.ehcf(1.0, 1.0), e), 4))
print("MCC g*e ", np.round(scaling_factor(ScalingKind.mcc(1.0), e) * e, 4),
      f"(never above {np.exp(-0.5):.4f})")

# %%
for name in ("exp2_alpha14_sss", "exp2_alpha14_rsss_mcc", "exp2_alpha14_rsss_ehcf",
             "exp2_alpha12_rsss_mcc"):
    s = load_scenario(SCEN / f"{name}.ini")
    b = simulate(s, TRIALS, record=ALL_FIELDS)
    done = b.diverged_at < 0
    final = np.array([np.mean(a[-1000:]) for a in b.records["anr_db"][done]])
    print(f"{name:24s} diverged {np.sum(~done):2d}, median final ANR {np.median(final):6.2f} dB, "
          f"median g {np.median(b.records['g']):.3f}")
