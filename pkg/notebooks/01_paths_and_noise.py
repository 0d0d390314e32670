"""
Acoustic paths and reference noise
==================================

The plant is three short FIR filters.  Reference noise comes from seeded
generators, so every trial can be regenerated from (seed, trial index).
"""

# %%
import numpy as np

from sssanc import (DelayLine, RngStream, empirical_cf, fir_batch, fir_step, gen_alpha_stable,
                    gen_ar1, gen_bursty, gen_white, preset_path)

P = preset_path("primary")
S = preset_path("secondary")
S_hat = preset_path("secondary_estimate")
print("primary  ", P.coeffs)
print("secondary", S.coeffs)
print("estimate ", S_hat.coeffs)

# %%
# Streaming one sample at a time gives exactly the batch convolution.
x = gen_white(2000, rng=RngStream(42, 0).generator())
line = DelayLine(P.length)
streamed = np.array([fir_step(P, line, v) for v in x])
print("streaming == batch:", np.array_equal(streamed, fir_batch(P, x)))

# relative error of the identified secondary path
err = np.linalg.norm(np.subtract(S.coeffs, S_hat.coeffs)) / np.linalg.norm(S.coeffs)
print(f"|S - S_hat| / |S| = {err:.3f}")

# %%
# Generators.  Trial r of seed s draws from its own stream.
g = RngStream(42, 1).generator()
ar = gen_ar1(1_000_000, 0.9, g)
print(f"AR(1) variance {ar.var():.3f}  (stationary value {1 / (1 - 0.81):.3f})")

burst = gen_bursty(200_000, 1.0, 100.0, rng=RngStream(42, 2).generator())
print(f"bursty variance ratio {burst[100_000:].var() / burst[:100_000].var():.1f}")

# %%
# Symmetric alpha-stable noise has no finite variance for alpha < 2.  Its
# characteristic function exp(-gamma |t|^alpha) is the right thing to check.
z = gen_alpha_stable(1_000_000, 1.4, 0.1, RngStream(42, 3).generator())
for t in (0.5, 1.0, 2.0):
    print(f"t={t}: empirical {empirical_cf(z, t):.4f}  target {np.exp(-0.1 * t ** 1.4):.4f}")
print("largest |sample|:", np.abs(z).max())
print("fraction beyond 10:", np.mean(np.abs(z) > 10))
