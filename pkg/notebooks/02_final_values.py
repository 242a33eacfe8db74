"""
Final values beyond the classical theorem
=========================================

``t^2 sin t`` has no limit, and neither does its running mean. Yet
``s F(s) -> 0``. Averaging with the weight ``(1-u)**alpha`` recovers that
value once ``alpha`` reaches the growth exponent ``q = 2``.
"""

import numpy as np

from fracfvt.finval import cesaro_fvt, classical_fvt, cross_validate, generalized_fvt
from fracfvt.xform import catalog_tq_sin, kernel_integral, make_catalog_function

f = catalog_tq_sin(2.0, 1.0)

for s in (1e-1, 1e-2, 1e-3):
    print(f"s F(s) at s = {s:g}: {abs(s * f.transform(s)):.3e}")

probes = np.geomspace(100, 1600, 5)
for alpha in (0.0, 1.0, 2.0, 3.0):
    est = generalized_fvt(f, alpha, probes)
    row = "  ".join(f"{g:+.4f}" for _, g in est.samples)
    print(f"alpha = {alpha}: g(t) = {row}   converged = {est.converged}")

# The order-2 profile decays like 2 (cos t - 1) / t. It is not monotone
# at individual probes, only in its envelope.
print("\n|g_2| at t = 100, 200, 400:", [round(abs(generalized_fvt(f, 2.0, [100, 200, 400]).samples[i][1]), 5) for i in range(3)])

# The kernel form of the same limit lives entirely on the frequency side
for s in (1e-2, 1e-3):
    print(f"s * kernel integral at s = {s:g}: {(s * kernel_integral(f.transform, 2.0, s)).real:+.5f}")

# Periodic input: the running mean and s F(s) agree on the period mean
g = make_catalog_function("two_plus_cos3")
print("\n2 + cos 3t: classical", classical_fvt(g.transform).value,
      " running mean", cesaro_fvt(g, np.geomspace(625, 1e4, 9)).value)

for name, alpha in (("const1", 0.5), ("two_plus_cos3", 0.0), ("exp_decay", 1.0)):
    rec = cross_validate(make_catalog_function(name), alpha)
    o = rec.outputs
    print(f"{name:14s} alpha={alpha}: L/(a+1)={o['L_over_alpha_plus_1']:+.5f} "
          f"G={o['G']:+.5f} K={o['K']:+.5f} -> {rec.status}")
