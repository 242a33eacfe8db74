"""
Fractional integrals and derivatives on a grid
==============================================

The product-trapezoid rule integrates the weakly singular kernel exactly
against a piecewise-linear signal, so it is exact for polynomials of
degree one and second order otherwise.
"""

import math

import numpy as np

from fracfvt.fraccalc import (
    SampledSignal,
    TimeGrid,
    caputo_derivative,
    cesaro_profile,
    rl_integral,
    semigroup_defect,
)

# I^1.5 t at t = 2 has the closed form 2**2.5 / Gamma(3.5)
grid = TimeGrid.span(2.0, 1e-3)
ramp = SampledSignal.from_function(lambda t: t, grid)
print("I^1.5 t (2):", rl_integral(ramp, 1.5).values[-1], "exact:", 2**2.5 / math.gamma(3.5))

# t**2.5 is not linear, so the error falls by ~4 per halving of h
print("\npower rule, alpha = 0.5, beta = 2.5")
for h in (2e-2, 1e-2, 5e-3, 2.5e-3):
    s = SampledSignal.from_function(lambda t: t**2.5, TimeGrid.span(2.0, h))
    exact = math.gamma(3.5) / math.gamma(4.0) * s.t**3
    print(f"  h = {h:<7g} max error = {np.max(np.abs(rl_integral(s, 0.5).values - exact)):.3e}")

# Caputo derivatives annihilate constants, unlike the Riemann-Liouville one
const = SampledSignal.from_function(lambda t: np.full_like(t, 3.0), grid)
print("\nmax |D^0.5 3| =", np.max(np.abs(caputo_derivative(const, 0.5).values)))

# I^a I^b = I^(a+b) only holds up to quadrature error
for h in (1e-3, 5e-4):
    s = SampledSignal.from_function(np.sin, TimeGrid.span(10.0, h))
    print(f"semigroup defect for sin, (0.3, 0.7), h = {h:g}: {semigroup_defect(s, 0.3, 0.7):.2e}")

# The Cesàro profile of order alpha is an average with weight (1-u)**alpha,
# so for a constant it returns c / (alpha + 1)
for alpha in (0.0, 0.5, 2.0):
    g = cesaro_profile(const, alpha)
    print(f"Cesaro profile of 3, alpha = {alpha}: {g.values[-1]:.12f}")
