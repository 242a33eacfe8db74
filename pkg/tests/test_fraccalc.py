import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracfvt.fraccalc import (
    FracOrder,
    GridError,
    SampledSignal,
    TimeGrid,
    caputo_derivative,
    cesaro_profile,
    product_trapezoid_weights,
    rl_integral,
    semigroup_defect,
)


def sig(func, t_end, h):
    return SampledSignal.from_function(func, TimeGrid.span(t_end, h))


def power_rule(alpha, beta, t):
    return math.gamma(beta + 1) / math.gamma(alpha + beta + 1) * t ** (alpha + beta)


# -- types ---------------------------------------------------------------------


def test_grid_validation():
    with pytest.raises(GridError):
        TimeGrid(0.0, 0.0, 10)
    with pytest.raises(GridError):
        TimeGrid(0.0, 0.1, 1)
    with pytest.raises(GridError):
        TimeGrid(-1.0, 0.1, 10)
    g = TimeGrid.span(1.0, 0.25)
    assert g.n == 5 and g.t_end == 1.0


def test_signal_rejects_nonfinite_and_mismatch():
    g = TimeGrid(0.0, 0.1, 3)
    with pytest.raises(GridError):
        SampledSignal(g, [0.0, np.nan, 1.0])
    with pytest.raises(GridError):
        SampledSignal(g, [0.0, 1.0])


def test_signal_values_read_only():
    s = sig(np.sin, 1.0, 0.1)
    with pytest.raises(ValueError):
        s.values[0] = 3.0


def test_frac_order():
    assert FracOrder(0.5).m == 1
    assert FracOrder(2.0).m == 2 and FracOrder(2.0).is_integer
    assert FracOrder(2.3).m == 3
    with pytest.raises(ValueError):
        FracOrder(-0.1)


def test_weights_cached_and_frozen():
    w1 = product_trapezoid_weights(0.5, 100)
    w2 = product_trapezoid_weights(0.5, 100)
    assert w1[0] is w2[0]
    assert not w1[1].flags.writeable


# -- Riemann-Liouville integral -------------------------------------------------


def test_integer_order_one_is_running_integral():
    s = sig(np.ones_like, 1.0, 0.01)
    np.testing.assert_allclose(rl_integral(s, 1.0).values, s.t, atol=1e-14)


def test_half_integral_of_one():
    s = sig(np.ones_like, 1.0, 1e-3)
    assert rl_integral(s, 0.5).values[-1] == pytest.approx(1.1283791670955126, abs=1e-12)


def test_three_halves_integral_of_t():
    s = sig(lambda t: t, 2.0, 1e-3)
    # 2**2.5 / Gamma(3.5); exact for linear signals
    assert rl_integral(s, 1.5).values[-1] == pytest.approx(1.7021537297, abs=1e-9)


def test_first_node_is_zero():
    assert rl_integral(sig(np.cos, 1.0, 0.1), 0.7).values[0] == 0.0


def test_alpha_zero_rejected():
    with pytest.raises(ValueError):
        rl_integral(sig(np.cos, 1.0, 0.1), 0.0)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0.05, 3.0),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.integers(0, 2**31 - 1),
)
def test_linearity(alpha, a, b, seed):
    rng = np.random.default_rng(seed)
    g = TimeGrid(0.0, 0.01, 200)
    f1 = SampledSignal(g, rng.standard_normal(200))
    f2 = SampledSignal(g, rng.standard_normal(200))
    lhs = rl_integral(f1.with_values(a * f1.values + b * f2.values), alpha).values
    rhs = a * rl_integral(f1, alpha).values + b * rl_integral(f2, alpha).values
    scale = max(1.0, np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3.0), st.integers(0, 2**31 - 1), st.integers(10, 3000))
def test_positivity(alpha, seed, n):
    rng = np.random.default_rng(seed)
    f = SampledSignal(TimeGrid(0.0, 0.01, n), rng.random(n))
    assert np.all(rl_integral(f, alpha).values >= 0)


def test_positivity_long_grid_fft_path():
    n = 40000
    f = SampledSignal(TimeGrid(0.0, 1e-3, n), np.abs(np.sin(np.arange(n) * 1e-3)))
    assert np.all(rl_integral(f, 0.3).values >= 0)


def test_fft_path_matches_direct_path():
    n = 20000
    g = TimeGrid(0.0, 1e-3, n)
    f = SampledSignal.from_function(lambda t: np.cos(3 * t) + t, g)
    long = rl_integral(f, 2.5).values
    short = rl_integral(SampledSignal(TimeGrid(0.0, 1e-3, 16000), f.values[:16000]), 2.5).values
    np.testing.assert_allclose(long[:16000], short, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.5])
@pytest.mark.parametrize("beta", [0.0, 1.0])
def test_power_rule_exact_for_linear(alpha, beta):
    for h in (1e-2, 5e-3):
        s = sig(lambda t: t**beta, 2.0, h)
        err = np.max(np.abs(rl_integral(s, alpha).values - power_rule(alpha, beta, s.t)))
        assert err <= 1e-13


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.5])
def test_power_rule_second_order(alpha):
    beta = 2.5
    errs = []
    for h in (2e-2, 1e-2, 5e-3):
        s = sig(lambda t: t**beta, 2.0, h)
        errs.append(np.max(np.abs(rl_integral(s, alpha).values - power_rule(alpha, beta, s.t))))
    for e1, e2 in zip(errs, errs[1:]):
        assert 3.5 <= e1 / e2 <= 4.5


def test_vector_signal_componentwise():
    g = TimeGrid.span(3.0, 0.01)
    vec = SampledSignal(g, np.column_stack([np.sin(g.t), np.cos(g.t)]))
    out = rl_integral(vec, 0.6).values
    np.testing.assert_allclose(out[:, 0], rl_integral(sig(np.sin, 3.0, 0.01), 0.6).values, atol=1e-15)
    np.testing.assert_allclose(out[:, 1], rl_integral(sig(np.cos, 3.0, 0.01), 0.6).values, atol=1e-15)


# -- Caputo derivative --------------------------------------------------------


def test_caputo_kills_constants():
    s = sig(lambda t: np.full_like(t, 4.2), 5.0, 1e-2)
    assert np.max(np.abs(caputo_derivative(s, 0.5).values)) <= 1e-10
    assert np.max(np.abs(caputo_derivative(s, 1.7).values)) <= 1e-10


def test_caputo_half_of_t():
    s = sig(lambda t: t, 1.0, 1e-3)
    assert caputo_derivative(s, 0.5).values[-1] == pytest.approx(1.1283791670955126, abs=1e-10)


def test_caputo_integer_order_is_plain_derivative():
    s = sig(lambda t: t**2, 1.0, 1e-2)
    np.testing.assert_allclose(caputo_derivative(s, 1.0).values, 2 * s.t, atol=1e-12)


def test_caputo_of_sine_matches_series():
    # D^0.5 sin at t = 2 via the Mittag-Leffler-type series t^(1-a) sum (-1)^k t^(2k)/Gamma(2k+2-a)
    a, t = 0.5, 2.0
    ref = sum((-1) ** k * t ** (2 * k + 1 - a) / math.gamma(2 * k + 2 - a) for k in range(40))
    s = sig(np.sin, t, 1e-3)
    assert caputo_derivative(s, a).values[-1] == pytest.approx(ref, abs=1e-5)


def test_caputo_needs_enough_nodes():
    with pytest.raises(GridError):
        caputo_derivative(SampledSignal(TimeGrid(0, 0.1, 3), [0.0, 1.0, 2.0]), 1.5)


# -- Cesàro profile -------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0, 3.5])
def test_cesaro_profile_of_constant(alpha):
    s = sig(lambda t: np.full_like(t, 3.0), 20.0, 1e-2)
    g = cesaro_profile(s, alpha).values
    np.testing.assert_allclose(g, 3.0 / (alpha + 1), atol=1e-8)


def test_cesaro_profile_running_mean_of_sine():
    s = sig(np.sin, 6 * math.pi, 1e-3)
    g = cesaro_profile(s, 0.0)
    for k in (1, 2, 3):
        t = 2 * math.pi * k
        assert abs(g(t)) <= 1e-6


def test_cesaro_profile_t2_sin_order_two():
    s = sig(lambda t: t**2 * np.sin(t), 400.0, 5e-3)
    assert abs(cesaro_profile(s, 2.0).values[-1]) <= 0.02


def test_cesaro_profile_requires_origin():
    with pytest.raises(GridError):
        cesaro_profile(SampledSignal(TimeGrid(1.0, 0.1, 10), np.ones(10)), 0.5)


# -- semigroup -----------------------------------------------------------------


def test_semigroup_constant_regression():
    # I^0.5 1 ~ t^0.5 is not smooth at 0, so this case is only first order
    s = sig(np.ones_like, 1.0, 1e-3)
    assert semigroup_defect(s, 0.5, 0.5) <= 1.6e-4


def test_semigroup_sine():
    d1 = semigroup_defect(sig(np.sin, 10.0, 1e-3), 0.3, 0.7)
    d2 = semigroup_defect(sig(np.sin, 10.0, 5e-4), 0.3, 0.7)
    assert d1 <= 1e-3
    assert math.log2(d1 / d2) >= 1.8


def test_semigroup_zero_signal():
    assert semigroup_defect(sig(np.zeros_like, 1.0, 1e-2), 0.4, 0.9) == 0.0
