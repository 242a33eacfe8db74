import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracfvt.fraccalc import SampledSignal, TimeGrid, cesaro_profile
from fracfvt.specfun import binomial_coefficient
from fracfvt.xform import (
    CatalogFunction,
    LaplaceTruncationError,
    LaplaceTruncationWarning,
    binomial_kernel_expansion,
    catalog_names,
    catalog_tq_sin,
    cesaro_mean_substituted,
    kernel_integral,
    kernel_power_integral,
    laplace_numeric,
    make_catalog_function,
    moment_vanishing_test,
    pochhammer_series_partial_sums,
    tq_sin_profile_series,
)


def inv(s):
    return 1.0 / s


# -- numeric Laplace transform ---------------------------------------------------


@pytest.mark.parametrize(
    "name, s, expected", [("exp_decay", 1.0, 0.5), ("const1", 0.25, 4.0), ("sin", 1.0, 0.5)]
)
def test_laplace_catalog_values(name, s, expected):
    assert laplace_numeric(make_catalog_function(name), s).real == pytest.approx(expected, rel=1e-10)


def test_laplace_small_s_oscillatory():
    f = make_catalog_function("cos")
    s = 1e-3
    assert laplace_numeric(f, s).real == pytest.approx(s / (s * s + 1), rel=1e-8)


def test_laplace_plain_callable():
    assert laplace_numeric(lambda t: np.exp(-2 * t), 1.0).real == pytest.approx(1 / 3, rel=1e-10)


def test_laplace_rejects_left_half_plane():
    with pytest.raises(LaplaceTruncationError):
        laplace_numeric(np.cos, -0.1)
    with pytest.raises(LaplaceTruncationError):
        laplace_numeric(np.cos, 0.0)


def test_laplace_cap_exceeded():
    with pytest.raises(LaplaceTruncationError):
        laplace_numeric(lambda t: np.asarray(t, dtype=float) ** 3, 1e-5)


def test_laplace_sampled_and_truncation_warning():
    g = TimeGrid.span(60.0, 1e-3)
    f = SampledSignal.from_function(lambda t: np.exp(-t), g)
    assert laplace_numeric(f, 1.0).real == pytest.approx(0.5, abs=1e-10)
    short = SampledSignal.from_function(np.cos, TimeGrid.span(5.0, 1e-2))
    with pytest.warns(LaplaceTruncationWarning):
        laplace_numeric(short, 0.1)


@pytest.mark.parametrize("name", ["const1", "exp_decay", "two_plus_cos3", "sin", "cos", "tq_sin"])
def test_transform_consistency_random_s(name):
    f = make_catalog_function(name) if name != "tq_sin" else make_catalog_function(name, q=1.5, omega=2.0)
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = complex(rng.uniform(f.exp_order_c + 0.1, f.exp_order_c + 5), rng.uniform(-3, 3))
        exact = f.transform(s)
        assert abs(laplace_numeric(f, s) - exact) <= 1e-6 * abs(exact)


# -- catalog -----------------------------------------------------------------------


def test_catalog_names_and_unknown():
    assert {"const1", "exp_decay", "two_plus_cos3", "tq_sin"} <= set(catalog_names())
    with pytest.raises(KeyError, match="known"):
        make_catalog_function("nosuch")


def test_catalog_validation_catches_wrong_transform():
    bad = CatalogFunction(name="bad", time_eval=lambda t: np.exp(-np.asarray(t)), transform_eval=lambda s: 1 / (s + 2))
    with pytest.raises(ValueError):
        bad.validate()


def test_catalog_validation_catches_wrong_period():
    bad = CatalogFunction(name="bad", time_eval=np.sin, period_T=3.0)
    with pytest.raises(ValueError):
        bad.validate()


def test_catalog_record_is_plain():
    rec = make_catalog_function("tq_sin", q=2.0, omega=1.0).to_record()
    assert rec["name"] == "tq_sin" and rec["params"] == {"q": 2.0, "omega": 1.0}


def test_tq_sin_reduces_to_sine():
    assert catalog_tq_sin(0.0, 1.0).transform(1.0).real == pytest.approx(0.5, rel=1e-14)


def test_tq_sin_example_limit():
    f = catalog_tq_sin(2.0, 1.0)
    assert abs(1e-3 * f.transform(1e-3)) <= 1e-2


def test_tq_sin_closed_form_vs_numeric():
    f = catalog_tq_sin(1.0, 2.0)
    # t sin 2t -> 4s / (s^2 + 4)^2
    assert f.transform(1.0).real == pytest.approx(4 / 25, rel=1e-14)
    assert abs(laplace_numeric(f, 1.0) - f.transform(1.0)) <= 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 50), st.floats(-50, 50), st.floats(0, 4), st.floats(0.1, 5))
def test_tq_sin_real_symmetric(re, im, q, omega):
    f = catalog_tq_sin(q, omega)
    s = complex(re, im)
    a, b = f.transform(s.conjugate()), f.transform(s).conjugate()
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_tq_sin_validation_rejects_bad_params():
    with pytest.raises(ValueError):
        catalog_tq_sin(-1.0, 1.0)
    with pytest.raises(ValueError):
        catalog_tq_sin(1.0, 0.0)


# -- kernel integral -----------------------------------------------------------------


def test_kernel_integral_values():
    assert kernel_integral(inv, 0.0, 2.0).real == pytest.approx(0.5, rel=1e-10)
    assert kernel_integral(inv, 2.0, 1.0).real == pytest.approx(1 / 3, rel=1e-10)


def _sampled_profile_laplace(f, alpha, s, horizon, h):
    grid = TimeGrid.span(horizon, h)
    g = cesaro_profile(SampledSignal.from_function(f, grid), alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LaplaceTruncationWarning)
        return laplace_numeric(g, s)


@pytest.mark.parametrize("name", ["const1", "exp_decay", "two_plus_cos3"])
@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
def test_kernel_identity(name, alpha):
    f = make_catalog_function(name)
    for s in (0.5, 0.1, 0.01):
        horizon = 45.0 / s
        k = kernel_integral(f.transform, alpha, s)
        g = _sampled_profile_laplace(f, alpha, s, horizon, 0.01)
        assert abs(k - g) <= 1e-4


def test_kernel_identity_t2_sin():
    f = catalog_tq_sin(2.0, 1.0)
    s = 1e-2
    k = kernel_integral(f.transform, 2.0, s)
    g = _sampled_profile_laplace(f, 2.0, s, 4000.0, 5e-3)
    assert abs(k - g) <= 1e-3


@pytest.mark.parametrize("alpha", [0, 1, 2, 3])
@pytest.mark.parametrize("name", ["exp_decay", "two_plus_cos3", "tq_sin"])
def test_binomial_reduction(alpha, name):
    f = make_catalog_function(name) if name != "tq_sin" else catalog_tq_sin(2.0, 1.0)
    s = 0.3
    total, terms = binomial_kernel_expansion(f.transform, alpha, s)
    direct = kernel_integral(f.transform, float(alpha), s)
    assert len(terms) == alpha + 1
    assert abs(total - direct) <= 1e-8 * max(1.0, abs(direct))
    for j, term in enumerate(terms):
        expected = binomial_coefficient(alpha, j) * (-1) ** j * kernel_power_integral(f.transform, j, s)
        assert abs(term - expected) <= 1e-12 * max(1.0, abs(expected))


def test_pochhammer_series_converges_monotonically():
    sums = pochhammer_series_partial_sums(0.5, 10**6)
    err = np.abs(sums - 2 / 3)
    assert np.all(np.diff(err) <= 0)
    assert err[-1] <= 1e-3
    assert np.all(np.isfinite(sums))


def test_pochhammer_series_error_bound():
    sums = pochhammer_series_partial_sums(0.5, 10**5)
    n = np.arange(1, 10**5 + 1)
    err = np.abs(sums[1:] - 2 / 3)
    K = err[9] * 10**0.5
    assert np.all(err[9:] <= K / n[9:] ** 0.5)


# -- substituted Cesàro mean --------------------------------------------------------


def test_substituted_mean_constant():
    f = make_catalog_function("const", c=3.0)
    for alpha in (0.0, 0.5, 2.0):
        assert cesaro_mean_substituted(f, alpha, 17.0) == pytest.approx(3 / (alpha + 1), rel=1e-13)
        assert cesaro_mean_substituted(f, alpha, 0.0) == pytest.approx(3 / (alpha + 1), rel=1e-13)


def test_substituted_mean_running_mean_closed_form():
    f = catalog_tq_sin(2.0, 1.0)
    for t in (10.0, 100.0, 1000.0):
        exact = (2 * t * math.sin(t) - (t * t - 2) * math.cos(t) - 2) / t
        assert cesaro_mean_substituted(f, 0.0, t) == pytest.approx(exact, abs=1e-8 * t * t)


# -- moment test ----------------------------------------------------------------------


def test_moment_vanishing_zero_signal():
    f = SampledSignal(TimeGrid.span(10.0, 1e-2), np.zeros(1001))
    ok, moments = moment_vanishing_test(f, 1.0, 1.0, 5, 1e-12)
    assert ok and np.all(moments == 0)


def test_moment_vanishing_sine():
    f = SampledSignal.from_function(np.sin, TimeGrid.span(50.0, 1e-3))
    ok, moments = moment_vanishing_test(f, 1.0, 1.0, 4, 1e-3)
    assert not ok
    assert moments[0] == pytest.approx(0.5, abs=1e-6)


def test_moment_vanishing_tiny_signal():
    f = SampledSignal.from_function(lambda t: 1e-12 * np.sin(t), TimeGrid.span(50.0, 1e-3))
    ok, _ = moment_vanishing_test(f, 1.0, 1.0, 4, 1e-6)
    assert ok


def test_moment_vanishing_rejects_bad_params():
    f = SampledSignal.from_function(np.sin, TimeGrid.span(5.0, 1e-2))
    with pytest.raises(ValueError):
        moment_vanishing_test(f, 0.0, 1.0, 2, 1e-3)


@pytest.mark.parametrize(
    "q, omega, alpha, t",
    [(2.0, 1.0, 2.0, 10.0), (2.0, 1.0, 2.0, 400.0), (1.5, 2.0, 0.5, 25.0), (2.0, 1.0, 1.0, 200.0), (0.0, 1.0, 0.0, 30.0)],
)
def test_tq_sin_profile_series_matches_quadrature(q, omega, alpha, t):
    f = catalog_tq_sin(q, omega)
    series = tq_sin_profile_series(q, omega, alpha, t)
    quad = cesaro_mean_substituted(f, alpha, t, half_period=math.pi / omega)
    assert series == pytest.approx(quad, abs=1e-10)


def test_tq_sin_profile_series_leading_beta():
    # small t: only the n = 0 term survives, B(3, 4) w t**3 = t**3 / 60
    t = 1e-3
    assert tq_sin_profile_series(2.0, 1.0, 2.0, t) == pytest.approx(t**3 / 60, rel=1e-6)


def test_t2_sin_order_two_profile_values():
    # |g_2| at these probes follows |cos t - 1| / t, not a monotone sequence
    vals = [abs(tq_sin_profile_series(2.0, 1.0, 2.0, t)) for t in (100.0, 200.0, 400.0)]
    assert vals == pytest.approx([0.0021426794, 0.0048645956, 0.0075620908], abs=1e-9)
    assert all(v <= 2e-2 for v in vals)
