"""Quantitative acceptance checks, shared by ``fracfvt verify`` and the test suite.

Each check returns a :class:`CriterionResult`; ``tol_scale`` multiplies
every numeric tolerance (``< 1`` makes the run stricter). Checks with a
runtime budget fail when they exceed it.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import finval, fodesim
from .fraccalc import SampledSignal, TimeGrid, cesaro_profile, semigroup_defect
from .specfun import MLParams, mittag_leffler
from .xform import (
    cesaro_mean_substituted,
    kernel_integral,
    laplace_numeric,
    make_catalog_function,
    pochhammer_series_partial_sums,
)

# int_0^{2 pi} (2 pi - tau)**0.5 (-sin tau) dtau by mpmath.quad at 30 digits
CERTIFICATE_COS_HALF = -1.894693378204330

ROTATION_HORIZON = 32.0
ROTATION_STEP = 0.01


@dataclass
class CriterionResult:
    number: int
    group: str
    title: str
    passed: bool
    runtime_s: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number}. {self.title} ({self.runtime_s:.1f} s)"


def _timed(func):
    def run(tol_scale: float = 1.0) -> CriterionResult:
        start = time.perf_counter()
        passed, details = func(tol_scale)
        elapsed = time.perf_counter() - start
        budget = details.get("budget_s")
        if budget is not None and elapsed > budget:
            passed = False
            details["over_budget"] = True
        n, group, title = run.meta
        return CriterionResult(n, group, title, bool(passed), elapsed, details)

    run.__name__ = func.__name__
    run.__doc__ = func.__doc__
    return run


def criterion(number: int, group: str, title: str):
    def wrap(func):
        run = _timed(func)
        run.meta = (number, group, title)
        return run

    return wrap


@criterion(1, "fvt", "t^2 sin t: classical limit and decaying order-2 Cesaro profile")
def tq_sin_example(tol_scale: float):
    f = make_catalog_function("tq_sin", q=2.0, omega=1.0)
    sF = abs(1e-3 * f.transform(1e-3))
    ts = (100.0, 200.0, 400.0)
    g = [abs(cesaro_mean_substituted(f, 2.0, t, half_period=math.pi)) for t in ts]
    decreasing = g[0] > g[1] > g[2]
    ok = sF <= 1e-2 * tol_scale and decreasing and g[2] <= 2e-2 * tol_scale
    return ok, {"abs_sF_1e-3": sF, "abs_g": dict(zip(ts, g)), "decreasing": decreasing, "budget_s": 30}


def _sampled_profile_transform(f, alpha: float, s_values, horizon=4000.0, h=0.01):
    grid = TimeGrid.span(horizon, h)
    g = cesaro_profile(SampledSignal.from_function(f, grid), alpha)
    return np.array([(s * laplace_numeric(g, s)).real for s in s_values])


@criterion(2, "fvt", "kernel integral equals the transform of the Cesaro profile")
def kernel_identity(tol_scale: float):
    rows = []
    ok = True
    for name in ("const1", "exp_decay", "two_plus_cos3"):
        f = make_catalog_function(name)
        target_L = f.known_sF_limit
        for alpha in (0.0, 0.5, 1.0, 2.0):
            s = 1e-2
            k_val = (s * kernel_integral(f.transform, alpha, s)).real
            s_seq = np.array(finval.DEFAULT_S_SEQ)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                g_vals = _sampled_profile_transform(f, alpha, np.concatenate([[s], s_seq]))
            gap = abs(k_val - g_vals[0])
            g_lim = finval.extrapolate_to_zero(s_seq, g_vals[1:], finval.MAX_S_DEGREE)
            k_lim = finval.kernel_limit(f.transform, alpha).value
            target = target_L / (alpha + 1.0)
            row_ok = (
                gap <= 1e-3 * tol_scale
                and abs(g_lim - target) <= 1e-2 * tol_scale
                and abs(k_lim - target) <= 1e-2 * tol_scale
            )
            ok &= row_ok
            rows.append(
                {"f": name, "alpha": alpha, "gap_at_1e-2": gap, "profile_limit": g_lim,
                 "kernel_limit": k_lim, "target": target, "ok": row_ok}
            )
    return ok, {"rows": rows, "budget_s": 120}


@criterion(3, "fvt", "running mean, classical and derivative-form limits")
def classical_limits(tol_scale: float):
    f = make_catalog_function("two_plus_cos3")
    mean = cesaro_mean_substituted(f, 0.0, 1e4, half_period=math.pi / 3)
    classical = finval.classical_fvt(f.transform).value
    deriv = finval.derivative_fvt(make_catalog_function("cos")).value
    tol = 1e-3 * tol_scale
    ok = abs(mean - 2) <= tol and abs(classical - 2) <= tol and abs(deriv + 1) <= tol
    return ok, {"running_mean_1e4": mean, "classical": classical, "derivative_form": deriv}


@criterion(4, "fraccalc", "semigroup defect of the fractional integral")
def semigroup(tol_scale: float):
    d = []
    for h in (1e-3, 5e-4):
        sig = SampledSignal.from_function(np.sin, TimeGrid.span(10.0, h))
        d.append(semigroup_defect(sig, 0.3, 0.7))
    ratio = d[0] / d[1]
    return d[0] <= 1e-3 * tol_scale and ratio >= 3, {"defect_h": d[0], "defect_h_half": d[1], "ratio": ratio}


def _ml_reference(t: np.ndarray) -> np.ndarray:
    return np.array([mittag_leffler(MLParams(0.5, -math.sqrt(tk))) for tk in t])


@criterion(5, "fode", "solver against the Mittag-Leffler solution")
def solver_oracle(tol_scale: float):
    rhs, x0 = fodesim.make_rhs("linear_decay")
    steps = (4e-3, 2e-3, 1e-3)
    errors, interior = [], []
    for h in steps:
        traj = fodesim.solve(fodesim.FodeProblem(0.5, rhs, x0, 5.0, h))
        # the reference is only needed where the error is measured
        t = traj.t
        err = np.abs(traj.states[:, 0] - _ml_reference(t))
        errors.append(float(err.max()))
        interior.append(float(err[t >= 1.0].max()))
    order = math.log2(errors[-2] / errors[-1])
    interior_order = math.log2(interior[-2] / interior[-1])
    ok = errors[-1] <= 1e-3 * tol_scale and order >= 1.3
    return ok, {
        "h": steps,
        "max_error": errors,
        "order": order,
        "max_error_t_ge_1": interior,
        "order_t_ge_1": interior_order,
    }


@criterion(6, "fode", "rotation system: periodic at order 1, no period at order 0.8")
def rotation_contrast(tol_scale: float):
    rhs, x0 = fodesim.make_rhs("rotation")
    periods = np.linspace(1.0, 20.0, 60)
    ref = fodesim.solve_classical(rhs, x0, ROTATION_HORIZON, ROTATION_STEP)
    T_ref, r_ref = fodesim.periodicity_residual(ref, periods).near(2 * math.pi)
    frac = fodesim.solve(fodesim.FodeProblem(0.8, rhs, x0, ROTATION_HORIZON, ROTATION_STEP))
    scan = fodesim.periodicity_residual(frac, periods)
    r_frac = scan.min_residual
    ratio = r_frac / r_ref if r_ref > 0 else math.inf
    ok = r_ref <= 1e-3 * tol_scale and r_frac >= 0.05 and ratio >= 10
    return ok, {
        "reference_T": T_ref,
        "reference_residual": r_ref,
        "fractional_min_residual": r_frac,
        "fractional_best_T": scan.best_T,
        "ratio": ratio,
        "budget_s": 180,
    }


@criterion(7, "fode", "certificate integral")
def certificate(tol_scale: float):
    c = fodesim.certificate_integral(np.cos, 2 * math.pi, 0.5)
    c_const = fodesim.certificate_integral(lambda t: np.full_like(t, 3.0), 2 * math.pi, 0.5)
    gap = abs(c - CERTIFICATE_COS_HALF)
    ok = gap <= 1e-4 * tol_scale and abs(c_const) <= 1e-12 * tol_scale
    return ok, {"cos": c, "oracle": CERTIFICATE_COS_HALF, "gap": gap, "constant": c_const}


@criterion(8, "fvt", "binomial series of (1 - x)^alpha integrates to 1/(alpha + 1)")
def pochhammer_series(tol_scale: float):
    sums = pochhammer_series_partial_sums(0.5, 10**6)
    err = np.abs(sums - 2.0 / 3.0)
    monotone = bool(np.all(np.diff(err) <= 0))
    final = float(err[-1])
    return final <= 1e-3 * tol_scale and monotone, {"final_error": final, "monotone": monotone}


CRITERIA = (
    tq_sin_example,
    kernel_identity,
    classical_limits,
    semigroup,
    solver_oracle,
    rotation_contrast,
    certificate,
    pochhammer_series,
)

GROUPS = ("fvt", "fraccalc", "fode")


def run_all(only=None, tol_scale: float = 1.0) -> list[CriterionResult]:
    """Run the checks, optionally restricted to the groups in ``only``."""
    selected = [c for c in CRITERIA if only is None or c.meta[1] in only]
    return [c(tol_scale) for c in selected]
