"""Final-value estimators and the frequency/time cross-check.

Four estimators produce a :class:`LimitEstimate`:

* ``classical_fvt``    -- ``lim s F(s)`` as ``s -> 0+``
* ``cesaro_fvt``       -- ``lim (1/t) int_0^t f``
* ``generalized_fvt``  -- ``lim Gamma(a+1) I^(a+1) f(t) / t^(a+1)``, which equals
  ``lim s F(s) / (a + 1)`` whenever it exists
* ``derivative_fvt``   -- ``lim L{f'}(s)`` for periodic ``f``

Frequency-side limits are Richardson-extrapolated with a polynomial in ``s``
(degree <= 3) along the positive real axis; time-side limits with a
least-squares polynomial in ``1/t`` (degree <= 2).
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fraccalc import SampledSignal, TimeGrid, cesaro_profile
from .report import ReportRecord
from .xform import (
    CatalogFunction,
    cesaro_mean_substituted,
    kernel_integral,
    laplace_numeric,
)

__all__ = [
    "DEFAULT_S_SEQ",
    "LimitEstimate",
    "Method",
    "classical_fvt",
    "cesaro_fvt",
    "cross_validate",
    "default_t_probes",
    "derivative_fvt",
    "extrapolate_to_zero",
    "generalized_fvt",
]

DEFAULT_S_SEQ = (1e-1, 5e-2, 2.5e-2, 1.25e-2)
DEFAULT_S_KERNEL = (1e-3, 5e-4, 2.5e-4, 1.25e-4)
DEFAULT_TOL = 1e-3
MAX_S_DEGREE = 3
MAX_T_DEGREE = 2
DEFAULT_T_DEGREE = 1


class Method(str, enum.Enum):
    classical_sF = "classical_sF"
    cesaro_mean = "cesaro_mean"
    generalized_alpha = "generalized_alpha"
    derivative_form = "derivative_form"


@dataclass
class LimitEstimate:
    """A final-value estimate with its convergence trace.

    ``trace`` holds ``(parameter, extrapolated value)`` pairs, where each
    value uses every sample up to that parameter; ``samples`` holds the raw
    ``(parameter, value)`` data the extrapolation was built from.
    """

    value: float
    method: Method
    alpha: float
    trace: list
    converged: bool
    tol_used: float
    diverged: bool = False
    samples: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.trace:
            raise ValueError("a limit estimate needs a non-empty trace")


def extrapolate_to_zero(x, y, degree: int) -> float:
    """Intercept at ``x = 0`` of the least-squares polynomial of ``degree``.

    With ``len(x) == degree + 1`` this is plain Richardson (polynomial)
    extrapolation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    degree = min(degree, len(x) - 1)
    scale = np.max(np.abs(x))
    coef = np.polynomial.polynomial.polyfit(x / scale, y, degree)
    return float(coef[0])


def _running_extrapolation(x, y, max_degree: int) -> list[tuple[float, float]]:
    trace = [(float(x[0]), float(y[0]))]
    for k in range(1, len(x)):
        trace.append((float(x[k]), extrapolate_to_zero(x[: k + 1], y[: k + 1], max_degree)))
    return trace


def _check_decreasing(s_seq) -> np.ndarray:
    s = np.asarray(s_seq, dtype=float)
    if s.ndim != 1 or len(s) < 3:
        raise ValueError("need at least three s values")
    if np.any(s <= 0) or np.any(np.diff(s) >= 0):
        raise ValueError("s values must be positive and strictly decreasing")
    return s


def _check_increasing(t_probes) -> np.ndarray:
    t = np.asarray(t_probes, dtype=float)
    if t.ndim != 1 or len(t) < 3:
        raise ValueError("need at least three time probes")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("time probes must be positive and strictly increasing")
    return t


def _real_axis_pole(F, lo: float, hi: float, n: int = 400) -> float | None:
    """Locate a sign change of ``F`` on ``[lo, hi]`` that looks like a pole.

    At a simple real pole ``|F|`` peaks on both sides of the sign change; at
    an ordinary zero it dips. Returns the approximate location or ``None``.
    """
    sig = np.geomspace(lo, hi, n)
    vals = np.array([complex(F(x)).real for x in sig])
    if not np.all(np.isfinite(vals)):
        return float(sig[np.argmin(np.isfinite(vals))])
    mag = np.abs(vals)
    flips = np.nonzero(np.signbit(vals[1:]) != np.signbit(vals[:-1]))[0]
    for i in flips:
        inner = min(mag[i], mag[i + 1])
        outer = max(mag[max(i - 3, 0)], mag[min(i + 4, n - 1)])
        if inner > 2.0 * outer:
            return float(np.sqrt(sig[i] * sig[i + 1]))
    return None


def classical_fvt(F, s_seq=DEFAULT_S_SEQ, *, tol: float = DEFAULT_TOL, pole_scan: bool = True) -> LimitEstimate:
    """Estimate ``lim_{s->0+} s F(s)`` from samples along the real axis.

    ``diverged`` is set when ``|s F(s)|`` grows at least like ``s**-1/2``
    along the sequence (a pole of order two or more at the origin), or when
    a real pole is found on ``(0, max(10, 10 s_0)]``.
    """
    s = _check_decreasing(s_seq)
    y = np.array([(x * complex(F(x))).real for x in s])
    trace = _running_extrapolation(s, y, MAX_S_DEGREE)
    mag = np.abs(y)
    growing = bool(
        np.all(np.diff(mag) > 0) and mag[-1] >= mag[0] * math.sqrt(s[0] / s[-1])
    )
    pole = _real_axis_pole(F, s[-1], max(10.0, 10.0 * s[0])) if pole_scan else None
    diverged = growing or pole is not None or not np.all(np.isfinite(y))
    value = trace[-1][1]
    converged = (not diverged) and abs(trace[-1][1] - trace[-2][1]) <= tol
    return LimitEstimate(
        value=value,
        method=Method.classical_sF,
        alpha=0.0,
        trace=trace,
        converged=converged,
        tol_used=tol,
        diverged=diverged,
        samples=list(zip(s.tolist(), y.tolist())),
        diagnostics={"real_pole": pole, "growing": growing},
    )


def default_t_probes(t_max: float = 1e3, count: int = 9) -> np.ndarray:
    return np.geomspace(t_max / 16.0, t_max, count)


def _profile_at(f, alpha: float, t: np.ndarray) -> np.ndarray:
    if isinstance(f, SampledSignal):
        g = cesaro_profile(f, alpha)
        if t[-1] > f.grid.t_end * (1 + 1e-12):
            raise ValueError("time probes extend beyond the sampled signal")
        return np.asarray(g(t), dtype=float)
    half = math.pi / f.omega if getattr(f, "omega", None) else None
    return np.array([cesaro_mean_substituted(f, alpha, float(tk), half_period=half) for tk in t])


def generalized_fvt(
    f, alpha: float, t_probes=None, *, tol: float = DEFAULT_TOL, degree: int = DEFAULT_T_DEGREE
) -> LimitEstimate:
    """Limit of the order-``alpha`` Cesàro profile ``g_alpha(t)``.

    ``f`` is a :class:`CatalogFunction` (or vectorized callable), evaluated
    through ``int_0^1 (1-u)**alpha f(t u) du``, or a :class:`SampledSignal`,
    evaluated with the product-trapezoid profile. The value is the
    ``alpha``-normalized limit, so it should match ``lim s F(s) / (alpha + 1)``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    t = _check_increasing(default_t_probes() if t_probes is None else t_probes)
    g = _profile_at(f, alpha, t)
    x = 1.0 / t
    trace = _running_extrapolation(x, g, min(degree, MAX_T_DEGREE))
    # report the trace in terms of the time probe it ends at
    trace = [(float(tk), v) for tk, (_, v) in zip(t, trace)]
    converged = abs(trace[-1][1] - trace[-2][1]) <= tol and bool(np.all(np.isfinite(g)))
    return LimitEstimate(
        value=trace[-1][1],
        method=Method.generalized_alpha if alpha > 0 else Method.cesaro_mean,
        alpha=float(alpha),
        trace=trace,
        converged=converged,
        tol_used=tol,
        samples=list(zip(t.tolist(), g.tolist())),
    )


def cesaro_fvt(f, t_probes=None, *, tol: float = DEFAULT_TOL, degree: int = DEFAULT_T_DEGREE) -> LimitEstimate:
    """Running-mean limit ``lim (1/t) int_0^t f``.

    For a catalog entry with a period, the exact one-period mean is reported
    in ``diagnostics`` next to its discrepancy from the extrapolated value.
    """
    est = generalized_fvt(f, 0.0, t_probes, tol=tol, degree=degree)
    est.method = Method.cesaro_mean
    period = getattr(f, "period_T", None)
    if period is not None:
        mean = cesaro_mean_substituted(f, 0.0, period)
        est.diagnostics["period_mean"] = mean
        est.diagnostics["period_discrepancy"] = est.value - mean
    return est


def _numeric_derivative(f):
    h = 1e-3

    def deriv(t):
        t = np.asarray(t, dtype=float)
        central = (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)
        forward = (
            -25 * f(t) + 48 * f(t + h) - 36 * f(t + 2 * h) + 16 * f(t + 3 * h) - 3 * f(t + 4 * h)
        ) / (12 * h)
        return np.where(t < 2 * h, forward, central)

    return deriv


def derivative_fvt(f: CatalogFunction, s_seq=DEFAULT_S_SEQ, *, tol: float = DEFAULT_TOL) -> LimitEstimate:
    """``lim_{s->0+} L{f'}(s)`` for a periodic catalog entry.

    For periodic ``f`` the limit equals the one-period mean minus ``f(0+)``;
    both sides and their gap go into ``diagnostics``. Uses the entry's
    derivative if it has one, otherwise a fourth-order finite difference.
    """
    if getattr(f, "period_T", None) is None:
        raise ValueError(f"{getattr(f, 'name', f)!r} has no period; derivative form needs one")
    s = _check_decreasing(s_seq)
    deriv = f.derivative_eval or _numeric_derivative(f)
    fprime = CatalogFunction(
        name=f"{f.name}'", time_eval=deriv, exp_order_c=f.exp_order_c, omega=f.omega
    )
    y = np.array([laplace_numeric(fprime, x).real for x in s])
    trace = _running_extrapolation(s, y, MAX_S_DEGREE)
    mean = cesaro_mean_substituted(f, 0.0, f.period_T)
    f0 = float(f(np.array([0.0]))[0])
    predicted = mean - f0
    return LimitEstimate(
        value=trace[-1][1],
        method=Method.derivative_form,
        alpha=0.0,
        trace=trace,
        converged=abs(trace[-1][1] - trace[-2][1]) <= tol,
        tol_used=tol,
        samples=list(zip(s.tolist(), y.tolist())),
        diagnostics={
            "period_mean": mean,
            "f0": f0,
            "predicted": predicted,
            "gap": trace[-1][1] - predicted,
        },
    )


def _transform_of(f: CatalogFunction):
    if f.transform_eval is not None:
        return f.transform_eval
    return lambda s: laplace_numeric(f, s)


def kernel_limit(F, alpha: float, s_seq=DEFAULT_S_KERNEL, *, tol: float = DEFAULT_TOL) -> LimitEstimate:
    """Extrapolate ``s * kernel_integral(F, alpha, s)`` to ``s = 0``."""
    s = _check_decreasing(s_seq)
    y = np.array([(x * kernel_integral(F, alpha, x)).real for x in s])
    trace = _running_extrapolation(s, y, MAX_S_DEGREE)
    return LimitEstimate(
        value=trace[-1][1],
        method=Method.generalized_alpha,
        alpha=float(alpha),
        trace=trace,
        converged=abs(trace[-1][1] - trace[-2][1]) <= tol,
        tol_used=tol,
        samples=list(zip(s.tolist(), y.tolist())),
    )


def cross_validate(
    f: CatalogFunction,
    alpha: float,
    *,
    s_seq=DEFAULT_S_SEQ,
    t_probes=None,
    s_kernel=DEFAULT_S_KERNEL,
    tol: float = 1e-2,
) -> ReportRecord:
    """Compare the three routes to ``lim s F(s) / (alpha + 1)``.

    (i) classical ``s F(s)`` extrapolation, divided by ``alpha + 1``;
    (ii) the time-side generalized Cesàro limit;
    (iii) the extrapolated kernel integral ``s int_1^inf F(su)/u (1-1/u)**alpha du``.
    The record passes when all three converge and agree within ``tol``,
    fails when they converge but disagree, and is inconclusive otherwise.
    """
    start = time.perf_counter()
    F = _transform_of(f)
    classical = classical_fvt(F, s_seq, tol=tol)
    general = generalized_fvt(f, alpha, t_probes, tol=tol)
    kernel = kernel_limit(F, alpha, s_kernel, tol=tol)
    target = classical.value / (alpha + 1.0)
    gap_g = target - general.value
    gap_k = target - kernel.value
    all_converged = classical.converged and general.converged and kernel.converged
    if not all_converged:
        status = "inconclusive"
    elif abs(gap_g) <= tol and abs(gap_k) <= tol:
        status = "pass"
    else:
        status = "fail"
    return ReportRecord(
        experiment_id=f"fvt:{f.name}:alpha={alpha:g}",
        inputs={
            "function": f.to_record(),
            "alpha": alpha,
            "s_seq": list(s_seq),
            "t_probes": [p for p, _ in general.samples],
            "s_kernel": list(s_kernel),
        },
        outputs={
            "L": classical.value,
            "G": general.value,
            "K": kernel.value,
            "L_over_alpha_plus_1": target,
            "gap_G": gap_g,
            "gap_K": gap_k,
            "converged_L": classical.converged,
            "converged_G": general.converged,
            "converged_K": kernel.converged,
            "diverged_L": classical.diverged,
        },
        status=status,
        tolerances={"gap_G": tol, "gap_K": tol},
        wall_time_ms=int(1000 * (time.perf_counter() - start)),
    )
