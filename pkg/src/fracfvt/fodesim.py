"""Caputo fractional initial-value problems ``D^alpha x = f(x)``, ``0 < alpha < 1``.

The solver is the fractional Adams-Bashforth-Moulton scheme in PECE form:
a product-rectangle predictor followed by one product-trapezoid
correction. Memory is global (every step sums over the whole history), so
a trajectory cannot be continued from its last state.

The remaining tools probe the claim that such systems have no nonconstant
periodic solutions: a period scan of the residual ``max |x(t+T) - x(t)|``,
the certificate integral ``int_0^T (T - tau)**(1 - alpha) x'(tau) dtau``
that any periodic solution would have to annihilate, and a check of the
frequency-side identity ``L{D^alpha x}(s) = s**(alpha - 1) L{x'}(s)``.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .fraccalc import SampledSignal, TimeGrid, product_trapezoid_weights, rl_integral
from .finval import extrapolate_to_zero
from .report import ReportRecord
from .xform import laplace_numeric

__all__ = [
    "BlowUpError",
    "FodeProblem",
    "PeriodScan",
    "RHS_REGISTRY",
    "RestartNotSupported",
    "Trajectory",
    "certificate_integral",
    "extend",
    "frequency_side_check",
    "make_rhs",
    "periodicity_residual",
    "solve",
    "solve_classical",
]

MAX_STEPS = 200_000
BLOW_UP_NORM = 1e12
DEFAULT_SKIP_FRACTION = 0.2


class BlowUpError(RuntimeError):
    pass


class RestartNotSupported(NotImplementedError):
    pass


class WindowError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FodeProblem:
    """``D^alpha x = rhs(x)`` on ``[0, horizon]`` with ``x(0) = x0`` and step ``h``."""

    alpha: float
    rhs: Callable
    x0: np.ndarray
    horizon: float
    h: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (self.h > 0 and self.horizon > 0):
            raise ValueError("horizon and step must be positive")
        steps = self.horizon / self.h
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps) or round(steps) < 1:
            raise ValueError(f"horizon / h = {steps} is not a positive integer")
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.ndim != 1:
            raise ValueError("initial state must be a vector")
        object.__setattr__(self, "x0", x0)

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.h))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Solver output: states on a uniform grid, shape ``(n, d)``."""

    grid: TimeGrid
    states: np.ndarray
    rhs_evals: int
    scheme: str
    alpha: float

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def as_signal(self) -> SampledSignal:
        return SampledSignal(self.grid, self.states)

    def __call__(self, t):
        return self.as_signal()(t)


def _lipschitz_estimate(rhs, x0: np.ndarray) -> float:
    f0 = np.asarray(rhs(x0), dtype=float)
    scale = max(1.0, float(np.max(np.abs(x0))))
    eps = 1e-6 * scale
    best = 0.0
    for i in range(x0.size):
        step = np.zeros_like(x0)
        step[i] = eps
        best = max(best, float(np.max(np.abs(np.asarray(rhs(x0 + step)) - f0))) / eps)
    return best


def _abm_weights(alpha: float, n: int):
    k = np.arange(n + 1, dtype=float)
    # predictor: (m+1)**a - m**a, written to avoid cancellation for large m
    pred = np.empty(n + 1)
    pred[0] = 1.0
    with np.errstate(divide="ignore"):
        pred[1:] = k[1:] ** alpha * np.expm1(alpha * np.log1p(1.0 / k[1:]))
    first, conv = product_trapezoid_weights(float(alpha), n + 2)
    return pred, first, conv


def solve(p: FodeProblem) -> Trajectory:
    """Integrate ``p`` with the fractional ABM predictor-corrector.

    Global error is ``O(h**(1 + alpha))`` for solutions whose Caputo
    derivative is smooth. When the solution behaves like ``t**alpha`` at
    the origin (the generic case) the first steps carry an ``O(h)`` error.
    """
    n = p.steps
    if n > MAX_STEPS:
        raise ValueError(f"{n} steps exceed the direct-history cap of {MAX_STEPS}")
    lip = _lipschitz_estimate(p.rhs, p.x0)
    if p.h**p.alpha * lip > 0.5:
        warnings.warn(
            f"h**alpha * L = {p.h**p.alpha * lip:.3g} > 0.5; the corrector may not contract",
            RuntimeWarning,
            stacklevel=2,
        )
    d = p.x0.size
    a = p.alpha
    x = np.empty((n + 1, d))
    fx = np.empty((n + 1, d))
    x[0] = p.x0
    fx[0] = p.rhs(p.x0)
    evals = 1
    pred_w, first, conv = _abm_weights(a, n)
    c_pred = p.h**a / math.gamma(a + 1.0)
    c_corr = p.h**a / math.gamma(a + 2.0)
    for k in range(n):
        # x_{k+1}; history weights run backwards over j = k..0
        xp = p.x0 + c_pred * (pred_w[k::-1] @ fx[: k + 1])
        fp = np.asarray(p.rhs(xp), dtype=float)
        hist = first[k + 1] * fx[0]
        if k >= 1:
            hist = hist + conv[k:0:-1] @ fx[1 : k + 1]
        x[k + 1] = p.x0 + c_corr * (fp + hist)
        fx[k + 1] = p.rhs(x[k + 1])
        evals += 2
        if not np.all(np.isfinite(x[k + 1])) or np.max(np.abs(x[k + 1])) > BLOW_UP_NORM:
            raise BlowUpError(f"solution blew up at t = {(k + 1) * p.h:g}")
    return Trajectory(TimeGrid(0.0, p.h, n + 1), x, evals, "abm_pece", a)


def extend(traj: Trajectory, extra_horizon: float) -> Trajectory:
    """Continuing a Caputo trajectory from its last state is not supported.

    The fractional derivative depends on the entire history, so a restart
    from ``x(t_end)`` would solve a different problem. Re-solve from ``t = 0``
    with the longer horizon instead.
    """
    raise RestartNotSupported(
        "Caputo trajectories carry global memory; re-solve from t = 0 with a longer horizon"
    )


def solve_classical(rhs, x0, horizon: float, h: float) -> Trajectory:
    """Classical (``alpha = 1``) reference solution by fixed-step RK4."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n = int(round(horizon / h))
    x = np.empty((n + 1, x0.size))
    x[0] = x0
    for k in range(n):
        y = x[k]
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        x[k + 1] = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Trajectory(TimeGrid(0.0, h, n + 1), x, 4 * n, "rk4", 1.0)


# -- right-hand side registry -------------------------------------------------


def _linear_decay(rate: float = 1.0):
    return lambda x: -rate * np.asarray(x, dtype=float)


def _rotation(omega: float = 1.0):
    def rhs(x):
        return np.array([-omega * x[1], omega * x[0]])

    return rhs


def _logistic(r: float = 1.0, K: float = 1.0):
    return lambda x: r * np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float) / K)


def _zero():
    return lambda x: np.zeros_like(np.asarray(x, dtype=float))


#: name -> (factory, default initial state)
RHS_REGISTRY: dict[str, tuple[Callable, list[float]]] = {
    "linear_decay": (_linear_decay, [1.0]),
    "rotation": (_rotation, [1.0, 0.0]),
    "logistic": (_logistic, [0.1]),
    "zero": (_zero, [1.0]),
}


def make_rhs(name: str, **params) -> tuple[Callable, np.ndarray]:
    if name not in RHS_REGISTRY:
        raise KeyError(f"unknown rhs {name!r}; known: {', '.join(sorted(RHS_REGISTRY))}")
    factory, x0 = RHS_REGISTRY[name]
    return factory(**params), np.array(x0, dtype=float)


# -- periodicity residual -----------------------------------------------------


@dataclass
class PeriodScan:
    """Residual ``max_t |x(t+T) - x(t)|_inf`` over a scan of candidate periods."""

    periods: np.ndarray
    residuals: np.ndarray
    best_T: float
    best_residual: float
    nonconstancy: float
    t_skip: float
    window: float
    extra: dict = field(default_factory=dict)

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.periods, self.residuals])

    @property
    def min_residual(self) -> float:
        return min(self.best_residual, float(np.min(self.residuals)))

    def near(self, T: float) -> tuple[float, float]:
        """Refined local minimum closest to ``T`` as ``(period, residual)``."""
        minima = self.extra.get("local_minima") or [(self.best_T, self.best_residual)]
        return min(minima, key=lambda m: abs(m[0] - T))


def _golden_min(func, a: float, b: float, iters: int = 60) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = func(d)
    return (c, fc) if fc < fd else (d, fd)


def _as_evaluator(x):
    if isinstance(x, (Trajectory, SampledSignal)):
        return x, x.grid
    return x, None


def periodicity_residual(
    x,
    T_candidates,
    window: float | None = None,
    *,
    t_skip: float | None = None,
    refine: bool = True,
    n_window: int = 2001,
) -> PeriodScan:
    """Scan candidate periods of a trajectory, sampled signal or callable.

    The first ``t_skip`` time units (default 20% of the horizon) are
    discarded as transient. Residuals use linear interpolation between grid
    nodes; a plain callable ``x(t)`` is evaluated directly and then both
    ``window`` and ``t_skip`` must be given. The best candidate is refined
    by golden-section search between its neighbours.
    """
    func, grid = _as_evaluator(x)
    periods = np.asarray(T_candidates, dtype=float)
    if periods.ndim != 1 or periods.size == 0 or np.any(periods <= 0):
        raise ValueError("period candidates must be positive")
    if grid is not None:
        horizon = grid.t_end
        if t_skip is None:
            t_skip = DEFAULT_SKIP_FRACTION * horizon
        if window is None:
            window = horizon - t_skip - periods.max()
        if window <= 0 or t_skip + window + periods.max() > horizon * (1 + 1e-12):
            raise WindowError(
                f"horizon {horizon:g} is too short for t_skip={t_skip:g}, "
                f"window={window:g}, max period {periods.max():g}"
            )
        t = grid.t
        t_win = t[(t >= t_skip - 1e-12) & (t <= t_skip + window + 1e-12)]
    else:
        if window is None or t_skip is None:
            raise WindowError("a callable signal needs explicit window and t_skip")
        t_win = np.linspace(t_skip, t_skip + window, n_window)

    base = np.asarray(func(t_win), dtype=float)
    base2 = base.reshape(len(t_win), -1)

    def residual(T: float) -> float:
        shifted = np.asarray(func(t_win + T), dtype=float).reshape(len(t_win), -1)
        return float(np.max(np.abs(shifted - base2)))

    res = np.array([residual(T) for T in periods])
    # every local minimum of the coarse scan is refined; the global one is reported
    minima = []
    for i in range(periods.size):
        left = res[i - 1] if i > 0 else np.inf
        right = res[i + 1] if i + 1 < periods.size else np.inf
        if res[i] <= left and res[i] <= right:
            T_i, r_i = float(periods[i]), float(res[i])
            if refine and periods.size >= 2:
                lo = periods[max(i - 1, 0)]
                hi = periods[min(i + 1, periods.size - 1)]
                T_ref, r_ref = _golden_min(residual, float(lo), float(hi))
                if r_ref < r_i:
                    T_i, r_i = T_ref, r_ref
            minima.append((T_i, r_i))
    best_T, best_res = min(minima, key=lambda m: m[1])
    nonconstancy = float(np.max(np.abs(base2 - base2.mean(axis=0))))
    return PeriodScan(
        periods, res, best_T, best_res, nonconstancy, float(t_skip), float(window),
        extra={"local_minima": minima},
    )


# -- certificate integral -----------------------------------------------------


def _samples_on(x, T: float, n: int, derivative=None):
    """Uniform samples of ``x'`` on ``[0, T]``."""
    if isinstance(x, (Trajectory, SampledSignal)):
        if T > x.grid.t_end * (1 + 1e-12):
            raise ValueError("T exceeds the sampled horizon")
        steps = T / x.grid.h
        if abs(steps - round(steps)) < 1e-9 * max(1.0, steps):
            m = int(round(steps)) + 1
            vals = np.asarray(x.states if isinstance(x, Trajectory) else x.values)[:m]
            h = x.grid.h
        else:
            tt = np.linspace(0.0, T, n)
            vals = np.asarray(x(tt))
            h = tt[1] - tt[0]
        return np.gradient(vals, h, axis=0, edge_order=2), h
    tt = np.linspace(0.0, T, n)
    h = tt[1] - tt[0]
    if derivative is not None:
        return np.asarray(derivative(tt), dtype=float), h
    return np.gradient(np.asarray(x(tt), dtype=float), h, axis=0, edge_order=2), h


def certificate_integral(x, T: float, alpha: float, *, derivative=None, n: int = 20001) -> float:
    """``C = int_0^T (T - tau)**(1 - alpha) x'(tau) dtau``.

    A nonconstant ``T``-periodic solution of a Caputo system of order
    ``alpha`` would force ``C = 0``; a clearly nonzero value rules the pair
    ``(x, T)`` out. Computed as ``Gamma(2 - alpha) I^(2 - alpha)[x'](T)`` with
    the product-trapezoid rule at the final node only. For vector signals
    the largest component magnitude is returned.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    dx, h = _samples_on(x, T, n, derivative)
    dx = dx.reshape(dx.shape[0], -1)
    m = dx.shape[0]
    order = 2.0 - alpha
    first, conv = product_trapezoid_weights(order, m)
    k = m - 1
    # node k of the convolution: conv[k - j] f_j for j = 1..k
    val = first[k] * dx[0] + conv[k - 1 :: -1][:k] @ dx[1:]
    val = val * h**order / math.gamma(order + 2.0) * math.gamma(order)
    out = np.abs(val) if val.size > 1 else val
    return float(np.max(out)) if val.size > 1 else float(val[0])


# -- frequency-side identity --------------------------------------------------


def frequency_side_check(
    x,
    alpha: float,
    T: float,
    *,
    s_seq=(0.05, 0.025, 0.0125, 0.00625),
    horizon: float | None = None,
    h: float = 0.01,
    derivative=None,
    tol: float = 1e-3,
) -> ReportRecord:
    """Compare ``s**alpha L{x'}(s)`` with ``s L{D^alpha x}(s)`` along ``s_seq``.

    The two agree exactly for any signal; the record also reports the mean
    of ``D^alpha x`` over ``[0, T]``, which the final-value theorem would
    tie to their common ``s -> 0`` limit if ``D^alpha x`` were periodic.
    The ``s -> 0`` extrapolation uses a polynomial in ``s**alpha``.
    """
    start = time.perf_counter()
    s_seq = np.asarray(s_seq, dtype=float)
    if isinstance(x, (Trajectory, SampledSignal)):
        sig = x.as_signal() if isinstance(x, Trajectory) else x
        dx = np.gradient(sig.values, sig.grid.h, axis=0, edge_order=2)
        grid = sig.grid
    else:
        if horizon is None:
            horizon = 30.0 / float(s_seq.min())
        grid = TimeGrid.span(horizon, h)
        if derivative is not None:
            dx = np.asarray(derivative(grid.t), dtype=float)
        else:
            dx = np.gradient(np.asarray(x(grid.t), dtype=float), grid.h, axis=0, edge_order=2)
    dsig = SampledSignal(grid, dx)
    caputo = rl_integral(dsig, 1.0 - alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        A = np.array([np.max(np.real(s**alpha * laplace_numeric(dsig, s))) for s in s_seq])
        B = np.array([np.max(np.real(s * laplace_numeric(caputo, s))) for s in s_seq])
    u = s_seq**alpha
    deg = min(3, len(s_seq) - 1)
    A0 = extrapolate_to_zero(u, A, deg)
    B0 = extrapolate_to_zero(u, B, deg)
    m = int(round(T / grid.h)) + 1
    vals = caputo.values[:m]
    mean = integrate.simpson(vals, dx=grid.h, axis=0) / T
    gap = float(np.max(np.abs(A - B)))
    return ReportRecord(
        experiment_id=f"frequency_side:alpha={alpha:g}:T={T:g}",
        inputs={"alpha": alpha, "T": T, "s_seq": s_seq, "h": grid.h, "horizon": grid.t_end},
        outputs={
            "s_alpha_L_dx": A,
            "s_L_caputo": B,
            "limit_s_alpha_L_dx": A0,
            "limit_s_L_caputo": B0,
            "mean_caputo": float(np.max(np.abs(mean))) if np.ndim(mean) else float(mean),
            "gap_identity": gap,
        },
        status="pass" if gap <= tol else "fail",
        tolerances={"gap_identity": tol},
        wall_time_ms=int(1000 * (time.perf_counter() - start)),
    )
