"""Laplace transforms: numeric evaluation, a catalog of closed forms, and
the kernel-integral representation of the transform of a Cesàro profile.

Transforms are taken along ``Re(s) > 0`` only. Long, oscillatory Laplace
integrals are done with fixed-order Gauss-Legendre panels whose width is
tied to the oscillation wavelength, since plain adaptive quadrature badly
misjudges cancellation for integrands like ``t**q sin(w t)``.
"""

from __future__ import annotations

import cmath
import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np
from scipy import integrate, special

from .fraccalc import SampledSignal
from .specfun import beta, binomial_coefficient, log_pochhammer

__all__ = [
    "CATALOG",
    "CatalogFunction",
    "ComplexFreq",
    "KernelIntegralError",
    "LaplaceTruncationError",
    "binomial_kernel_expansion",
    "catalog_names",
    "catalog_tq_sin",
    "cesaro_mean_substituted",
    "kernel_integral",
    "kernel_power_integral",
    "laplace_numeric",
    "make_catalog_function",
    "moment_vanishing_test",
    "tq_sin_profile_series",
    "pochhammer_series_partial_sums",
]

#: Horizon beyond which a Laplace integral is declared non-convergent.
T_MAX_CAP = 1e6
_GL_NODES = 16
_FINE_WIDTH = 0.25


class LaplaceTruncationError(RuntimeError):
    """The truncated Laplace integral cannot reach its accuracy target."""


class KernelIntegralError(RuntimeError):
    """The transform does not decay fast enough for the kernel integral."""


class LaplaceTruncationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ComplexFreq:
    """A Laplace variable in the open right half plane."""

    s: complex

    def __post_init__(self):
        if not complex(self.s).real > 0:
            raise ValueError(f"Re(s) must be positive, got s = {self.s}")

    def __complex__(self):
        return complex(self.s)


def _freq(s) -> complex:
    return complex(s.s) if isinstance(s, ComplexFreq) else complex(s)


@dataclass(frozen=True, eq=False)
class CatalogFunction:
    """A named test function with closed-form time values.

    ``exp_order_c`` is the abscissa of convergence used for truncation:
    numeric transforms are only attempted for ``Re(s) > exp_order_c``.
    ``omega`` is the dominant angular frequency, if known, used to size
    quadrature panels.
    """

    name: str
    time_eval: Callable
    transform_eval: Callable | None = None
    exp_order_c: float = 0.0
    period_T: float | None = None
    known_sF_limit: float | None = None
    derivative_eval: Callable | None = None
    omega: float | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.time_eval(np.asarray(t, dtype=float))

    def transform(self, s):
        if self.transform_eval is None:
            return laplace_numeric(self, s)
        return self.transform_eval(_freq(s))

    def validate(self, seed: int = 0) -> None:
        """Check the closed forms against numeric quadrature.

        Raises ``ValueError`` on a mismatch.
        """
        rng = np.random.default_rng(seed)
        c = self.exp_order_c
        if self.transform_eval is not None:
            probes = c + np.array([0.3, 0.7, 1.3, 2.2, 4.0]) + 1j * rng.uniform(-1, 1, 5)
            for s in probes:
                ref = complex(self.transform_eval(complex(s)))
                num = laplace_numeric(self, complex(s))
                if abs(num - ref) > 1e-6 * max(abs(ref), 1e-12):
                    raise ValueError(
                        f"{self.name}: closed-form transform {ref} disagrees with "
                        f"numeric value {num} at s = {s}"
                    )
        if self.period_T is not None:
            t = rng.uniform(0, 100, 100)
            gap = np.abs(self(t + self.period_T) - self(t))
            if gap.max() > 1e-10:
                raise ValueError(f"{self.name}: not periodic with T = {self.period_T}")

    def to_record(self) -> dict:
        return {
            "name": self.name,
            "params": dict(self.params),
            "c": self.exp_order_c,
            "T": self.period_T,
            "known_sF_limit": self.known_sF_limit,
        }


# -- quadrature helpers -------------------------------------------------------


@functools.lru_cache(maxsize=8)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


@functools.lru_cache(maxsize=32)
def _gauss_jacobi(n: int, alpha: float):
    return special.roots_jacobi(n, alpha, 0.0)


def _panel_edges(a: float, b: float, max_width: float) -> np.ndarray:
    """Panel edges on ``[a, b]``: width ``max(0.25, x/8)`` near the origin,
    growing geometrically, and capped at ``max_width``.

    The grading resolves transients at small ``t`` without paying for fine
    panels over the whole horizon.
    """
    fine = min(max_width, _FINE_WIDTH)
    pieces = []
    x = a
    # uniform fine panels up to x = 8 * fine, where x/8 starts to exceed it
    knee = min(b, max(a, 8.0 * fine))
    if knee > x:
        n = max(1, int(math.ceil((knee - x) / fine)))
        pieces.append(np.linspace(x, knee, n + 1))
        x = knee
    # geometric growth (ratio 9/8) until the width reaches max_width
    cap = min(b, max(x, 8.0 * max_width))
    if cap > x:
        n = max(1, int(math.ceil(math.log(cap / x) / math.log(1.125))))
        pieces.append(np.geomspace(x, cap, n + 1))
        x = cap
    if b > x:
        n = max(1, int(math.ceil((b - x) / max_width)))
        pieces.append(np.linspace(x, b, n + 1))
    if not pieces:
        return np.array([a, b])
    edges = np.concatenate([pieces[0]] + [p[1:] for p in pieces[1:]])
    return edges


def _panel_nodes(a: float, b: float, max_width: float, edges=None):
    """Gauss-Legendre nodes and weights on graded panels of ``[a, b]``."""
    if edges is None:
        edges = _panel_edges(a, b, max_width)
    x, w = _gauss_legendre(_GL_NODES)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _estimate_half_period(func: Callable, span: float) -> float:
    """Half-period estimate from the number of mean crossings on ``[0, span]``."""
    t = np.linspace(0.0, span, 4097)
    y = np.real(func(t))
    y = y - y.mean()
    crossings = np.count_nonzero(np.signbit(y[1:]) != np.signbit(y[:-1]))
    return span / crossings if crossings >= 2 else math.inf


def _oscillation_scale(f: CatalogFunction | Callable, s: complex, span: float) -> float:
    omega = getattr(f, "omega", None)
    half = math.pi / omega if omega else _estimate_half_period(f, span)
    if s.imag != 0:
        half = min(half, math.pi / abs(s.imag))
    return half


def _laplace_callable(func, s: complex, c: float, osc: float, tol: float) -> complex:
    rate = s.real - max(c, 0.0)
    if rate <= 0:
        raise LaplaceTruncationError(
            f"Re(s) = {s.real:g} is not inside the region of convergence Re(s) > {c:g}"
        )
    width = min(osc, 1.0 / rate) / 8.0
    chunk = 10.0 / rate
    total = 0.0j
    a = 0.0
    while True:
        b = a + chunk
        if b > T_MAX_CAP:
            raise LaplaceTruncationError(
                f"Laplace integral at s = {s} needs a horizon beyond {T_MAX_CAP:g}"
            )
        t, w = _panel_nodes(a, b, width)
        total += np.sum(w * np.exp(-s * t) * func(t))
        # sup of the integrand on the next chunk bounds the remaining tail
        probe = np.linspace(b, b + chunk, 2049)
        tail = np.max(np.abs(np.exp(-s * probe) * func(probe))) / rate
        if tail <= tol * max(abs(total), 1e-300):
            return complex(total)
        a = b


def _laplace_sampled(f: SampledSignal, s: complex):
    t = f.t
    kernel = np.exp(-s * t)
    vals = f.values if f.values.ndim == 1 else f.values.T
    out = integrate.simpson(kernel * vals, dx=f.grid.h, axis=-1)
    end = np.max(np.abs(np.exp(-s * t[-1]) * vals[..., -1])) / s.real
    if end > 1e-8 * max(np.max(np.abs(out)), 1e-300):
        warnings.warn(
            f"sampled Laplace transform at s = {s} is truncated at t = {t[-1]:g}; "
            f"tail bound {end:.2e}",
            LaplaceTruncationWarning,
            stacklevel=3,
        )
    return complex(out) if np.ndim(out) == 0 else np.asarray(out, dtype=complex)


def laplace_numeric(f, s, *, tol: float = 1e-10):
    """Numeric Laplace transform ``int_0^inf exp(-s t) f(t) dt``.

    ``f`` may be a :class:`CatalogFunction`, a plain vectorized callable
    (treated as bounded, of order ``c = 0``) or a :class:`SampledSignal`.
    For callables the horizon grows until the tail bound falls below
    ``tol`` times the accumulated value; exceeding ``T_MAX_CAP`` raises
    :class:`LaplaceTruncationError`. A sampled signal is integrated over its
    grid only (zero beyond it), with a warning when that truncation is
    visible at the requested accuracy.
    """
    s = _freq(s)
    if s.real <= 0:
        raise LaplaceTruncationError(f"Re(s) must be positive, got {s}")
    if isinstance(f, SampledSignal):
        return _laplace_sampled(f, s)
    c = f.exp_order_c if isinstance(f, CatalogFunction) else 0.0
    span = min(10.0 / max(s.real - max(c, 0.0), 1e-12), 200.0)
    osc = _oscillation_scale(f, s, span)
    return _laplace_callable(f, s, c, osc, tol)


# -- catalog -----------------------------------------------------------------


def catalog_tq_sin(q: float, omega: float) -> CatalogFunction:
    """``t**q sin(omega t)`` with its closed-form transform.

    ``F(s) = Gamma(q+1) [(s + i w)**(q+1) - (s - i w)**(q+1)] / (2i (s**2 + w**2)**(q+1))``
    on the principal branch, which is analytic in the open right half plane.
    """
    if q < 0 or not omega > 0:
        raise ValueError("tq_sin needs q >= 0 and omega > 0")
    gq = math.gamma(q + 1.0)
    p = q + 1.0

    def time_eval(t):
        return np.asarray(t, dtype=float) ** q * np.sin(omega * t)

    def transform_eval(s):
        s = complex(s)
        up, dn = s + 1j * omega, s - 1j * omega
        # (s^2 + w^2)^p = ((s + iw)(s - iw))^p; split it per factor so the
        # principal branch stays continuous on Re(s) > 0
        num = cmath.exp(p * cmath.log(up)) - cmath.exp(p * cmath.log(dn))
        den = 2j * cmath.exp(p * (cmath.log(up) + cmath.log(dn)))
        return gq * num / den

    def derivative_eval(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lead = np.where(t > 0, q * t ** (q - 1.0), 0.0) if q > 0 else 0.0
        return lead * np.sin(omega * t) + omega * t**q * np.cos(omega * t)

    return CatalogFunction(
        name="tq_sin",
        time_eval=time_eval,
        transform_eval=transform_eval,
        exp_order_c=0.0,
        period_T=(2 * math.pi / omega) if q == 0 else None,
        known_sF_limit=0.0,
        derivative_eval=derivative_eval,
        omega=omega,
        params={"q": q, "omega": omega},
    )


def _const(c: float = 1.0, name: str = "const") -> CatalogFunction:
    return CatalogFunction(
        name=name,
        time_eval=lambda t: np.full(np.shape(t), float(c)),
        transform_eval=lambda s: c / complex(s),
        period_T=1.0,
        known_sF_limit=float(c),
        derivative_eval=lambda t: np.zeros(np.shape(t)),
        params={"c": c},
    )


def _exp_decay(rate: float = 1.0) -> CatalogFunction:
    return CatalogFunction(
        name="exp_decay",
        time_eval=lambda t: np.exp(-rate * np.asarray(t, dtype=float)),
        transform_eval=lambda s: 1.0 / (complex(s) + rate),
        known_sF_limit=0.0,
        derivative_eval=lambda t: -rate * np.exp(-rate * np.asarray(t, dtype=float)),
        params={"rate": rate},
    )


def _offset_cos(offset: float = 2.0, omega: float = 3.0, name: str = "offset_cos"):
    return CatalogFunction(
        name=name,
        time_eval=lambda t: offset + np.cos(omega * np.asarray(t, dtype=float)),
        transform_eval=lambda s: offset / complex(s) + complex(s) / (complex(s) ** 2 + omega**2),
        period_T=2 * math.pi / omega,
        known_sF_limit=float(offset),
        derivative_eval=lambda t: -omega * np.sin(omega * np.asarray(t, dtype=float)),
        omega=omega,
        params={"offset": offset, "omega": omega},
    )


def _sin(omega: float = 1.0) -> CatalogFunction:
    return CatalogFunction(
        name="sin",
        time_eval=lambda t: np.sin(omega * np.asarray(t, dtype=float)),
        transform_eval=lambda s: omega / (complex(s) ** 2 + omega**2),
        period_T=2 * math.pi / omega,
        known_sF_limit=0.0,
        derivative_eval=lambda t: omega * np.cos(omega * np.asarray(t, dtype=float)),
        omega=omega,
        params={"omega": omega},
    )


def _cos(omega: float = 1.0) -> CatalogFunction:
    return CatalogFunction(
        name="cos",
        time_eval=lambda t: np.cos(omega * np.asarray(t, dtype=float)),
        transform_eval=lambda s: complex(s) / (complex(s) ** 2 + omega**2),
        period_T=2 * math.pi / omega,
        known_sF_limit=0.0,
        derivative_eval=lambda t: -omega * np.sin(omega * np.asarray(t, dtype=float)),
        omega=omega,
        params={"omega": omega},
    )


#: Factories by catalog name; parameters are passed as keyword arguments.
CATALOG: dict[str, Callable[..., CatalogFunction]] = {
    "const1": lambda: _const(1.0, name="const1"),
    "const": _const,
    "exp_decay": _exp_decay,
    "two_plus_cos3": lambda: _offset_cos(2.0, 3.0, name="two_plus_cos3"),
    "offset_cos": _offset_cos,
    "sin": _sin,
    "cos": _cos,
    "tq_sin": catalog_tq_sin,
}


def catalog_names() -> list[str]:
    return sorted(CATALOG)


@functools.lru_cache(maxsize=64)
def _make_cached(name: str, items: tuple) -> CatalogFunction:
    entry = CATALOG[name](**dict(items))
    entry.validate()
    return entry


def make_catalog_function(name: str, **params) -> CatalogFunction:
    """Build and validate a catalog entry. Unknown names raise ``KeyError``."""
    if name not in CATALOG:
        raise KeyError(f"unknown catalog function {name!r}; known: {', '.join(catalog_names())}")
    return _make_cached(name, tuple(sorted(params.items())))


# -- kernel integral and its series reductions -------------------------------


def _quad_complex(func, a, b, **kw) -> complex:
    re = integrate.quad(lambda v: func(v).real, a, b, **kw)[0]
    im = integrate.quad(lambda v: func(v).imag, a, b, **kw)[0]
    return complex(re, im)


# v-panels for the substituted integral: the integrand F(s/v)/v has its
# structure where |s/v| is comparable to the scales of F, so split
# logarithmically down to v = 1e-12
_V_EDGES = np.concatenate([[0.0], np.logspace(-12, -1, 12), [1.0]])


def _check_tail(F, s: complex) -> None:
    probe = [abs(complex(F(s / v))) / v for v in (1e-3, 1e-6, 1e-9)]
    if not np.all(np.isfinite(probe)) or probe[-1] > 10.0 * max(probe[:2]) + 1e-300:
        raise KernelIntegralError(
            f"|F(s/v)|/v grows as v -> 0 (samples {probe}); F must decay like 1/s"
        )


def kernel_power_integral(F, j: int, s) -> complex:
    """``int_1^inf F(s u) / u**(j+1) du``, i.e. ``int_0^1 F(s/v) v**(j-1) dv``."""
    s = _freq(s)
    _check_tail(F, s)

    def integrand(v):
        return complex(F(s / v)) * v ** (j - 1)

    opts = dict(limit=200, epsabs=1e-14, epsrel=1e-12)
    return sum(_quad_complex(integrand, a, b, **opts) for a, b in zip(_V_EDGES[:-1], _V_EDGES[1:]))


def kernel_integral(F, alpha: float, s) -> complex:
    """``int_1^inf F(s u)/u (1 - 1/u)**alpha du``.

    This equals the Laplace transform, at ``s``, of the order-``alpha``
    Cesàro profile of the function whose transform is ``F``. With
    ``v = 1/u`` it becomes ``int_0^1 F(s/v) (1 - v)**alpha / v dv``; the
    factor ``(1 - v)**alpha`` on the last panel is handled as an algebraic
    quadrature weight.
    """
    if alpha < 0:
        raise ValueError("kernel_integral needs alpha >= 0")
    s = _freq(s)
    if s.real <= 0:
        raise ValueError(f"Re(s) must be positive, got {s}")
    _check_tail(F, s)
    opts = dict(limit=200, epsabs=1e-14, epsrel=1e-12)

    def plain(v):
        return complex(F(s / v)) * (1.0 - v) ** alpha / v

    def unweighted(v):
        return complex(F(s / v)) / v

    edges = _V_EDGES
    total = sum(_quad_complex(plain, a, b, **opts) for a, b in zip(edges[:-2], edges[1:-1]))
    a = edges[-2]
    if alpha == 0:
        total += _quad_complex(unweighted, a, 1.0, **opts)
    else:
        total += _quad_complex(unweighted, a, 1.0, weight="alg", wvar=(0.0, alpha), **opts)
    return total


def binomial_kernel_expansion(F, alpha: int, s) -> tuple[complex, list[complex]]:
    """Integer-``alpha`` expansion of the kernel integral, term by term.

    ``(1 - 1/u)**alpha = sum_j C(alpha, j) (-1)**j u**-j`` turns the kernel
    integral into a finite combination of :func:`kernel_power_integral`.
    Returns the sum and the individual terms.
    """
    if alpha < 0 or int(alpha) != alpha:
        raise ValueError("binomial expansion needs a non-negative integer alpha")
    alpha = int(alpha)
    terms = [
        math.comb(alpha, j) * (-1) ** j * kernel_power_integral(F, j, s)
        for j in range(alpha + 1)
    ]
    return sum(terms), terms


def pochhammer_series_partial_sums(alpha: float, n_max: int) -> np.ndarray:
    """Partial sums of ``sum_n (-alpha)_n / (n! (n+1))`` for ``n = 0..n_max``.

    The series is ``int_0^1 (1 - x)**alpha dx = 1/(alpha + 1)`` expanded
    binomially. Terms are formed in log-space, so ``n_max`` in the millions
    is fine.
    """
    n = np.arange(n_max + 1)
    sign, logabs = log_pochhammer(-alpha, n)
    terms = sign * np.exp(logabs - special.gammaln(n + 1.0)) / (n + 1.0)
    return np.cumsum(terms)


# -- time-side Cesàro mean of a catalog function ------------------------------


def cesaro_mean_substituted(f, alpha: float, t: float, *, half_period: float | None = None) -> float:
    """``Gamma(a+1) I^(a+1) f(t) / t^(a+1) = int_0^1 (1-u)**a f(t u) du``.

    Evaluated as ``(1/t) int_0^t (1 - tau/t)**a f(tau) dtau`` with
    Gauss-Legendre panels and a Gauss-Jacobi rule on the last panel, where
    ``(1 - tau/t)**a`` is not smooth.
    """
    if t <= 0:
        return float(np.real(f(np.array([0.0]))[0])) / (alpha + 1.0)
    if half_period is None:
        half_period = _oscillation_scale(f, 0j, min(t, 200.0))
    edges = _panel_edges(0.0, t, min(half_period / 8.0, t / 8.0))
    nodes, weights = _panel_nodes(0.0, t, 0.0, edges=edges[:-1])
    body = np.sum(weights * (1.0 - nodes / t) ** alpha * f(nodes)) if len(edges) > 2 else 0.0
    x, w = _gauss_jacobi(_GL_NODES, float(alpha))
    half = 0.5 * (t - edges[-2])
    tail_nodes = edges[-2] + half * (x + 1.0)
    tail = (half / t) ** alpha * half * np.sum(w * f(tail_nodes))
    return float(np.real(body + tail) / t)


def tq_sin_profile_series(q: float, omega: float, alpha: float, t: float) -> float:
    """Order-``alpha`` Cesàro profile of ``t**q sin(omega t)`` in closed form.

    ``int_0^1 (1-u)**a (tu)**q sin(w t u) du`` expands termwise into
    ``B(a+1, q+2) w t**(q+1) 2F3(q/2+1, (q+3)/2; 3/2, (q+a+3)/2, (q+a)/2+2; -(w t)**2/4)``.
    The hypergeometric sum cancels heavily for large ``w t``; mpmath raises
    its working precision to compensate.
    """
    z = -((omega * t) ** 2) / 4.0
    series = mpmath.hyp2f3(q / 2 + 1, (q + 3) / 2, 1.5, (q + alpha + 3) / 2, (q + alpha) / 2 + 2, z)
    return beta(alpha + 1.0, q + 2.0) * omega * t ** (q + 1.0) * float(series)


# -- finite surrogate of the moment-vanishing uniqueness test -----------------


def moment_vanishing_test(
    f: SampledSignal, s0: float, l: float, n_max: int, tol: float, *, scale: float = 1.0
) -> tuple[bool, np.ndarray]:
    """Check ``F(s0 + n l) ~ 0`` for ``n = 0..n_max``.

    ``f`` is extended by zero beyond its grid. Returns ``(passed, moments)``
    where ``passed`` means every ``|moment_n| <= tol * scale``. This is a
    finite surrogate: ``True`` is evidence that ``f`` vanishes, not proof.
    """
    if not (s0 > 0 and l > 0):
        raise ValueError("s0 and l must be positive")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LaplaceTruncationWarning)
        moments = np.array(
            [laplace_numeric(f, s0 + n * l) for n in range(n_max + 1)], dtype=complex
        )
    if np.all(np.abs(moments.imag) <= 1e-300):
        moments = moments.real
    passed = bool(np.all(np.abs(moments) <= tol * scale))
    return passed, moments
