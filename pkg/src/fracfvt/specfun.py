"""Special functions: gamma, beta, Pochhammer symbols, Mittag-Leffler.

Everything that multiplies many factors together is evaluated in log-space
with the sign carried separately, so ratios such as ``(-a)_n / n!`` stay
finite for ``n`` in the millions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special

__all__ = [
    "MLParams",
    "SpecialFunctionError",
    "beta",
    "binomial_coefficient",
    "gamma",
    "gamma_ratio_decay",
    "log_gamma",
    "log_pochhammer",
    "mittag_leffler",
    "pochhammer",
]

#: Largest ``|z|`` accepted by :func:`mittag_leffler`.
ML_SAFE_RADIUS = 30.0
_ML_MAX_TERMS = 20000


class SpecialFunctionError(ValueError):
    """Raised for arguments outside the domain of a special function."""


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x: float) -> float:
    """Gamma function for real ``x`` away from the poles ``0, -1, -2, ...``."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise SpecialFunctionError(f"gamma has a pole at x = {x:g}")
    return math.gamma(x)


def log_gamma(x: float) -> tuple[float, float]:
    """Return ``(sign, log|Gamma(x)|)``."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise SpecialFunctionError(f"gamma has a pole at x = {x:g}")
    return float(special.gammasgn(x)), math.lgamma(x)


def beta(a: float, b: float) -> float:
    """Beta function ``Gamma(a) Gamma(b) / Gamma(a + b)`` for ``a, b > 0``."""
    if a <= 0 or b <= 0:
        raise SpecialFunctionError(f"beta requires a, b > 0 (got a={a}, b={b})")
    # the sum lgamma(a) + lgamma(b) is commutative, so beta(a, b) == beta(b, a)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def pochhammer(x: float, n: int) -> float:
    """Rising factorial ``(x)_n = x (x+1) ... (x+n-1)``.

    Computed as a plain running product, so integer inputs give exact
    integers while they are representable. Overflow saturates to +-inf.
    """
    if n < 0:
        raise SpecialFunctionError("pochhammer requires n >= 0")
    out = 1.0
    with np.errstate(over="ignore"):
        for j in range(n):
            out = float(np.float64(out) * np.float64(x + j))
    return out


def log_pochhammer(x: float, n):
    """Sign and log-magnitude of ``(x)_n``, vectorized over ``n``.

    Returns ``(sign, logabs)`` arrays broadcast against ``n``. A zero factor
    (``x`` a non-positive integer with ``n > -x``) gives ``sign = 0`` and
    ``logabs = -inf``.
    """
    n = np.asarray(n)
    if np.any(n < 0):
        raise SpecialFunctionError("log_pochhammer requires n >= 0")
    nf = n.astype(float)
    if _is_nonpositive_integer(x):
        # the product reaches the factor 0 once n > -x
        m = int(-x)
        sign = np.where(n > m, 0.0, np.where(n % 2 == 0, 1.0, -1.0))
        k = np.minimum(nf, m)
        with np.errstate(divide="ignore"):
            logabs = np.where(
                n > m, -np.inf, special.gammaln(m + 1) - special.gammaln(m - k + 1)
            )
        return sign, logabs
    xn = x + nf
    sign = special.gammasgn(xn) * special.gammasgn(x)
    logabs = special.gammaln(xn) - special.gammaln(x)
    # gammaln(x + n) is infinite only at its poles; those products contain a zero
    hit = (xn <= 0) & (np.floor(xn) == xn)
    if np.any(hit):
        sign = np.where(hit, 0.0, sign)
        logabs = np.where(hit, -np.inf, logabs)
    return sign, logabs


def binomial_coefficient(a: float, n):
    """Generalized binomial coefficient ``C(a, n) = (-1)^n (-a)_n / n!``."""
    n = np.asarray(n)
    sign, logabs = log_pochhammer(-a, n)
    parity = np.where(n % 2 == 0, 1.0, -1.0)
    return parity * sign * np.exp(logabs - special.gammaln(n + 1.0))


def gamma_ratio_decay(alpha: float, n):
    """``|(-alpha)_n| / n!`` evaluated in log-space.

    For non-integer ``alpha`` this behaves like ``n**-(alpha + 1) / |Gamma(-alpha)|``
    as ``n`` grows, which is what makes the binomial series of
    ``(1 - 1/u)**alpha`` absolutely summable.
    """
    if alpha <= 0:
        raise SpecialFunctionError("gamma_ratio_decay requires alpha > 0")
    n = np.asarray(n)
    if np.any(n < 1):
        raise SpecialFunctionError("gamma_ratio_decay requires n >= 1")
    sign, logabs = log_pochhammer(-alpha, n)
    out = np.where(sign == 0, 0.0, np.exp(logabs - special.gammaln(n + 1.0)))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MLParams:
    """Arguments of the one-parameter Mittag-Leffler function ``E_alpha(z)``."""

    alpha: float
    z: complex | float
    tol: float = 1e-15

    def __post_init__(self):
        if not self.alpha > 0:
            raise SpecialFunctionError("Mittag-Leffler order must be positive")
        if not self.tol > 0:
            raise SpecialFunctionError("tolerance must be positive")


def mittag_leffler(p: MLParams) -> float | complex:
    r"""Evaluate :math:`E_\alpha(z) = \sum_k z^k / \Gamma(\alpha k + 1)`.

    The series is summed directly with a working precision large enough to
    absorb the cancellation between the largest term and the result. Only
    ``|z| <= 30`` is accepted; this is a test oracle, not a general-purpose
    evaluator.
    """
    z = complex(p.z)
    az = abs(z)
    if az > ML_SAFE_RADIUS:
        raise SpecialFunctionError(
            f"|z| = {az:g} is outside the series safe radius {ML_SAFE_RADIUS:g}"
        )
    if az == 0.0:
        return complex(1.0) if isinstance(p.z, complex) else 1.0

    # log-magnitudes of the terms decide both the truncation point and how
    # many digits the cancellation between the largest term and the sum eats
    k = np.arange(0, _ML_MAX_TERMS)
    with np.errstate(divide="ignore"):
        log_terms = k * math.log(az) - special.gammaln(p.alpha * k + 1.0)
    peak = float(log_terms.max())
    # the sum can be far smaller than 1 (E_1(-30) ~ 1e-13), so truncate well
    # below the absolute tolerance
    log_tol = math.log(p.tol) - 40.0
    past_peak = np.nonzero(
        (k > int(np.argmax(log_terms))) & (log_terms < log_tol + min(0.0, peak))
    )[0]
    if past_peak.size == 0:
        raise SpecialFunctionError(
            f"Mittag-Leffler series for alpha={p.alpha:g}, |z|={az:g} needs more "
            f"than {_ML_MAX_TERMS} terms"
        )
    n_terms = int(past_peak[0]) + 1
    dps = int(30 + max(0.0, peak) / math.log(10.0))

    with mpmath.workdps(dps):
        zz = mpmath.mpc(z.real, z.imag)
        total = mpmath.fsum(
            zz**j / mpmath.gamma(p.alpha * j + 1) for j in range(n_terms)
        )
        val = complex(total)
    if isinstance(p.z, complex):
        return val
    return val.real
