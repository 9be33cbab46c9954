"""Bessel and Gamma function evaluation.

The production entry points are :func:`bessel_j`, :func:`normalized_bessel`
and :func:`log_gamma`. They are vectorized over ``z`` and backed by
``scipy.special``. Two independent evaluation paths for :math:`J_\\nu` are
kept next to them: the ascending power series and the Hankel large-argument
expansion. :func:`bessel_j_hybrid` stitches them together at a per-order
switchover point, and the test-suite uses them to cross-check the production
path.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

__all__ = [
    "DomainError",
    "bessel_j",
    "bessel_j_series",
    "bessel_j_asymptotic",
    "bessel_j_hybrid",
    "switchover_point",
    "normalized_bessel",
    "normalized_bessel_series",
    "log_gamma",
]

_EPS = np.finfo(float).eps

# below this |z| the normalized function is summed directly (no quotient)
_NORMALIZED_SERIES_CUTOFF = 1.0


class DomainError(ValueError):
    """Argument outside the domain of a numerical routine."""


def _check_order(order: float) -> float:
    order = float(order)
    if not math.isfinite(order) or order <= -0.5:
        raise DomainError(f"Bessel order must be finite and > -1/2, got {order}")
    return order


def _as_finite(z, *, nonnegative: bool) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError("non-finite argument")
    if nonnegative and np.any(z < 0):
        raise DomainError("argument must be nonnegative")
    return z


def log_gamma(x):
    """Natural logarithm of the Gamma function for ``x > 0``."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)) or np.any(xa <= 0):
        raise DomainError("log_gamma requires finite x > 0")
    out = sp.gammaln(xa)
    return float(out) if out.ndim == 0 else out


def bessel_j(order: float, z):
    """Bessel function of the first kind :math:`J_\\nu(z)` for ``z >= 0``.

    Parameters
    ----------
    order : float
        Order :math:`\\nu > -1/2`.
    z : array_like
        Nonnegative, finite arguments.

    Returns
    -------
    float or ndarray
        Same shape as ``z``.
    """
    nu = _check_order(order)
    za = _as_finite(z, nonnegative=True)
    out = sp.jv(nu, za)
    if nu < 0:
        # J_nu(0) is +inf for -1/2 < nu < 0; keep the limit explicit
        out = np.where(za == 0, np.inf, out)
    return float(out) if out.ndim == 0 else out


def bessel_j_series(order: float, z, max_terms: int = 400):
    """Ascending power series for :math:`J_\\nu(z)`.

    Terms are accumulated with the ratio recurrence and the prefactor
    :math:`(z/2)^\\nu/\\Gamma(\\nu+1)` is applied in log space. Accurate to
    roundoff for moderate ``z``; cancellation grows like ``e^z``.
    """
    nu = _check_order(order)
    za = _as_finite(z, nonnegative=True)
    s = _normalized_series(nu, za, max_terms)
    with np.errstate(divide="ignore"):
        logpre = nu * np.log(za / 2.0) - sp.gammaln(nu + 1.0)
    out = np.where(za == 0, 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf), s * np.exp(logpre))
    return float(out) if out.ndim == 0 else out


def _normalized_series(nu: float, z: np.ndarray, max_terms: int) -> np.ndarray:
    q = -(z * z) / 4.0
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, max_terms + 1):
        term = term * q / (k * (nu + k))
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return total


def _hankel_terms(nu: float, z: np.ndarray, max_terms: int = 60):
    """Optimally truncated Hankel P, Q sums and the smallest term used."""
    mu = 4.0 * nu * nu
    # half-integer orders: the expansion terminates and is exact
    terminating = float(nu + 0.5).is_integer()
    if terminating:
        max_terms = int(nu + 0.5)
    P = np.ones_like(z)
    Q = np.zeros_like(z)
    a = np.ones_like(z)  # a_k(nu) / z^k, running
    last = np.full_like(z, np.inf)
    active = np.ones(z.shape, dtype=bool)
    smallest = np.full_like(z, np.inf)
    for k in range(1, max_terms + 1):
        a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = np.abs(a)
        # stop each lane once the terms start growing (optimal truncation)
        if not terminating:
            active &= mag < last
        if not np.any(active):
            break
        sign = (-1) ** (k // 2)
        if k % 2 == 0:
            P = np.where(active, P + sign * a, P)
        else:
            Q = np.where(active, Q + sign * a, Q)
        smallest = np.where(active, mag, smallest)
        last = np.where(active, mag, last)
    if terminating:
        smallest = np.zeros_like(z)
    return P, Q, smallest


def bessel_j_asymptotic(order: float, z):
    """Hankel large-argument expansion of :math:`J_\\nu(z)`, ``z > 0``.

    The P and Q series are cut at their smallest term, so the result is
    as good as the asymptotic series allows at the given ``z``.
    """
    nu = _check_order(order)
    za = _as_finite(z, nonnegative=True)
    if np.any(za == 0):
        raise DomainError("asymptotic expansion needs z > 0")
    P, Q, _ = _hankel_terms(nu, za)
    w = za - (0.5 * nu + 0.25) * np.pi
    out = np.sqrt(2.0 / (np.pi * za)) * (P * np.cos(w) - Q * np.sin(w))
    return float(out) if out.ndim == 0 else out


def _series_roundoff(nu: float, z: float) -> float:
    # largest term of the normalized series, times eps, times the prefactor,
    # over the envelope sqrt(2/(pi z))
    q = z * z / 4.0
    k_peak = max(0, int(math.floor(math.sqrt(q))))
    logt = sum(math.log(q / (k * (nu + k))) for k in range(1, k_peak + 1))
    logpre = nu * math.log(z / 2.0) - math.lgamma(nu + 1.0)
    env = math.sqrt(2.0 / (math.pi * z))
    return _EPS * math.exp(logt + logpre) / env


def _hankel_truncation(nu: float, z: float) -> float:
    _, _, smallest = _hankel_terms(nu, np.array([z], dtype=float))
    return float(smallest[0])


def switchover_point(order: float) -> float:
    """Argument where series roundoff and Hankel truncation errors balance.

    Both error estimates are relative to the envelope
    :math:`\\sqrt{2/(\\pi z)}`; the crossing is located by bisection in
    ``log z``.
    """
    nu = _check_order(order)
    lo, hi = 1.0, max(200.0, 4.0 * nu * nu)

    def gap(z):
        return math.log(_series_roundoff(nu, z)) - math.log(_hankel_truncation(nu, z) + 1e-300)

    if gap(lo) > 0:
        return lo
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def bessel_j_hybrid(order: float, z):
    """Series below :func:`switchover_point`, Hankel expansion above it."""
    nu = _check_order(order)
    za = _as_finite(z, nonnegative=True)
    zs = switchover_point(nu)
    out = np.empty_like(za)
    small = za < zs
    if np.any(small):
        out[small] = bessel_j_series(nu, za[small])
    if np.any(~small):
        out[~small] = bessel_j_asymptotic(nu, za[~small])
    return float(out) if out.ndim == 0 else out


def normalized_bessel_series(order: float, z, max_terms: int = 400):
    """:math:`j_\\nu(z) = \\sum_k (-z^2/4)^k / (k!\\,(\\nu+1)_k)`, any real ``z``."""
    nu = _check_order(order)
    za = _as_finite(z, nonnegative=False)
    out = _normalized_series(nu, za, max_terms)
    return float(out) if out.ndim == 0 else out


def normalized_bessel(order: float, z):
    """Normalized Bessel function :math:`j_\\nu(z) = 2^\\nu\\Gamma(\\nu+1) J_\\nu(z)/z^\\nu`.

    Even in ``z`` and equal to 1 at the origin. Small arguments go through
    the power series; the quotient form is only used for ``|z| > 1`` and is
    assembled in log space so large orders do not overflow.
    """
    nu = _check_order(order)
    za = np.abs(_as_finite(z, nonnegative=False))
    out = np.empty_like(za)
    small = za <= _NORMALIZED_SERIES_CUTOFF
    if np.any(small):
        out[small] = _normalized_series(nu, za[small], 60)
    big = ~small
    if np.any(big):
        zb = za[big]
        logpre = nu * math.log(2.0) + math.lgamma(nu + 1.0) - nu * np.log(zb)
        out[big] = np.exp(logpre) * sp.jv(nu, zb)
    return float(out) if out.ndim == 0 else out
