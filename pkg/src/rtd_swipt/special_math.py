"""Special functions and numeric kernels used by the solver.

The imaginary error function is evaluated from two expansions of the
Dawson integral F(z) = exp(-z^2) * int_0^z exp(t^2) dt:

* z <= SERIES_SWITCH: Maclaurin series  sum z^(2k+1) / (k! (2k+1)),
  all terms positive, so no cancellation.
* z >  SERIES_SWITCH: asymptotic series F(z) ~ 1/(2z) * sum (2k-1)!! / (2z^2)^k,
  truncated at a fixed number of terms (below its smallest term for z >= 5).

erfi(z) = 2/sqrt(pi) * exp(z^2) * F(z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError

SERIES_SWITCH = 5.0
ERFI_MAX_ARG = 30.0

_MACLAURIN_TERMS = 120
_ASYMPTOTIC_TERMS = 25
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_LOG_SQRT_PI = 0.5 * math.log(math.pi)


def _maclaurin_tail(z):
    """Return sum_{k>=1} z^(2k) / (k! (2k+1)) for array z <= SERIES_SWITCH."""
    if z.size == 0:
        return np.zeros_like(z)
    if z.size == 1:
        # plain floats: the root finders call this one value at a time
        z2 = float(z.reshape(-1)[0]) ** 2
        term, total = 1.0, 0.0
        for k in range(1, _MACLAURIN_TERMS):
            term = term * z2 / k
            contrib = term / (2 * k + 1)
            total += contrib
            if contrib <= 1e-17 * (1.0 + total):
                break
        return np.full_like(z, total)
    z2 = z * z
    term = np.ones_like(z)  # z^(2k) / k!
    total = np.zeros_like(z)
    for k in range(1, _MACLAURIN_TERMS):
        term = term * z2 / k
        contrib = term / (2 * k + 1)
        total = total + contrib
        if np.all(contrib <= 1e-17 * (1.0 + total)):
            break
    return total


def _asymptotic_tail(z):
    """Return sum_{k>=1} (2k-1)!! / (2 z^2)^k for array z > SERIES_SWITCH."""
    if z.size == 0:
        return np.zeros_like(z)
    if z.size == 1:
        zf = float(z.reshape(-1)[0])
        inv = 1.0 / (2.0 * zf * zf)
        term, total = 1.0, 0.0
        for k in range(1, _ASYMPTOTIC_TERMS + 1):
            term = term * (2 * k - 1) * inv
            total = total + term
        return np.full_like(z, total)
    inv = 1.0 / (2.0 * z * z)
    term = np.ones_like(z)
    total = np.zeros_like(z)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = term * (2 * k - 1) * inv
        total = total + term
    return total


def _split(z):
    z = np.asarray(z, dtype=float)
    return z, z <= SERIES_SWITCH


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


def erfi(z):
    """Imaginary error function (2/sqrt(pi)) * int_0^z exp(t^2) dt.

    Accepts a scalar or array with 0 <= z <= 30. Values above ~26.6 overflow
    to ``inf`` in double precision; use :func:`log_erfi` there.
    """
    z, small = _split(z)
    if np.any(~np.isfinite(z)) or np.any(z < 0) or np.any(z > ERFI_MAX_ARG):
        raise DomainError(f"erfi requires 0 <= z <= {ERFI_MAX_ARG}")
    out = np.empty_like(z)
    zs = z[small]
    out[small] = _TWO_OVER_SQRT_PI * zs * (1.0 + _maclaurin_tail(zs))
    zl = z[~small]
    if zl.size:
        with np.errstate(over="ignore"):
            out[~small] = np.exp(zl * zl) * (1.0 + _asymptotic_tail(zl)) / (zl * math.sqrt(math.pi))
    return _scalar_or_array(out, z)


def log_erfi(z):
    """ln(erfi(z)) for z > 0, finite for arguments far beyond the erfi overflow."""
    z, small = _split(z)
    if np.any(~np.isfinite(z)) or np.any(z <= 0):
        raise DomainError("log_erfi requires z > 0")
    out = np.empty_like(z)
    zs = z[small]
    out[small] = math.log(_TWO_OVER_SQRT_PI) + np.log(zs) + np.log1p(_maclaurin_tail(zs))
    zl = z[~small]
    out[~small] = zl * zl - np.log(zl) - _LOG_SQRT_PI + np.log1p(_asymptotic_tail(zl))
    return _scalar_or_array(out, z)


def dawson(z):
    """Dawson integral F(z) = exp(-z^2) int_0^z exp(t^2) dt for z >= 0."""
    z, small = _split(z)
    if np.any(z < 0):
        raise DomainError("dawson requires z >= 0")
    out = np.empty_like(z)
    zs = z[small]
    out[small] = np.exp(-zs * zs) * zs * (1.0 + _maclaurin_tail(zs))
    zl = z[~small]
    out[~small] = (1.0 + _asymptotic_tail(zl)) / (2.0 * zl)
    return _scalar_or_array(out, z)


def dawson_over_z(z):
    """F(z)/z with the removable singularity at 0 filled in (value 1)."""
    z, small = _split(z)
    if np.any(z < 0):
        raise DomainError("dawson_over_z requires z >= 0")
    out = np.empty_like(z)
    zs = z[small]
    out[small] = np.exp(-zs * zs) * (1.0 + _maclaurin_tail(zs))
    zl = z[~small]
    out[~small] = (1.0 + _asymptotic_tail(zl)) / (2.0 * zl * zl)
    return _scalar_or_array(out, z)


def log_dawson_over_z(z):
    """ln(F(z)/z), accurate to full relative precision as z -> 0."""
    z, small = _split(z)
    if np.any(z < 0):
        raise DomainError("log_dawson_over_z requires z >= 0")
    out = np.empty_like(z)
    zs = z[small]
    out[small] = -zs * zs + np.log1p(_maclaurin_tail(zs))
    zl = z[~small]
    out[~small] = np.log1p(_asymptotic_tail(zl)) - np.log(2.0 * zl * zl)
    return _scalar_or_array(out, z)


def gaussian_entropy(sigma2):
    """Differential entropy 0.5 * ln(2 pi e sigma2) of N(0, sigma2), in nats."""
    if not sigma2 > 0:
        raise DomainError("gaussian_entropy requires sigma2 > 0")
    return 0.5 * math.log(2.0 * math.pi * math.e * sigma2)


@dataclass(frozen=True)
class QuadratureSpec:
    panel_count: int = 4096
    rule: str = "composite-simpson"

    def __post_init__(self):
        if self.rule != "composite-simpson":
            raise ValueError(f"unsupported quadrature rule {self.rule!r}")
        if self.panel_count < 64 or self.panel_count % 2:
            raise ValueError("panel_count must be even and >= 64")


DEFAULT_QUADRATURE = QuadratureSpec()


def simpson_weights(n_panels: int, step: float) -> np.ndarray:
    w = np.ones(n_panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (step / 3.0)


def integrate(f, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Composite Simpson integral of a vectorised ``f`` over [lo, hi]."""
    if hi < lo:
        raise ValueError("integrate requires lo <= hi")
    if hi == lo:
        return 0.0
    n = spec.panel_count
    x = np.linspace(lo, hi, n + 1)
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    return float(np.dot(simpson_weights(n, (hi - lo) / n), y))


def bisect(g, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 400) -> float:
    """Bisection root of ``g`` on [lo, hi].

    Stops once the bracket width is at most tol * max(1, |x|) or no longer
    shrinks in floating point.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    g_lo = g(lo)
    if g_lo == 0:
        return lo
    g_hi = g(hi)
    if g_hi == 0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise BracketError(f"g has equal signs at lo={lo!r} ({g_lo:+.3e}) and hi={hi!r} ({g_hi:+.3e})")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)) or mid in (lo, hi):
            return mid
        g_mid = g(mid)
        if g_mid == 0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
