"""Numerically stable special functions used throughout the bound formulas.

Everything here works on the natural-log scale; capacity values downstream
are in nats.  The two non-library functions are

* ``log_gamma_product(n)``  -- log of the product Gamma(1)*Gamma(2)*...*Gamma(n),
* ``upper_exp_tail(x, n)``  -- the truncated exponential tail
  e^x - sum_{k<n} x^k/k!, returned in signed-log form because it spans
  hundreds of orders of magnitude inside determinant entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sps

from .errors import DomainError

__all__ = [
    "LogValue",
    "log_gamma",
    "digamma",
    "log_beta",
    "log_gamma_product",
    "upper_exp_tail",
    "log_upper_exp_tail",
]


@dataclass(frozen=True)
class LogValue:
    """A real number stored as sign * exp(log_magnitude).

    ``sign == 0`` means the value is exactly zero and ``log_magnitude``
    is ignored (kept at -inf by convention).
    """

    log_magnitude: float
    sign: int

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    @staticmethod
    def zero() -> "LogValue":
        return LogValue(-math.inf, 0)

    @staticmethod
    def from_real(x: float) -> "LogValue":
        if x == 0.0:
            return LogValue.zero()
        return LogValue(math.log(abs(x)), 1 if x > 0 else -1)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if x <= 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return float(sps.gammaln(x))


def digamma(x: float) -> float:
    """psi(x) for x > 0."""
    if x <= 0:
        raise DomainError(f"digamma requires x > 0, got {x}")
    return float(sps.psi(x))


def log_beta(a: float, b: float) -> float:
    """ln beta(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a+b)."""
    if a <= 0 or b <= 0:
        raise DomainError(f"log_beta requires positive arguments, got ({a}, {b})")
    return float(sps.betaln(a, b))


def log_gamma_product(n: int) -> float:
    """ln of prod_{i=1..n} Gamma(i); equals 0 for n in {0, 1}."""
    if n < 0:
        raise DomainError(f"log_gamma_product requires n >= 0, got {n}")
    if n <= 1:
        return 0.0
    return float(np.sum(sps.gammaln(np.arange(1, n + 1))))


def upper_exp_tail(x: float, n: int) -> LogValue:
    """Truncated exponential tail e^x - sum_{k=0}^{n-1} x^k / k!.

    For n > x the direct subtraction annihilates the significand, so the
    value is built from the ascending tail series sum_{k>=n} x^k / k!
    (all terms positive).  Otherwise the subtraction is carried out in
    log space via log1p.
    """
    if x < 0:
        raise DomainError(f"upper_exp_tail requires x >= 0, got {x}")
    if n < 0:
        raise DomainError(f"upper_exp_tail requires n >= 0, got {n}")
    if n == 0:
        return LogValue(x, 1)
    if x == 0.0:
        # partial sum equals e^0 exactly
        return LogValue.zero()
    if n > x:
        # ascending series, scaled by its first term to avoid underflow
        log_first = n * math.log(x) - sps.gammaln(n + 1)
        term = 1.0
        total = 1.0
        k = n
        while term > 1e-18 * total:
            term *= x / (k + 1)
            total += term
            k += 1
        return LogValue(log_first + math.log(total), 1)
    # n <= x: the partial sum is at most a bounded fraction of e^x
    ks = np.arange(n, dtype=float)
    log_partial = sps.logsumexp(ks * math.log(x) - sps.gammaln(ks + 1))
    return LogValue(x + math.log1p(-math.exp(log_partial - x)), 1)


def log_upper_exp_tail(x: np.ndarray, n: int) -> np.ndarray:
    """Vectorized ln of the truncated exponential tail.

    Uses e^x - sum_{k<n} x^k/k! = e^x * P(n, x) with P the regularized
    lower incomplete gamma function, falling back to the leading series
    term where P(n, x) underflows.  Entries with x == 0 map to -inf
    (tail value 0).  Cross-checked against :func:`upper_exp_tail`.
    """
    x = np.asarray(x, dtype=float)
    if n < 0:
        raise DomainError(f"log_upper_exp_tail requires n >= 0, got {n}")
    if np.any(x < 0):
        raise DomainError("log_upper_exp_tail requires x >= 0")
    if n == 0:
        return x.copy()
    with np.errstate(divide="ignore"):
        p = sps.gammainc(n, x)
        out = np.where(p > 0, x + np.log(np.where(p > 0, p, 1.0)), -np.inf)
        small = (p <= 0) & (x > 0)
        if np.any(small):
            xs = x[small]
            # ascending tail series factored by its first term x^n/n!;
            # a short Horner recursion covers the correction because
            # x/(n+1) < 0.1 wherever gammainc underflows
            corr = np.ones_like(xs)
            for k in range(n + 12, n, -1):
                corr = 1.0 + corr * xs / k
            out[small] = n * np.log(xs) - sps.gammaln(n + 1) + np.log(corr)
    return out
