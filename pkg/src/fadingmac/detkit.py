"""Determinant machinery for the capacity bounds.

Everything determinant-shaped flows through signed-log arithmetic: entries
of the mixed-block matrices reach exp(a*b) with a*b in the thousands at
high SNR, so naive evaluation overflows long before the bounds themselves
become large.  The module also carries the closed form for
E[log det(X L X^H)] over complex Gaussian X and its Monte-Carlo-checkable
building blocks (the R_k / P_k / T_k / Q / S construction), plus two
test-harness oracles: the ordered-region integral identity and the
determinant-ratio limit with derivative columns.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate
from scipy import linalg as sla
from scipy import special as sps

from .errors import (
    DegenerateSpectrumError,
    DimensionError,
    DomainError,
    PerturbationInstabilityError,
    QuadratureError,
)
from .specfn import LogValue, log_gamma_product, log_upper_exp_tail

__all__ = [
    "ConditioningWarning",
    "DerivativeAccuracyWarning",
    "check_spectrum",
    "vandermonde",
    "kappa",
    "log_vandermonde_batch",
    "log_kappa_batch",
    "signed_logdet",
    "batched_signed_logdet",
    "build_M",
    "build_log_M",
    "build_Rk",
    "sum_det_Rk_log",
    "exp_logdet_gauss_quadratic",
    "perturbed_exp_logdet",
    "separate_repeats",
    "build_H0",
    "build_Hk",
    "andreief_check",
    "det_ratio_limit",
]


class ConditioningWarning(RuntimeWarning):
    """The scaled elimination lost more than ~8 decimal digits."""


class DerivativeAccuracyWarning(RuntimeWarning):
    """Finite-difference derivatives disagree across step sizes."""


def check_spectrum(values, min_value: float = 0.0, name: str = "spectrum") -> np.ndarray:
    """Validate a strictly decreasing spectrum with entries > min_value."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise DomainError(f"{name} must be nonempty")
    if np.any(v <= min_value):
        raise DomainError(f"{name} entries must exceed {min_value}")
    if v.size > 1:
        gaps = v[:-1] - v[1:]
        scale = np.abs(v).max()
        if np.any(gaps <= 0) or np.any(gaps < 1e-13 * scale):
            raise DegenerateSpectrumError(
                f"{name} entries must be strictly decreasing and distinct"
            )
    return v


# ---------------------------------------------------------------------------
# Vandermonde and kappa


def vandermonde(spec) -> LogValue:
    """Product of pairwise differences prod_{i<j} (a_i - a_j), signed-log."""
    a = check_spectrum(spec, min_value=0.0)
    m = a.size
    if m == 1:
        return LogValue(0.0, 1)
    diff = a[:, None] - a[None, :]
    iu = np.triu_indices(m, k=1)
    return LogValue(float(np.sum(np.log(diff[iu]))), 1)


def kappa(spec, k: int) -> LogValue:
    """vandermonde(spec) * (prod spec)^k, signed-log."""
    if k < 0:
        raise DomainError(f"kappa requires k >= 0, got {k}")
    a = check_spectrum(spec, min_value=0.0)
    v = vandermonde(a)
    return LogValue(v.log_magnitude + k * float(np.sum(np.log(a))), v.sign)


def log_vandermonde_batch(spectra: np.ndarray) -> np.ndarray:
    """log prod_{i<j}(s_i - s_j) for stacked decreasing spectra (..., m)."""
    s = np.asarray(spectra, dtype=float)
    m = s.shape[-1]
    if m == 1:
        return np.zeros(s.shape[:-1])
    diff = s[..., :, None] - s[..., None, :]
    iu = np.triu_indices(m, k=1)
    return np.sum(np.log(diff[..., iu[0], iu[1]]), axis=-1)


def log_kappa_batch(spectra: np.ndarray, k: int) -> np.ndarray:
    """log of kappa(spectrum, k) for stacked decreasing positive spectra."""
    s = np.asarray(spectra, dtype=float)
    return log_vandermonde_batch(s) + k * np.sum(np.log(s), axis=-1)


# ---------------------------------------------------------------------------
# Signed-log determinants


def _as_log_sign(mat):
    """Split a real matrix or (log_mag, sign) pair into log/sign arrays."""
    if isinstance(mat, tuple):
        log_mag, sign = mat
        return np.asarray(log_mag, dtype=float), np.asarray(sign, dtype=float)
    a = np.asarray(mat, dtype=float)
    sign = np.sign(a)
    with np.errstate(divide="ignore"):
        log_mag = np.where(sign != 0, np.log(np.abs(np.where(a != 0, a, 1.0))), -np.inf)
    return log_mag, sign


def batched_signed_logdet(log_mag: np.ndarray, sign: np.ndarray):
    """Determinants of stacked matrices given in signed-log form.

    Rows and columns are scaled by their largest log-magnitude before a
    pivoted LU, so entries spanning hundreds of orders of magnitude stay
    finite.  Returns (sign, logdet) arrays; singular matrices come back
    with sign 0 (not an error).
    """
    log_mag = np.asarray(log_mag, dtype=float)
    sign = np.asarray(sign, dtype=float)
    row_c = np.max(log_mag, axis=-1)
    row_c = np.where(np.isfinite(row_c), row_c, 0.0)
    shifted = log_mag - row_c[..., None]
    col_c = np.max(shifted, axis=-2)
    col_c = np.where(np.isfinite(col_c), col_c, 0.0)
    shifted = shifted - col_c[..., None, :]
    a = sign * np.exp(shifted)
    s, ld = np.linalg.slogdet(a)
    total = ld + np.sum(row_c, axis=-1) + np.sum(col_c, axis=-1)
    total = np.where(s == 0, -np.inf, total)
    return s, total


def signed_logdet(mat, warn_condition: bool = True) -> LogValue:
    """Signed-log determinant of a single square matrix.

    ``mat`` may be a real ndarray or a (log_mag, sign) pair.  Emits a
    ConditioningWarning when the scaled matrix looks like it loses more
    than 8 decimal digits in elimination.
    """
    log_mag, sign = _as_log_sign(mat)
    if log_mag.ndim != 2 or log_mag.shape[0] != log_mag.shape[1]:
        raise DimensionError(f"signed_logdet requires a square matrix, got {log_mag.shape}")
    s, ld = batched_signed_logdet(log_mag, sign)
    if warn_condition and s != 0:
        row_c = np.max(log_mag, axis=-1)
        row_c = np.where(np.isfinite(row_c), row_c, 0.0)
        shifted = log_mag - row_c[:, None]
        col_c = np.where(np.isfinite(np.max(shifted, axis=0)), np.max(shifted, axis=0), 0.0)
        a = sign * np.exp(shifted - col_c[None, :])
        try:
            cond = np.linalg.cond(a)
        except np.linalg.LinAlgError:
            cond = np.inf
        if cond > 1e8:
            warnings.warn(
                f"determinant elimination lost > 8 digits (cond ~ {cond:.2e})",
                ConditioningWarning,
                stacklevel=2,
            )
    return LogValue(float(ld), int(s)) if s != 0 else LogValue.zero()


# ---------------------------------------------------------------------------
# Mixed tail/power matrix of the lower bound


def build_log_M(a: np.ndarray, b: np.ndarray, tau: int):
    """Log magnitudes of the p x p mixed matrix with tail entries.

    ``a`` (..., r) holds ordered eigenvalues of the output Gram matrix,
    ``b`` (..., n) ordered eigenvalues of the shrunken input Gram matrix;
    leading axes broadcast.  Entry (i, j) is the exponential tail
    tail(a_i * b_j, tau - p) for i < r, j < n, and pure powers
    b_j^(tau-i) / a_i^(tau-j) in the slack rows/columns.  All entries are
    positive, so only log magnitudes are returned.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = a.shape[-1]
    n = b.shape[-1]
    p = max(r, n)
    if tau < p:
        raise DimensionError(f"tau = {tau} must be >= max(r, n) = {p}")
    batch = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    out = np.empty(batch + (p, p), dtype=float)
    x = a[..., :, None] * b[..., None, :]
    out[..., :r, :n] = log_upper_exp_tail(np.broadcast_to(x, batch + (r, n)), tau - p)
    if p > r:
        # slack rows: b_j^(tau - i) for i = r+1 .. p (1-based)
        exps = tau - np.arange(r + 1, p + 1, dtype=float)
        out[..., r:, :n] = exps[:, None] * np.log(b)[..., None, :]
    if p > n:
        # slack columns: a_i^(tau - j) for j = n+1 .. p (1-based)
        exps = tau - np.arange(n + 1, p + 1, dtype=float)
        out[..., :r, n:] = exps[None, :] * np.log(a)[..., :, None]
    return out


def build_M(a, b, tau: int):
    """Single-instance mixed matrix as a (log_mag, sign) pair."""
    av = check_spectrum(a, name="output spectrum")
    bv = check_spectrum(b, name="input spectrum")
    log_mag = build_log_M(av, bv, tau)
    sign = np.where(np.isfinite(log_mag), 1.0, 0.0)
    return log_mag, sign


# ---------------------------------------------------------------------------
# The R_k construction (closed form for E[log det(X L X^H)])


def _beta_inv(a, b):
    return np.exp(-sps.betaln(a, b))


def build_S(m: int, tau_total: int) -> np.ndarray:
    """Lower-triangular (tau-m) x (tau-m) elimination matrix."""
    q = tau_total - m
    if q < 1:
        raise DimensionError("tau_total must exceed the spectrum length")
    s = np.zeros((q, q))
    for i in range(1, q + 1):
        for j in range(1, i + 1):
            if i == q:
                s[i - 1, j - 1] = (-1.0) ** (i - j)
            else:
                s[i - 1, j - 1] = (-1.0) ** (i - j) * _beta_inv(i - j + 1, q - i)
    return s


def build_Q(a: np.ndarray, tau_total: int) -> np.ndarray:
    """m x (tau-m) block of negative powers (-a_i)^(j - (tau-m))."""
    m = a.size
    q = tau_total - m
    j = np.arange(1, q + 1, dtype=float)
    return (-a[:, None]) ** (j[None, :] - q)


def build_Pk(a: np.ndarray, k: int) -> np.ndarray:
    """m x m power matrix with the log-weighted column k."""
    m = a.size
    p = a[:, None] ** (m - np.arange(1, m + 1, dtype=float)[None, :] + 1)
    p[:, k - 1] = a ** (m - k + 1) * (np.log(a) + sps.psi(m - k + 1))
    return p


def build_Tk(m: int, k: int, tau_total: int) -> np.ndarray:
    """(tau-m) x m companion block; column k carries digamma weights."""
    q = tau_total - m
    t = np.zeros((q, m))
    for i in range(1, q):
        for j in range(1, m + 1):
            if j == k:
                # second beta argument is q - i (verified against the
                # moment-matrix route, which fixes the column scaling)
                t[i - 1, j - 1] = sps.psi(tau_total - i - k + 1) * _beta_inv(
                    m - k + 1, q - i
                )
            else:
                t[i - 1, j - 1] = _beta_inv(m - j + 1, q - i)
    for j in range(1, m + 1):
        t[q - 1, j - 1] = sps.psi(m - k + 1) if j == k else 1.0
    return t


_SINV_T_CACHE: dict = {}


def _sinv_t(m: int, k: int, tau_total: int) -> np.ndarray:
    """Cached S^{-1} T_k: spectrum-independent, reused across evaluations."""
    key = (m, k, tau_total)
    if key not in _SINV_T_CACHE:
        s = build_S(m, tau_total)
        t = build_Tk(m, k, tau_total)
        _SINV_T_CACHE[key] = sla.solve_triangular(s, t, lower=True)
    return _SINV_T_CACHE[key]


def build_Rk(a, k: int, tau_total: int) -> np.ndarray:
    """R_k(A) = P_k(A) - Q(A) S^{-1} T_k for a spectrum with entries > 1.

    S is lower-triangular with nonzero diagonal, so S^{-1} T_k is obtained
    by forward substitution rather than a general inverse.
    """
    av = check_spectrum(a, min_value=1.0, name="R_k spectrum")
    m = av.size
    if not 1 <= k <= m:
        raise DomainError(f"k must lie in 1..{m}, got {k}")
    if tau_total <= m:
        raise DimensionError(f"tau_total = {tau_total} must exceed m = {m}")
    return build_Pk(av, k) - build_Q(av, tau_total) @ _sinv_t(m, k, tau_total)


def _sum_det_Rk_log_impl(av: np.ndarray, tau_total: int):
    """Signed-log of sum_k det R_k plus its float64 noise floor.

    Each R_k entry is a difference of two separately computed pieces, so
    it carries absolute noise of machine epsilon times the larger piece.
    The floor is the first-order perturbation bound on det R_k from that
    entry noise: sum over rows of (product of the other rows' norms)
    times the noise norm of the perturbed row.  A computed total near or
    below the floor has no significand left.
    """
    m = av.size
    lds = np.empty(m)
    signs = np.empty(m)
    floor = -math.inf
    for k in range(1, m + 1):
        pk = build_Pk(av, k)
        qs = build_Q(av, tau_total) @ _sinv_t(m, k, tau_total)
        rk = pk - qs
        sgn, ld = batched_signed_logdet(*_as_log_sign(rk))
        signs[k - 1] = sgn
        lds[k - 1] = ld
        with np.errstate(divide="ignore"):
            row_log = 0.5 * np.log(np.sum(rk * rk, axis=1))
            noise_log = 0.5 * np.log(
                np.sum((np.abs(pk) + np.abs(qs)) ** 2, axis=1)
            ) + math.log(1e-16 * m)
        others = float(np.sum(row_log)) - row_log
        floor = max(floor, float(sps.logsumexp(others + noise_log)))
    total, sgn = sps.logsumexp(lds, b=signs, return_sign=True)
    if sgn == 0:
        return LogValue.zero(), floor
    return LogValue(float(total), int(sgn)), floor


def sum_det_Rk_log(a, tau_total: int) -> LogValue:
    """Signed-log of sum_k det R_k(A)."""
    av = check_spectrum(a, min_value=1.0, name="R_k spectrum")
    return _sum_det_Rk_log_impl(av, tau_total)[0]


def exp_logdet_gauss_quadratic(l0, m_ambient: int) -> float:
    """Closed form for E[log det(X L X^H)], X n x m i.i.d. CN(0,1).

    L has the strictly-ordered eigenvalues ``l0`` (all > 1) followed by
    m - n unit eigenvalues.  Repeated or unit eigenvalues are rejected;
    use :func:`perturbed_exp_logdet` for those.
    """
    value, _ = _exp_logdet_closed(l0, m_ambient)
    return value


def _exp_logdet_closed(l0, m_ambient: int):
    """Closed form plus a reliability verdict from the cancellation floor."""
    lv = check_spectrum(l0, min_value=1.0, name="l0")
    n = lv.size
    if m_ambient <= n:
        raise DimensionError(f"m_ambient = {m_ambient} must exceed n = {n}")
    log_det_l0 = float(np.sum(np.log(lv)))
    log_kap = log_kappa_batch(lv - 1.0, m_ambient - n)
    total, floor = _sum_det_Rk_log_impl(lv, m_ambient)
    if total.sign == 0:
        return 0.0, False
    reliable = total.log_magnitude > floor + math.log(100.0)
    value = total.sign * math.exp(
        (m_ambient - n - 1) * log_det_l0 - float(log_kap) + total.log_magnitude
    )
    return value, reliable


def separate_repeats(values: np.ndarray, spacing: float) -> np.ndarray:
    """Enforce a minimum relative gap by pushing entries upward.

    A single ascending pass floors everything at 1 + spacing and then
    lifts each entry to at least (1 + spacing) times its predecessor.
    Entries that already satisfy the gap are untouched, and the result
    is collision-free by construction, so the lifted spectrum moves by
    O(spacing) per clustered entry.
    """
    v = np.sort(np.asarray(values, dtype=float))
    out = np.empty_like(v)
    floor = 1.0 + spacing
    for i, x in enumerate(v):
        out[i] = max(x, floor)
        floor = out[i] * (1.0 + spacing)
    return out[::-1]


_CV_BATCHES: dict = {}
_CV_BASES: dict = {}
_CV_SAMPLES = 8192
_CV_LIFT = 0.5


def _chol_logdet(a: np.ndarray) -> np.ndarray:
    """Batched log-determinant of Hermitian positive definite matrices."""
    diag = np.diagonal(np.linalg.cholesky(a), axis1=-2, axis2=-1).real
    return 2.0 * np.sum(np.log(diag), axis=-1)


def _cv_batch(n: int, m: int) -> np.ndarray:
    """Fixed complex Gaussian batch for the control-variate fallback.

    Keyed by the matrix shape only, so every caller sees the same batch
    and the fallback stays a deterministic function of the spectrum.
    """
    key = (n, m)
    if key not in _CV_BATCHES:
        g = np.random.Generator(np.random.Philox(key=0xC0FFEE ^ (n * 1009 + m)))
        z = g.standard_normal((_CV_SAMPLES, n, m)) + 1j * g.standard_normal(
            (_CV_SAMPLES, n, m)
        )
        _CV_BATCHES[key] = z / np.sqrt(2.0)
    return _CV_BATCHES[key]


def _cv_mc_exp_logdet(lv: np.ndarray, m_ambient: int):
    """Control-variate estimate of E[log det(X L X^H)] near the unit pole.

    The closed form is evaluated at a generously lifted spectrum (where
    it is well conditioned even for large clusters) and corrected by a
    fixed-batch Monte-Carlo estimate of the difference; the correction is
    unbiased and its standard error is returned.
    """
    lifted = separate_repeats(lv, _CV_LIFT)
    n = lv.size
    x = _cv_batch(n, m_ambient)
    base_key = (tuple(lifted), m_ambient)
    if base_key not in _CV_BASES:
        base = exp_logdet_gauss_quadratic(lifted, m_ambient)
        w_lift = np.concatenate([lifted, np.ones(m_ambient - n)])
        b = (x * w_lift) @ x.conj().transpose(0, 2, 1)
        _CV_BASES[base_key] = (base, _chol_logdet(b))
    base, ld_lift = _CV_BASES[base_key]
    w_target = np.concatenate([lv, np.ones(m_ambient - n)])
    a = (x * w_target) @ x.conj().transpose(0, 2, 1)
    diff = _chol_logdet(a) - ld_lift
    se = float(np.std(diff, ddof=1) / math.sqrt(diff.size))
    return base + float(np.mean(diff)), se


def perturbed_exp_logdet(l, m_ambient: int, spacing: float = 1e-5):
    """E[log det(X L X^H)] for spectra with repeated or unit eigenvalues.

    Coincident entries away from 1 are separated by a relative spacing
    eps and the closed form Richardson-extrapolated from eps and eps/2,
    escalating eps when the pair disagrees.  Spectra touching the unit
    eigenvalue (where the closed form cancels beyond float64) go through
    the control-variate fallback.  Returns (value, error_estimate).
    """
    lv = np.sort(np.asarray(l, dtype=float))[::-1]
    if np.any(lv < 1.0 - 1e-12):
        raise DomainError("entries must be >= 1")

    tol = 1e-3
    near_one = bool(np.any(lv <= 1.0 + tol))
    tight = lv.size > 1 and bool(
        np.any(lv[:-1] - lv[1:] <= tol * np.maximum(lv[:-1], 1.0))
    )
    if not (near_one or tight):
        value, reliable = _exp_logdet_closed(lv, m_ambient)
        if reliable:
            return value, 0.0
        return _cv_mc_exp_logdet(lv, m_ambient)
    if not near_one:
        eps = spacing
        while eps <= 1e-2:
            v1, ok1 = _exp_logdet_closed(separate_repeats(lv, eps), m_ambient)
            v2, ok2 = _exp_logdet_closed(separate_repeats(lv, eps / 2.0), m_ambient)
            delta = abs(v2 - v1)
            if ok1 and ok2 and delta <= 1e-3 * max(1.0, abs(v2)):
                return 2.0 * v2 - v1, delta
            eps *= 10.0
    return _cv_mc_exp_logdet(lv, m_ambient)


# ---------------------------------------------------------------------------
# Test oracles: the H_k matrices of the moment-generating-function route


def build_H0(l0, m_ambient: int) -> np.ndarray:
    """The t = 0 moment-matrix whose column-k derivative gives H_k."""
    lv = check_spectrum(l0, min_value=1.0, name="l0")
    n = lv.size
    m = m_ambient
    h = np.zeros((m, m))
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if j <= n:
                if i <= n:
                    h[i - 1, j - 1] = sps.gamma(n - j + 1) * lv[i - 1] ** (n - j + 1)
                else:
                    h[i - 1, j - 1] = sps.gamma(m - i + n - j + 1)
            else:
                if i <= n:
                    h[i - 1, j - 1] = (-lv[i - 1]) ** (j - m)
                elif i >= j:
                    h[i - 1, j - 1] = (
                        sps.gamma(m - j + 1) / sps.gamma(i - j + 1) * (-1.0) ** (i - j)
                    )
    return h


def build_Hk(l0, m_ambient: int, k: int) -> np.ndarray:
    """H_k: H0 with column k replaced by its t-derivative at t = 0."""
    lv = check_spectrum(l0, min_value=1.0, name="l0")
    n = lv.size
    m = m_ambient
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in 1..{n}")
    h = build_H0(lv, m)
    for i in range(1, m + 1):
        if i <= n:
            h[i - 1, k - 1] = (
                sps.gamma(n - k + 1)
                * lv[i - 1] ** (n - k + 1)
                * (np.log(lv[i - 1]) + sps.psi(n - k + 1))
            )
        else:
            h[i - 1, k - 1] = sps.gamma(m - i + n - k + 1) * sps.psi(m - i + n - k + 1)
    return h


# ---------------------------------------------------------------------------
# Ordered-region integral identity (test oracle)


def andreief_check(f, g, constants, a: float, b: float, quad_points: int = 64):
    """Check the ordered-region determinant integral identity numerically.

    Returns (lhs, rhs): lhs is the iterated integral of det A * det B over
    the ordered simplex a <= x_n <= ... <= x_1 < b (feasible for n <= 3),
    rhs is det of the moment matrix with integrals in the first n columns
    and the constant block elsewhere.
    """
    n = len(g)
    m = len(f)
    constants = np.asarray(constants, dtype=float).reshape(m, m - n) if m > n else np.zeros((m, 0))
    if n > 3:
        raise DomainError("nested quadrature oracle only feasible for n <= 3")

    e = np.zeros((m, m))
    for i in range(m):
        for j in range(n):
            val, err = integrate.quad(
                lambda x, i=i, j=j: f[i](x) * g[j](x), a, b, limit=quad_points
            )
            if err > 1e-9 * max(1.0, abs(val)):
                raise QuadratureError(f"moment integral ({i},{j}) did not converge")
            e[i, j] = val
        e[i, n:] = constants[i]
    rhs = float(np.linalg.det(e))

    def det_ab(xs):
        amat = np.zeros((m, m))
        for i in range(m):
            for j in range(n):
                amat[i, j] = f[i](xs[j])
            amat[i, n:] = constants[i]
        bmat = np.array([[g[i](xs[j]) for j in range(n)] for i in range(n)])
        return np.linalg.det(amat) * np.linalg.det(bmat)

    if n == 1:
        lhs, err = integrate.quad(lambda x1: det_ab([x1]), a, b, limit=quad_points)
    elif n == 2:
        lhs, err = integrate.dblquad(
            lambda x2, x1: det_ab([x1, x2]), a, b, a, lambda x1: x1
        )
    else:
        lhs, err = integrate.tplquad(
            lambda x3, x2, x1: det_ab([x1, x2, x3]),
            a,
            b,
            a,
            lambda x1: x1,
            a,
            lambda x1, x2: x2,
        )
    if err > 1e-7 * max(1.0, abs(lhs)):
        raise QuadratureError("ordered-region integral did not converge")
    return float(lhs), rhs


# ---------------------------------------------------------------------------
# Determinant-ratio limit with derivative columns (test oracle)


def _central_derivative(fun, x0: float, order: int, h: float) -> float:
    """order-th derivative by polynomial fit through a centered stencil."""
    if order == 0:
        return fun(x0)
    half = max(2, order // 2 + 2)
    pts = x0 + h * np.arange(-half, half + 1, dtype=float)
    vals = np.array([fun(p) for p in pts])
    coeffs = np.polynomial.polynomial.polyfit(pts - x0, vals, deg=2 * half)
    return float(sps.gamma(order + 1) * coeffs[order])


def det_ratio_limit(f, a_head, a0: float, m_total: int, h: float = 1e-2) -> float:
    """Limit of det C / vandermonde as the trailing eigenvalues merge at a0.

    ``f`` is a list of m_total differentiable callables; ``a_head`` are
    the n leading (distinct) eigenvalues.  The trailing columns of the
    limiting matrix hold derivatives f_i^(m-j)(a0), computed by centered
    stencils at two step sizes with Richardson combination.
    """
    head = check_spectrum(a_head, name="a_head")
    n = head.size
    m = m_total
    if n >= m:
        raise DimensionError("need n < m_total")
    if len(f) != m:
        raise DimensionError("need one function per row")

    e = np.zeros((m, m))
    for i in range(m):
        for j in range(n):
            e[i, j] = f[i](head[j])
        for j in range(n + 1, m + 1):
            order = m - j
            d1 = _central_derivative(f[i], a0, order, h)
            d2 = _central_derivative(f[i], a0, order, h / 2.0)
            scale = max(abs(d1), abs(d2), 1e-30)
            if abs(d1 - d2) > 1e-6 * scale:
                warnings.warn(
                    f"derivative order {order} of f[{i}] disagrees across step sizes",
                    DerivativeAccuracyWarning,
                    stacklevel=2,
                )
            e[i, j - 1] = (4.0 * d2 - d1) / 3.0

    shifted = head - a0
    if np.any(shifted <= 0):
        raise DomainError("a_head entries must exceed a0")
    log_kap = log_kappa_batch(shifted, m - n)
    det_e = signed_logdet(e, warn_condition=False)
    if det_e.sign == 0:
        return 0.0
    return det_e.sign * math.exp(
        det_e.log_magnitude - log_gamma_product(m - n) - float(log_kap)
    )
