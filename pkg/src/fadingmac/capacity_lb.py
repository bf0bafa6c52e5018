"""Lower bounds on the sum-rate capacity.

Three estimators live here:

* ``ustm_lb``: the mutual-information lower bound achieved by isotropic
  unitary inputs, estimated by nested Monte Carlo (an outer average over
  channel outputs, an inner average over input singular-value profiles),
* ``two_user_lb``: for two single-antenna users the inner average reduces
  to a one-dimensional quadrature over the correlation angle between the
  two signature rows, giving an independent route to the same number,
* ``gaussian_lb``: the same estimator driven by i.i.d. Gaussian inputs.

``ustm_lb_multiantenna`` extends the unitary-input bound to users with
several antennas, whose input spectra contain repeated singular values;
those are resolved by relative perturbation and Richardson extrapolation.

All rates are in nats per channel use (the raw per-block rate divided by
the coherence interval); pass ``per_channel_use=False`` to get the
per-block value instead.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .channel import BoundEstimate, ChannelConfig
from .errors import (
    DomainError,
    NegativeInnerAverageError,
    PerturbationInstabilityError,
    QuadratureError,
)
from .randmat import (
    RngStream,
    _cgauss_batch,
    sample_gaussian_input_spectrum,
    sample_mac_ustm_input,
)
from .specfn import log_gamma_product, log_upper_exp_tail

__all__ = [
    "DiagSpectrum",
    "LbSampleBudget",
    "ustm_lb",
    "two_user_lb",
    "gaussian_lb",
    "ustm_lb_multiantenna",
]

# Fixed stream ids so the outer channel draws, the inner spectrum pool,
# and the input embedded in the channel draw are independent streams of
# the same master seed.
_POOL_STREAM = 0x1D7001
_INPUT_STREAM = 0x1D7002
_NOISE_STREAM = 0x1D7003


@dataclass(frozen=True)
class DiagSpectrum:
    """Strictly decreasing positive singular values of an input matrix."""

    entries: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.entries)
        object.__setattr__(self, "entries", vals)
        if len(vals) == 0:
            raise DomainError("DiagSpectrum needs at least one entry")
        if any(v <= 0 for v in vals):
            raise DomainError("DiagSpectrum entries must be positive")
        if any(a <= b for a, b in zip(vals, vals[1:])):
            raise DomainError("DiagSpectrum entries must be strictly decreasing")


@dataclass(frozen=True)
class LbSampleBudget:
    """Sampling and quadrature budget for the lower-bound estimators."""

    outer_samples: int = 10000
    inner_samples: int = 4000
    quad_points: int = 32
    seed: int = 0

    def __post_init__(self):
        if min(self.outer_samples, self.inner_samples, self.quad_points) < 1:
            raise DomainError("all LbSampleBudget fields must be positive")


def _log_vandermonde(vals: np.ndarray) -> np.ndarray:
    """Sum of ln(v_i - v_j) over i < j for rows of descending values."""
    v = np.atleast_2d(vals)
    k = v.shape[-1]
    if k == 1:
        return np.zeros(v.shape[0]) if vals.ndim > 1 else 0.0
    iu, ju = np.triu_indices(k, 1)
    diffs = v[:, iu] - v[:, ju]
    out = np.sum(np.log(diffs), axis=-1)
    return out if vals.ndim > 1 else float(out[0])


def _log_kappa(vals: np.ndarray, power: int) -> np.ndarray:
    """ln of Vandermonde(vals) * prod(vals)^power, rows descending."""
    v = np.atleast_2d(vals)
    out = _log_vandermonde(v) + power * np.sum(np.log(v), axis=-1)
    return out if vals.ndim > 1 else float(out[0])


def _log_det_m(a: np.ndarray, b_pool: np.ndarray, tau: int, r: int, n: int):
    """Signed log-determinant of the mixed moment matrix, batched over b.

    a is the descending r-vector of output-Gram eigenvalues; b_pool has
    one descending n-row per inner sample.  The matrix is p x p with
    p = max(n, r): truncated-exponential-tail entries in the r x n core,
    monomials of b in the extra rows (n > r) or of a in the extra
    columns (r > n).  Rows are scaled by their largest log entry before
    the determinant so the huge dynamic range never overflows.
    """
    p = max(r, n)
    s = b_pool.shape[0]
    logm = np.empty((s, p, p))
    x = a[None, :r, None] * b_pool[:, None, :]
    logm[:, :r, :n] = log_upper_exp_tail(x, tau - p)
    if p > n:
        js = np.arange(n + 1, p + 1)
        logm[:, :r, n:] = (tau - js)[None, None, :] * np.log(a)[None, :r, None]
    if p > r:
        is_ = np.arange(r + 1, p + 1)
        with np.errstate(divide="ignore"):
            logb = np.log(b_pool)
        logm[:, r:, :n] = (tau - is_)[None, :, None] * logb[:, None, :]
    row_max = logm.max(axis=2)
    with np.errstate(invalid="ignore"):
        mat = np.exp(logm - row_max[:, :, None])
    mat[~np.isfinite(mat)] = 0.0
    sign, ld = np.linalg.slogdet(mat)
    return sign, ld + row_max.sum(axis=1)


def _separate_descending(vals: np.ndarray, spacing: float) -> np.ndarray:
    """Enforce a minimum relative gap on each descending row, lifting up."""
    v = np.atleast_2d(vals)[:, ::-1].copy()
    for i in range(1, v.shape[1]):
        v[:, i] = np.maximum(v[:, i], v[:, i - 1] * (1.0 + spacing))
    return v[:, ::-1].reshape(np.shape(vals))


def _draw_spectrum_pool(cfg, rho, count, stream, kind):
    """count descending singular-value rows of the chosen input ensemble."""
    out = np.empty((count, cfg.n))
    for i in range(count):
        sub = stream.substream(i)
        if kind == "ustm":
            x = sample_mac_ustm_input(cfg, rho, sub)
            out[i] = np.linalg.svd(x, compute_uv=False)
        else:
            out[i] = sample_gaussian_input_spectrum(cfg, rho, sub)
    return out


def _draw_output_gram_eigs(cfg, rho, index, seed, kind):
    """Descending eigenvalues of Y Y^H for one simulated channel use."""
    if kind == "ustm":
        x = sample_mac_ustm_input(cfg, rho, RngStream(seed, _INPUT_STREAM).substream(index))
    else:
        g = _cgauss_batch(
            RngStream(seed, _INPUT_STREAM).substream(index).generator(), 1, cfg.n, cfg.tau
        )[0]
        x = math.sqrt(rho / cfg.n) * g
    gen = RngStream(seed, _NOISE_STREAM).substream(index).generator()
    s = _cgauss_batch(gen, 1, cfg.r, cfg.n)[0]
    w = _cgauss_batch(gen, 1, cfg.r, cfg.tau)[0]
    y = s @ x + w
    eigs = np.linalg.eigvalsh(y @ y.conj().T)[::-1]
    return np.maximum(eigs, 1e-300)


def _signed_log_mean(sign: np.ndarray, logv: np.ndarray):
    """ln of mean(sign * exp(logv)); None when the mean is nonpositive."""
    finite = np.isfinite(logv)
    if not np.any(finite):
        return None
    m = float(logv[finite].max())
    tot = float(np.sum(sign[finite] * np.exp(logv[finite] - m)))
    if tot <= 0.0:
        return None
    return m + math.log(tot) - math.log(logv.size)


def _lb_core(cfg, rho, budget, pool_kind, kind_label, per_channel_use, spacing=None):
    """Shared nested-MC estimator behind the unitary and Gaussian bounds.

    When ``spacing`` is given the inner spectrum pool is evaluated at two
    relative separations (spacing and spacing/2) and the final value is
    Richardson-extrapolated, with the extrapolation delta folded into the
    standard error.
    """
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    t0 = time.perf_counter()
    tau, n, r, ell = cfg.tau, cfg.n, cfg.r, cfg.ell
    const = log_gamma_product(tau - ell) - log_gamma_product(tau) + r * tau * rho

    inner = budget.inner_samples
    for attempt in range(2):
        pool = _draw_spectrum_pool(
            cfg, rho, inner, RngStream(budget.seed, _POOL_STREAM), pool_kind
        )
        d2 = pool * pool
        d2_variants = (
            [d2]
            if spacing is None
            else [
                _separate_descending(d2, spacing),
                _separate_descending(d2, spacing / 2.0),
            ]
        )
        stats = []
        for d2v in d2_variants:
            ld = np.sum(np.log1p(d2v), axis=1)
            b = d2v / (1.0 + d2v)
            stats.append((b, ld, _log_kappa(b, tau - n)))

        t_y = [np.empty(budget.outer_samples) for _ in stats]
        failed = False
        for i in range(budget.outer_samples):
            a = _draw_output_gram_eigs(cfg, rho, i, budget.seed, pool_kind)
            log_kappa_y = _log_kappa(a, tau - r)
            for v, (b, ld, lke) in enumerate(stats):
                sign, logdet = _log_det_m(a, b, tau, r, n)
                avg = _signed_log_mean(sign, logdet - r * ld - lke)
                if avg is None:
                    failed = True
                    break
                t_y[v][i] = log_kappa_y - avg
            if failed:
                break
        if not failed:
            break
        inner *= 4
    else:
        raise NegativeInnerAverageError(
            "inner spectrum average stayed nonpositive after a 4x retry; "
            "increase inner_samples"
        )

    values, errors = [], []
    for v, (b, ld, lke) in enumerate(stats):
        raw = const - r * float(np.mean(ld)) + float(np.mean(t_y[v]))
        se_outer = float(np.std(t_y[v], ddof=1)) / math.sqrt(budget.outer_samples)
        se_inner = r * float(np.std(ld, ddof=1)) / math.sqrt(inner)
        values.append(raw)
        errors.append(math.hypot(se_outer, se_inner))

    if spacing is None:
        raw, se = values[0], errors[0]
        delta = 0.0
    else:
        delta = abs(values[1] - values[0])
        raw = 2.0 * values[1] - values[0]
        se = math.hypot(errors[1], delta)
        if delta > 10.0 * max(errors[1], 1e-300):
            raise PerturbationInstabilityError(
                f"spectrum-separation delta {delta:.3g} exceeds 10x the "
                f"Monte-Carlo standard error {errors[1]:.3g}"
            )

    scale = 1.0 / tau if per_channel_use else 1.0
    return BoundEstimate(
        value=raw * scale,
        std_error=se * scale,
        kind=kind_label,
        cfg=cfg,
        rho=rho,
        seed=budget.seed,
        n_samples=budget.outer_samples,
        runtime_seconds=time.perf_counter() - t0,
        meta={
            "inner_samples": inner,
            "per_channel_use": per_channel_use,
            "separation_delta": delta,
        },
    )


def ustm_lb(cfg, rho, budget=None, per_channel_use=True):
    """Unitary-input lower bound for single-antenna users, nested MC."""
    budget = budget or LbSampleBudget()
    if any(a != 1 for a in cfg.per_user_antennas):
        raise DomainError(
            "ustm_lb handles single-antenna users; use ustm_lb_multiantenna"
        )
    return _lb_core(cfg, rho, budget, "ustm", "lb_ustm", per_channel_use)


def gaussian_lb(cfg, rho, budget=None, per_channel_use=True):
    """The i.i.d. Gaussian-input lower bound, same estimator as ustm_lb."""
    budget = budget or LbSampleBudget()
    return _lb_core(cfg, rho, budget, "gauss", "lb_gauss", per_channel_use)


def ustm_lb_multiantenna(cfg, rho, budget=None, per_channel_use=True, spacing=1e-5):
    """Unitary-input lower bound when some users have several antennas.

    Each user's block contributes a singular value of multiplicity equal
    to its antenna count, so sampled spectra are degenerate.  They are
    separated by the relative spacing before the determinant machinery
    and the result extrapolated from spacing and spacing/2.  With all
    single-antenna users no repeats occur and this reduces to ustm_lb.
    """
    budget = budget or LbSampleBudget()
    if all(a == 1 for a in cfg.per_user_antennas):
        return ustm_lb(cfg, rho, budget, per_channel_use)
    return _lb_core(cfg, rho, budget, "ustm", "lb_ustm", per_channel_use, spacing)


# ---------------------------------------------------------------------------
# Two-user quadrature route


def _gl_nodes(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


def _adaptive_gl(f, lo, hi, k, rel_tol, depth=0, max_depth=48):
    """Adaptive Gauss-Legendre on [lo, hi] with relative panel tolerance."""
    x, w = _gl_nodes(k)

    def panel(a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return half * float(np.dot(w, f(mid + half * x)))

    whole = panel(lo, hi)
    mid = 0.5 * (lo + hi)
    halves = panel(lo, mid) + panel(mid, hi)
    if abs(whole - halves) <= rel_tol * max(abs(halves), 1e-300):
        return halves
    if depth >= max_depth:
        raise QuadratureError(
            f"adaptive quadrature failed to converge on [{lo}, {hi}]"
        )
    return _adaptive_gl(f, lo, mid, k, rel_tol, depth + 1, max_depth) + _adaptive_gl(
        f, mid, hi, k, rel_tol, depth + 1, max_depth
    )


def _two_user_log_inner(a, tau, r, mu, quad_points):
    """ln of the correlation-angle integral for one output eigenvalue set.

    The integrand is det M(Y Y^H, E(alpha)) * (mu^2 - alpha^2)^(tau-r-1)
    with E(alpha) the two input-Gram eigenvalues expressed through the
    correlation alpha between the two signature rows.  Its magnitude is
    factored out on a coarse grid so the adaptive pass works near 1.
    """

    def log_integrand(alphas):
        alphas = np.asarray(alphas, dtype=float)
        b = np.empty((alphas.size, 2))
        b[:, 0] = (1.0 + alphas) / (mu + alphas)
        b[:, 1] = (1.0 - alphas) / (mu - alphas)
        sign, logdet = _log_det_m(a, b, tau, r, 2)
        logv = logdet + (tau - r - 1) * np.log(mu * mu - alphas * alphas)
        logv[sign <= 0] = -np.inf
        return logv

    grid = np.linspace(1e-6, 1.0 - 1e-6, 65)
    offset = float(np.max(log_integrand(grid)))
    if not np.isfinite(offset):
        raise QuadratureError("two-user inner integrand vanished everywhere")

    def scaled(alphas):
        return np.exp(log_integrand(alphas) - offset)

    val = _adaptive_gl(scaled, 0.0, 1.0, quad_points, 1e-9)
    if val <= 0:
        raise QuadratureError("two-user inner integral came out nonpositive")
    return offset + math.log(val)


def two_user_lb(cfg, rho, budget=None, per_channel_use=True):
    """Quadrature form of the unitary-input bound for two 1-antenna users.

    The inner spectrum average collapses to a one-dimensional integral
    over the correlation between the two unit signature rows, whose
    square follows a Beta(1, tau-1) law.  Only the outer average over
    channel outputs remains Monte Carlo.
    """
    budget = budget or LbSampleBudget()
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if cfg.users != 2 or cfg.per_user_antennas != (1, 1):
        raise DomainError("two_user_lb requires exactly two single-antenna users")
    if cfg.r < 2:
        raise DomainError("two_user_lb requires at least two receive antennas")
    t0 = time.perf_counter()
    tau, r = cfg.tau, cfg.r
    mu = 1.0 + 2.0 / (tau * rho)

    log_mu_integral = _adaptive_gl(
        lambda al: np.log(mu * mu - al) * (1.0 - al) ** (tau - 2),
        0.0,
        1.0,
        budget.quad_points,
        1e-9,
    )
    const = (
        log_gamma_product(tau - 2)
        - log_gamma_product(tau)
        + r * tau * rho
        - math.log(tau * rho / 2.0)
        - math.log(tau - 1.0)
        - r * (tau - 1.0) * log_mu_integral
    )

    t_y = np.empty(budget.outer_samples)
    for i in range(budget.outer_samples):
        a = _draw_output_gram_eigs(cfg, rho, i, budget.seed, "ustm")
        t_y[i] = _log_kappa(a, tau - r) - _two_user_log_inner(
            a, tau, r, mu, budget.quad_points
        )
    raw = const + float(np.mean(t_y))
    se = float(np.std(t_y, ddof=1)) / math.sqrt(budget.outer_samples)
    scale = 1.0 / tau if per_channel_use else 1.0
    return BoundEstimate(
        value=raw * scale,
        std_error=se * scale,
        kind="lb_2user",
        cfg=cfg,
        rho=rho,
        seed=budget.seed,
        n_samples=budget.outer_samples,
        runtime_seconds=time.perf_counter() - t0,
        meta={"per_channel_use": per_channel_use},
    )
