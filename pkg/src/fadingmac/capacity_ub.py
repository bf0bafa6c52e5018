"""Upper bounds on the sum-rate capacity.

Three bounds live here:

* a duality bound for general antenna geometries, split into a closed-form
  part u(rho) plus an inf-sup correction over a Lagrange multiplier and the
  singular-value profile of the auxiliary input,
* a tightened version of the same bound for the square case n = r, whose
  inner expectation has the closed form carried by detkit,
* the coherent (perfect receiver CSI) bound, estimated by Monte Carlo.

All rates are in nats per channel use.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy import special as sps

from . import detkit
from .channel import BoundEstimate, ChannelConfig
from .errors import DomainError, NonConvergenceError
from .randmat import McEstimate, RngStream, _cgauss_batch
from .specfn import log_gamma_product

__all__ = [
    "SaddleConfig",
    "u_general",
    "u_star",
    "g_general",
    "g_star",
    "saddle_solve",
    "perfect_csi_ub",
]

@dataclass
class SaddleConfig:
    """Controls for the inf-sup solver."""

    lambda_rel_offset: float = 1e-9
    outer_tol: float = 5e-4
    bracket_rel_tol: float = 5e-4
    d_min_gap: float = 1e-7
    multistarts: int = 3
    max_outer_iters: int = 80
    nm_maxiter: int = 300
    nm_xatol: float = 1e-4
    nm_fatol: float = 1e-7
    inner_mc_samples: int = 2000
    final_mc_samples: int = 20000
    seed: int = 0


def u_general(
    cfg: ChannelConfig, rho: float, zeta: McEstimate, oconst: McEstimate
) -> float:
    """Closed-form part of the general duality bound."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    tau, n, r = cfg.tau, cfg.n, cfg.r
    ell, p = cfg.ell, cfg.p
    if r > ell and zeta.mean <= 0:
        raise DomainError("zeta must be positive when r > min(n, r)")
    if not 0 < oconst.mean <= 1:
        raise DomainError(f"ordering constant must lie in (0, 1], got {oconst.mean}")
    log_ratio = (
        log_gamma_product(r - ell)
        + log_gamma_product(tau - ell)
        + log_gamma_product(n)
        - log_gamma_product(tau)
        - log_gamma_product(p - ell)
    )
    value = (
        -r
        + (r * n / tau) * math.log(tau * rho / n)
        + log_ratio / tau
        + math.log(oconst.mean) / tau
        + n * r / (tau * rho)
        + (r - ell) * (tau - ell) / tau
    )
    if r > ell:
        value -= (tau - n) * (r - ell) / tau * math.log(zeta.mean)
    return value


def u_star(cfg: ChannelConfig, rho: float) -> float:
    """Closed-form part of the tightened square-case bound (n = r = m)."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if cfg.n != cfg.r:
        raise DomainError("u_star requires n = r")
    m, tau = cfg.n, cfg.tau
    return (
        -m
        + (m * m / tau) * math.log(tau * rho / m)
        + m * m / (tau * rho)
        + (log_gamma_product(m) + log_gamma_product(tau - m) - log_gamma_product(tau))
        / tau
    )


def _u_general_std_error(
    cfg: ChannelConfig, zeta: McEstimate, oconst: McEstimate
) -> float:
    """Linearized propagation of the MC constants through u_general."""
    tau, n, r, ell = cfg.tau, cfg.n, cfg.r, cfg.ell
    var = 0.0
    if oconst.std_error > 0:
        var += (oconst.std_error / (tau * oconst.mean)) ** 2
    if r > ell and zeta.std_error > 0:
        coef = (tau - n) * (r - ell) / tau
        var += (coef * zeta.std_error / zeta.mean) ** 2
    return math.sqrt(var)


def g_general(
    d: np.ndarray,
    lam: float,
    cfg: ChannelConfig,
    rho: float,
    zeta: float,
    g_batch: np.ndarray,
) -> tuple[float, float]:
    """Inner objective of the general bound; returns (mean, std_error).

    The expectation over the r x n Gaussian channel uses the supplied
    fixed batch (common random numbers across optimizer iterates).
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DomainError("d entries must be positive")
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    tau, n, r = cfg.tau, cfg.n, cfg.r
    sum_d2 = float(np.sum(d * d))
    weights = 1.0 + d * d
    a = np.einsum("sij,j,skj->sik", g_batch, weights, g_batch.conj())
    a += zeta * np.eye(r)
    lds = np.linalg.slogdet(a)[1]
    e_mean = float(np.mean(lds))
    e_se = float(np.std(lds, ddof=1) / math.sqrt(lds.size))
    value = (
        n * r * sum_d2 / (tau * rho)
        + (tau - n) * e_mean
        - r * float(np.sum(np.log1p(d * d)))
        + lam * (tau * rho - sum_d2)
    )
    return value, abs(tau - n) * e_se


def g_star(d: np.ndarray, lam: float, cfg: ChannelConfig, rho: float) -> float:
    """Inner objective of the tightened square-case bound, exact."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DomainError("d entries must be positive")
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if cfg.n != cfg.r:
        raise DomainError("g_star requires n = r")
    m, tau = cfg.n, cfg.tau
    sum_d2 = float(np.sum(d * d))
    expect, _ = detkit.perturbed_exp_logdet(np.sort(1.0 + d * d)[::-1], tau)
    return (
        m * m * sum_d2 / (tau * rho)
        - m * float(np.sum(np.log1p(d * d)))
        + lam * (tau * rho - sum_d2)
        + (tau - m) * expect
    )


def _wishart_logdet_mean(m: int, tau: int) -> float:
    """E[ln det(X X^H)] for X m x tau with i.i.d. CN(0,1) entries."""
    return float(np.sum(sps.psi(tau - np.arange(m))))


def _theta_to_d(theta: np.ndarray, min_gap: float) -> np.ndarray:
    """Map unconstrained coordinates to a strictly decreasing positive d.

    ln d_1 = theta_0 and each later entry drops by softplus(theta_i) plus
    the minimum relative gap, which keeps the spectrum of 1 + d^2
    nonsingular for the determinant machinery.
    """
    log_d = np.empty(theta.size)
    log_d[0] = theta[0]
    if theta.size > 1:
        gaps = np.logaddexp(0.0, theta[1:]) + min_gap
        log_d[1:] = theta[0] - np.cumsum(gaps)
    # the clamp keeps d strictly positive and moderate however far the
    # optimizer wanders: entries at the floor are an exact zero as far as
    # the objective goes, the quadratic penalty rejects the ceiling, and
    # the bounded dynamic range keeps the determinant spectra well scaled
    return np.exp(np.clip(log_d, -20.0, 11.0))


def _default_starts(m: int, tau: float, rho: float, scfg: SaddleConfig):
    """Multistart points in theta space for the inner ascent.

    The maximizer profile varies with lambda between branches that keep k
    of the m entries active and push the rest toward zero, so one start
    is planted on each branch: k nearly equal power-tight entries at
    sqrt(tau*rho/k) followed by a steep drop.  A low isotropic start and
    a jittered copy guard the in-between shapes.
    """
    rng = RngStream(scfg.seed, 0xD1CE).generator()
    starts = []
    for k in range(m, 0, -1):
        theta = np.zeros(m)
        theta[0] = 0.5 * math.log(max(tau * rho / k, 1e-12))
        theta[1:k] = -8.0
        if k < m:
            theta[k] = 2.0
        starts.append(theta)
    low = starts[0].copy()
    low[0] -= 2.0
    starts.append(low)
    starts.append(starts[0] + rng.normal(0.0, 0.5, size=m))
    return starts


def _sup_over_d(objective, m: int, starts, scfg: SaddleConfig, warm=None):
    """Maximize the inner objective over d via Nelder-Mead in theta space.

    All seeds are scored once and Nelder-Mead polishes the most promising
    few (plus the warm iterate), which keeps the per-lambda cost bounded
    while still visiting every branch of the landscape.
    """
    seeds = [np.asarray(t, dtype=float) for t in starts]
    if warm is not None:
        seeds.insert(0, np.asarray(warm, dtype=float))
    scored = sorted(
        ((objective(_theta_to_d(t, scfg.d_min_gap)), i) for i, t in enumerate(seeds)),
        reverse=True,
    )
    keep = [seeds[i] for _, i in scored[: max(scfg.multistarts, 1)]]
    if warm is not None and not any(k is seeds[0] for k in keep):
        keep.append(seeds[0])
    best_val = scored[0][0]
    best_theta = seeds[scored[0][1]]
    for theta0 in keep:
        res = optimize.minimize(
            lambda th: -objective(_theta_to_d(th, scfg.d_min_gap)),
            theta0,
            method="Nelder-Mead",
            options={
                "xatol": scfg.nm_xatol,
                "fatol": scfg.nm_fatol,
                "maxiter": scfg.nm_maxiter,
                "maxfev": scfg.nm_maxiter,
            },
        )
        if -res.fun > best_val:
            best_val = -res.fun
            best_theta = res.x
    return best_val, best_theta



def saddle_solve(
    cfg: ChannelConfig,
    rho: float,
    mode: str = "square",
    scfg: SaddleConfig | None = None,
    zeta: McEstimate | None = None,
    oconst: McEstimate | None = None,
) -> BoundEstimate:
    """Full duality upper bound: u + (1/tau) * inf_lambda sup_D g.

    mode "square" uses the exact inner objective (n = r required) and is
    fully deterministic; mode "general" needs the MC constants zeta and
    oconst and optimizes a fixed-batch surrogate of the Gaussian
    expectation, re-estimating the final value with a fresh larger batch.
    """
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if mode not in ("square", "general"):
        raise DomainError(f"mode must be 'square' or 'general', got {mode!r}")
    scfg = scfg or SaddleConfig()
    t0 = time.perf_counter()
    tau, n, r = cfg.tau, cfg.n, cfg.r

    if mode == "square":
        if n != r:
            raise DomainError("square mode requires n = r")
        u_val = u_star(cfg, rho)
        u_se = 0.0
        n_samples = 0

        def inner(d, lam):
            return g_star(d, lam, cfg, rho)

    else:
        if zeta is None or oconst is None:
            raise DomainError("general mode requires zeta and oconst estimates")
        u_val = u_general(cfg, rho, zeta, oconst)
        u_se = _u_general_std_error(cfg, zeta, oconst)
        batch = _cgauss_batch(
            RngStream(scfg.seed, 0xB0).generator(), scfg.inner_mc_samples, r, n
        )
        n_samples = scfg.inner_mc_samples

        def inner(d, lam):
            return g_general(d, lam, cfg, rho, zeta.mean, batch)[0]

    lam_lo = n * r / (tau * rho) * (1.0 + scfg.lambda_rel_offset)
    starts = _default_starts(n, tau, rho, scfg)
    warm = {"theta": None}
    # The all-zero profile is a branch of its own; in the square case its
    # objective has the exact Wishart closed form, so it enters as an
    # analytic candidate rather than an optimizer seed.
    zero_base = (tau - n) * _wishart_logdet_mean(n, tau) if mode == "square" else None

    trace = []

    def eval_lam(lam):
        """Returns (sup value, power residual tau*rho - sum d_i^2)."""
        val, theta = _sup_over_d(
            lambda d: inner(d, lam), n, starts, scfg, warm=warm["theta"]
        )
        warm["theta"] = theta
        d = _theta_to_d(theta, scfg.d_min_gap)
        resid = tau * rho - float(np.sum(d * d))
        if zero_base is not None:
            zval = zero_base + lam * tau * rho
            # a maximizer that collapsed to zero was scored through the
            # near-unit Monte-Carlo fallback; the closed form supersedes it
            if zval > val or np.all(d < 1e-6):
                val = zval
                resid = tau * rho
        trace.append((lam, val, resid, theta))
        return val, resid

    # sup_D g is convex in lambda (a pointwise sup of affine functions)
    # with slope tau*rho - sum d_i^2 at the maximizer, which is monotone
    # increasing in lambda.  Locate the minimizer by bisecting on the
    # sign of that residual: far more robust than comparing noisy sup
    # values directly.
    lam_a = lam_lo
    lam_b = None
    lam = max(2.0 * lam_lo, lam_lo + 1e-6)
    for _ in range(scfg.max_outer_iters):
        _, resid = eval_lam(lam)
        if resid > 0:
            lam_b = lam
            break
        lam_a = lam
        lam *= 2.0
    if lam_b is None:
        raise NonConvergenceError(
            "could not bracket the outer minimum over lambda",
            best=min(v for _, v, _, _ in trace),
            trace=trace,
        )

    # Safeguarded secant on the residual in log-lambda: the residual is
    # monotone increasing, so each iterate shrinks the bracket.
    prev = (math.log(lam_a), trace[-2][2]) if len(trace) >= 2 else None
    cur = (math.log(lam_b), trace[-1][2])
    prev_v = None
    for _ in range(scfg.max_outer_iters):
        if prev is not None and cur[1] != prev[1]:
            x = cur[0] - cur[1] * (cur[0] - prev[0]) / (cur[1] - prev[1])
        else:
            x = 0.5 * (math.log(lam_a) + math.log(lam_b))
        if not math.log(lam_a) < x < math.log(lam_b):
            x = 0.5 * (math.log(lam_a) + math.log(lam_b))
        mid = math.exp(x)
        v, resid = eval_lam(mid)
        if resid > 0:
            lam_b = mid
        else:
            lam_a = mid
        prev, cur = cur, (x, resid)
        tight = (lam_b - lam_a) < scfg.bracket_rel_tol * lam_b
        settled = prev_v is not None and abs(v - prev_v) < scfg.outer_tol
        prev_v = v
        if tight and settled:
            break

    # One more full solve at the bracket midpoint; the bound is valid at
    # every evaluated lambda (each used the full multistart set), so the
    # smallest sup seen anywhere is the tightest certified value.
    eval_lam(math.sqrt(lam_a * lam_b))
    inf_val, lam_fin, theta_fin = min(
        ((v, lam, th) for lam, v, _, th in trace), key=lambda t: t[0]
    )

    value = u_val + inf_val / tau
    if mode == "general":
        # Re-estimate the inner expectation at the final maximizer with a
        # fresh batch so the surrogate bias does not leak into the result.
        d_fin = _theta_to_d(theta_fin, scfg.d_min_gap)
        fresh = _cgauss_batch(
            RngStream(scfg.seed, 0xF1).generator(), scfg.final_mc_samples, r, n
        )
        g_fin, g_se = g_general(d_fin, lam_fin, cfg, rho, zeta.mean, fresh)
        value = u_val + g_fin / tau
        se = math.sqrt(u_se * u_se + (g_se / tau) ** 2)
        n_samples = scfg.final_mc_samples
    else:
        se = u_se

    kind = "ub_square" if mode == "square" else "ub_general"
    return BoundEstimate(
        value=value,
        std_error=se,
        kind=kind,
        cfg=cfg,
        rho=rho,
        seed=scfg.seed,
        n_samples=n_samples,
        runtime_seconds=time.perf_counter() - t0,
        meta={"lambda_evals": len(trace)},
    )


def perfect_csi_ub(
    cfg: ChannelConfig,
    rho: float,
    n_samples: int = 200000,
    seed: int = 0,
    stream_id: int = 0,
) -> BoundEstimate:
    """Coherent upper bound E[ln det(I_r + (rho/n) S S^H)], S r x n CN(0,1)."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    t0 = time.perf_counter()
    base = RngStream(seed, stream_id)
    block = 1 << 12
    total = 0.0
    total_sq = 0.0
    count = 0
    idx = 0
    while count < n_samples:
        take = min(block, n_samples - count)
        g = base.substream(idx).generator()
        s = _cgauss_batch(g, take, cfg.r, cfg.n)
        a = np.eye(cfg.r) + (rho / cfg.n) * np.einsum("sij,skj->sik", s, s.conj())
        lds = np.linalg.slogdet(a)[1]
        total += float(lds.sum())
        total_sq += float((lds * lds).sum())
        count += take
        idx += 1
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0) * count / (count - 1)
    return BoundEstimate(
        value=mean,
        std_error=math.sqrt(var / count),
        kind="ub_csi",
        cfg=cfg,
        rho=rho,
        seed=seed,
        n_samples=count,
        runtime_seconds=time.perf_counter() - t0,
    )
