"""End-to-end acceptance gate.

Each test prints one `CRITERION <n> PASS/FAIL` line summarizing the
check: the headline four-user gap claim, ordering of all bounds across a
configuration suite, agreement of independent computation routes, the
closed-form determinant identities, an exhaustive grid check of the
saddle solver, the high-SNR slope, byte-level reproducibility, and the
vanishing-SNR limit.

The heavy sweeps run on fixed seeds, so every numeric outcome here is
deterministic; only the wall-clock assertions depend on the machine.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, optimize
from scipy import special as sps

from fadingmac import detkit
from fadingmac.capacity_lb import LbSampleBudget, gaussian_lb, two_user_lb, ustm_lb
from fadingmac.capacity_ub import perfect_csi_ub, saddle_solve, u_star
from fadingmac.channel import ChannelConfig
from fadingmac.specfn import log_gamma_product
from fadingmac.sweep import SweepSpec, emit_csv, run_sweep

GAP_CFG = ChannelConfig.single_antenna(tau=10, users=4, rx=4)
GAP_SEED = 3

ORDERING_GRID = (
    (2, 2, 4),
    (2, 2, 10),
    (3, 3, 6),
    (3, 3, 10),
    (4, 4, 8),
    (4, 4, 10),
)
ORDERING_SNRS = (0.0, 10.0, 20.0, 30.0)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {num} {'PASS' if ok else 'FAIL'}: {detail}", flush=True)
    assert ok, f"criterion {num}: {detail}"


# ---------------------------------------------------------------------------
# shared heavy computations


@pytest.fixture(scope="module")
def gap_sweep(tmp_path_factory):
    """The four-user 10 dB sweep: both bounds, default budgets, seed fixed."""
    spec = SweepSpec(
        cfg=GAP_CFG,
        snr_db=(10.0,),
        bounds=("ub_square", "lb_ustm"),
        seed=GAP_SEED,
    )
    t0 = time.time()
    results = run_sweep(spec, parallelism=1)
    elapsed = time.time() - t0
    path = tmp_path_factory.mktemp("gap") / "serial.csv"
    emit_csv(results, path, spec)
    return spec, results, elapsed, path.read_bytes()


@pytest.fixture(scope="module")
def ordering_ub_grid():
    """Duality upper bounds over the whole ordering suite, with timing."""
    t0 = time.time()
    ubs = {}
    for users, rx, tau in ORDERING_GRID:
        cfg = ChannelConfig.single_antenna(tau=tau, users=users, rx=rx)
        for snr in ORDERING_SNRS:
            est = saddle_solve(cfg, 10.0 ** (snr / 10.0), "square")
            ubs[(users, rx, tau, snr)] = est
    return ubs, time.time() - t0


# ---------------------------------------------------------------------------
# 1. headline gap between the upper and lower bound at 10 dB


def test_criterion_1_four_user_gap(gap_sweep):
    _, results, elapsed, _ = gap_sweep
    by_kind = {p.kind: p for p in results}
    ub = by_kind["ub_square"]
    lb = by_kind["lb_ustm"]
    assert not ub.failed and not lb.failed
    gap = (ub.value - lb.value) / ub.value
    allowance = 0.08 + 3.0 * math.hypot(ub.std_error, lb.std_error) / ub.value
    ok = gap <= allowance and elapsed <= 300.0
    _report(
        1,
        ok,
        f"(4 users, r=4, tau=10) at 10 dB: ub={ub.value:.5f} "
        f"lb={lb.value:.5f}+-{lb.std_error:.5f}, gap={gap:.4f} <= "
        f"0.08 + 3 sigma = {allowance:.4f}, runtime {elapsed:.0f}s <= 300s",
    )


# ---------------------------------------------------------------------------
# 2. bound ordering across six configurations and four SNRs


def test_criterion_2_ordering_suite(ordering_ub_grid):
    ubs, ub_elapsed = ordering_ub_grid
    budget = LbSampleBudget(outer_samples=4000, inner_samples=1000, seed=0)
    t0 = time.time()
    violations = []
    for users, rx, tau in ORDERING_GRID:
        cfg = ChannelConfig.single_antenna(tau=tau, users=users, rx=rx)
        for snr in ORDERING_SNRS:
            rho = 10.0 ** (snr / 10.0)
            ub = ubs[(users, rx, tau, snr)]
            csi = perfect_csi_ub(cfg, rho, n_samples=20000, seed=0)
            lb = ustm_lb(cfg, rho, budget)
            tag = f"({users},{rx},{tau})@{snr:.0f}dB"
            if lb.value > ub.value + 3.0 * math.hypot(lb.std_error, ub.std_error):
                violations.append(f"{tag}: lb_ustm > ub_square")
            if lb.value > csi.value + 3.0 * math.hypot(lb.std_error, csi.std_error):
                violations.append(f"{tag}: lb_ustm > ub_csi")
            if snr >= 20.0:
                gs = gaussian_lb(cfg, rho, budget)
                if gs.value > lb.value + 3.0 * math.hypot(gs.std_error, lb.std_error):
                    violations.append(f"{tag}: lb_gauss > lb_ustm")
    elapsed = ub_elapsed + (time.time() - t0)
    ok = not violations and elapsed <= 1800.0
    _report(
        2,
        ok,
        f"6 configs x 4 SNRs: lb_ustm <= ub_square, lb_ustm <= ub_csi, "
        f"lb_gauss <= lb_ustm (20/30 dB), all within 3 sigma; "
        f"violations={violations or 'none'}; runtime {elapsed:.0f}s <= 1800s",
    )


# ---------------------------------------------------------------------------
# 3. the two-user closed-form route against the generic sampling route


def test_criterion_3_two_user_cross_formula():
    budget = LbSampleBudget(outer_samples=4000, inner_samples=1000, seed=0)
    worst = 0.0
    ok = True
    for tau in (4, 10):
        cfg = ChannelConfig.single_antenna(tau=tau, users=2, rx=2)
        for snr in (5.0, 10.0, 20.0):
            rho = 10.0 ** (snr / 10.0)
            a = two_user_lb(cfg, rho, budget)
            b = ustm_lb(cfg, rho, budget)
            sigma = math.hypot(a.std_error, b.std_error)
            ratio = abs(a.value - b.value) / sigma
            worst = max(worst, ratio)
            ok = ok and ratio <= 3.0
    _report(
        3,
        ok,
        f"two-user closed form vs generic sampling at tau in (4,10), "
        f"SNR in (5,10,20) dB: worst |diff|/sigma = {worst:.2f} <= 3",
    )


# ---------------------------------------------------------------------------
# 4. closed form for E[ln det(X L X^H)] against a million-sample MC


def _mc_exp_logdet(l0, m_ambient, n_samples, seed):
    rng = np.random.default_rng(seed)
    weights = np.concatenate([l0, np.ones(m_ambient - l0.size)])
    lds = []
    chunk = 100000
    for start in range(0, n_samples, chunk):
        size = min(chunk, n_samples - start)
        x = (
            rng.standard_normal((size, l0.size, m_ambient))
            + 1j * rng.standard_normal((size, l0.size, m_ambient))
        ) / np.sqrt(2.0)
        a = (x * weights) @ x.conj().transpose(0, 2, 1)
        lds.append(np.linalg.slogdet(a)[1])
    ld = np.concatenate(lds)
    return float(np.mean(ld)), float(np.std(ld, ddof=1) / math.sqrt(ld.size))


def test_criterion_4_exp_logdet_closed_form_vs_mc():
    rng = np.random.default_rng(2024)
    t0 = time.time()
    worst = 0.0
    ok = True
    for n, m in ((1, 2), (1, 3), (2, 3), (2, 4)):
        for rep in range(5):
            l0 = np.sort(rng.uniform(1.0 + 1e-6, 10.0, size=n))[::-1]
            closed = detkit.exp_logdet_gauss_quadratic(l0, m)
            mc, se = _mc_exp_logdet(l0, m, 1000000, seed=1000 * n + 10 * m + rep)
            ratio = abs(closed - mc) / se
            worst = max(worst, ratio)
            ok = ok and ratio <= 4.0
    elapsed = time.time() - t0
    ok = ok and elapsed <= 120.0
    _report(
        4,
        ok,
        f"closed form vs 1e6-sample MC over 4 shapes x 5 spectra: "
        f"worst |diff|/se = {worst:.2f} <= 4, runtime {elapsed:.0f}s <= 120s",
    )


# ---------------------------------------------------------------------------
# 5. determinant identity linking the moment matrix to its reduced form


def test_criterion_5_hk_determinant_identity():
    rng = np.random.default_rng(7)
    worst = 0.0
    for n, m in ((1, 2), (1, 3), (2, 3), (2, 4)):
        l0 = np.sort(rng.uniform(1.2, 10.0, size=n))[::-1]
        pref = math.exp(log_gamma_product(n) + log_gamma_product(m - n))
        for k in range(1, n + 1):
            det_h = np.linalg.det(detkit.build_Hk(l0, m, k))
            det_r = np.linalg.det(detkit.build_Rk(l0, k, m))
            worst = max(worst, abs(det_h - pref * det_r) / abs(det_h))
    ok = worst <= 1e-8
    _report(5, ok, f"det H_k = prefactor * det R_k: worst rel err {worst:.2e} <= 1e-8")


# ---------------------------------------------------------------------------
# 6. ordered-region integral identity on polynomial instances


def test_criterion_6_andreief_polynomials():
    cases = [
        ([lambda x: 1.0, lambda x: x], [lambda x: x], np.array([[1.0], [2.0]])),
        (
            [lambda x: 1.0, lambda x: x, lambda x: x * x],
            [lambda x: 1.0, lambda x: x],
            np.array([[1.0], [0.5], [2.0]]),
        ),
    ]
    worst = 0.0
    for f, g, constants in cases:
        lhs, rhs = detkit.andreief_check(f, g, constants, 0.0, 1.0)
        worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-8
    _report(6, ok, f"integral identity on n <= 2 polynomials: worst |lhs-rhs| "
                   f"{worst:.2e} <= 1e-8")


# ---------------------------------------------------------------------------
# 7. saddle solver against an exhaustive 400 x 400 grid search


def _exp_log_weighted_chisq(w1: float, q: int) -> float:
    """E[ln(w1*A + G)] for A ~ Exp(1) and G ~ Gamma(q, 1)."""
    norm = sps.gamma(q)

    def f(x):
        t = x / w1
        if t > 30.0:
            scaled = (1.0 - 1.0 / t + 2.0 / t**2 - 6.0 / t**3) / t
        else:
            scaled = math.exp(t) * sps.exp1(t)
        return (math.log(x) + scaled) * x ** (q - 1) * math.exp(-x) / norm

    head, _ = integrate.quad(f, 0.0, 1.0, limit=200)
    tail, _ = integrate.quad(f, 1.0, np.inf, limit=200)
    return head + tail


def _grid_saddle_rank_one(tau: int, rho: float, n_grid: int = 400) -> float:
    """Exhaustive inf-sup over a log-spaced (signal level, multiplier) grid."""
    lam_lo = 1.0 / (tau * rho)
    lams = np.geomspace(lam_lo * (1.0 + 1e-9), 200.0 * lam_lo, n_grid)
    d_hi = 4.0 * math.sqrt((tau - 1.0) / (lams[0] - lam_lo))
    ds = np.geomspace(1e-3, d_hi, n_grid)

    # the multiplier enters linearly, so the expensive expectation over the
    # quadratic form is computed once per signal level
    d2 = ds * ds
    lam_free = (
        d2 / (tau * rho)
        - np.log1p(d2)
        + (tau - 1.0) * np.array([_exp_log_weighted_chisq(1.0 + v, tau - 1) for v in d2])
    )
    zero_branch = (tau - 1.0) * float(sps.psi(tau))

    v = np.empty(lams.size)
    for i, lam in enumerate(lams):
        sup = float(np.max(lam_free + lam * (tau * rho - d2)))
        v[i] = max(sup, zero_branch + lam * tau * rho)
    cfg = ChannelConfig.single_antenna(tau, 1, 1)
    return u_star(cfg, rho) + float(np.min(v)) / tau


def test_criterion_7_saddle_grid_oracle():
    worst = 0.0
    ok = True
    for tau, rho in ((2, 1.0), (4, 10.0)):
        cfg = ChannelConfig.single_antenna(tau, 1, 1)
        est = saddle_solve(cfg, rho, "square")
        grid = _grid_saddle_rank_one(tau, rho)
        diff = abs(est.value - grid)
        worst = max(worst, diff)
        ok = ok and diff <= 1e-3
    _report(
        7,
        ok,
        f"solver vs exhaustive 400x400 grid at (tau=2, rho=1) and "
        f"(tau=4, rho=10): worst |diff| = {worst:.2e} <= 1e-3 nats",
    )


# ---------------------------------------------------------------------------
# 8. high-SNR slope of the upper bound


def test_criterion_8_high_snr_slope(ordering_ub_grid):
    ubs, _ = ordering_ub_grid
    cfg = ChannelConfig.single_antenna(tau=10, users=4, rx=4)
    points = {
        20.0: ubs[(4, 4, 10, 20.0)].value,
        30.0: ubs[(4, 4, 10, 30.0)].value,
        40.0: saddle_solve(cfg, 1e4, "square").value,
    }
    ln_rho = np.array([snr / 10.0 * math.log(10.0) for snr in sorted(points)])
    vals = np.array([points[snr] for snr in sorted(points)])
    slope = float(np.polyfit(ln_rho, vals, 1)[0])
    expected = 4.0 * (1.0 - 4.0 / 10.0)
    rel = abs(slope - expected) / expected
    ok = rel <= 0.10
    _report(
        8,
        ok,
        f"(4,4,10) upper bound slope on 20-40 dB: {slope:.4f} nats per unit "
        f"ln(SNR) vs {expected} expected, rel err {rel:.3f} <= 0.10",
    )


# ---------------------------------------------------------------------------
# 9. byte-identical output across runs and parallelism levels


def test_criterion_9_byte_identical_csv(gap_sweep, tmp_path):
    spec, _, _, serial_bytes = gap_sweep
    results = run_sweep(spec, parallelism=8)
    path = tmp_path / "parallel.csv"
    emit_csv(results, path, spec)
    ok = path.read_bytes() == serial_bytes
    _report(
        9,
        ok,
        "same-seed sweep reruns at parallelism 1 and 8 produce "
        f"byte-identical CSV: {'yes' if ok else 'no'}",
    )


# ---------------------------------------------------------------------------
# 10. both lower bounds vanish with the SNR


def test_criterion_10_vanishing_snr():
    cfg = ChannelConfig.single_antenna(tau=4, users=2, rx=2)
    rho = 1e-6
    u = ustm_lb(cfg, rho, LbSampleBudget(seed=0))
    g = gaussian_lb(cfg, rho, LbSampleBudget(seed=0))
    ok = abs(u.value) <= 5.0 * u.std_error and abs(g.value) <= 5.0 * g.std_error
    _report(
        10,
        ok,
        f"at rho=1e-6 on (2,2,4): |lb_ustm|={abs(u.value):.2e} <= "
        f"5se={5 * u.std_error:.2e}, |lb_gauss|={abs(g.value):.2e} <= "
        f"5se={5 * g.std_error:.2e}",
    )
