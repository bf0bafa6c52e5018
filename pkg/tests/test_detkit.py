"""Tests for the determinant machinery."""

import math

import numpy as np
import pytest
from scipy import special as sps

from fadingmac import detkit
from fadingmac.errors import (
    DegenerateSpectrumError,
    DimensionError,
    DomainError,
)
from fadingmac.specfn import log_gamma_product, upper_exp_tail


def _cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Vandermonde / kappa


def test_vandermonde_direct_product():
    a = np.array([5.0, 3.0, 2.0, 0.5])
    direct = 1.0
    for i in range(a.size):
        for j in range(i + 1, a.size):
            direct *= a[i] - a[j]
    lv = detkit.vandermonde(a)
    assert lv.sign == 1
    assert math.exp(lv.log_magnitude) == pytest.approx(direct, rel=1e-12)


def test_kappa_matches_definition():
    a = np.array([4.0, 1.5, 0.25])
    for k in (0, 1, 3):
        lv = detkit.kappa(a, k)
        expected = math.exp(detkit.vandermonde(a).log_magnitude) * np.prod(a) ** k
        assert lv.value() == pytest.approx(expected, rel=1e-12)


def test_batched_log_kappa_matches_scalar():
    rng = np.random.default_rng(5)
    spectra = np.sort(rng.uniform(0.1, 9.0, size=(6, 4)), axis=1)[:, ::-1]
    batch = detkit.log_kappa_batch(spectra, 3)
    for row, got in zip(spectra, batch):
        assert got == pytest.approx(detkit.kappa(row, 3).log_magnitude, rel=1e-12)


def test_check_spectrum_rejects_bad_input():
    with pytest.raises(DomainError):
        detkit.check_spectrum([2.0, -1.0])
    with pytest.raises(DegenerateSpectrumError):
        detkit.check_spectrum([2.0, 2.0])
    with pytest.raises(DegenerateSpectrumError):
        detkit.check_spectrum([1.0, 2.0])  # increasing


# ---------------------------------------------------------------------------
# Signed-log determinants


def test_signed_logdet_matches_numpy():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = rng.integers(2, 6)
        a = rng.standard_normal((m, m))
        lv = detkit.signed_logdet(a)
        s, ld = np.linalg.slogdet(a)
        assert lv.sign == s
        assert lv.log_magnitude == pytest.approx(ld, rel=1e-9, abs=1e-9)


def test_signed_logdet_extreme_scales():
    # diag(1e200, 1e-200) would overflow a naive det; logdet is exactly 0
    log_mag = np.log(np.array([[1e200, 1e-300], [1e-300, 1e-200]]))
    sign = np.ones((2, 2))
    lv = detkit.signed_logdet((log_mag, sign))
    assert lv.sign == 1
    assert lv.log_magnitude == pytest.approx(0.0, abs=1e-6)


def test_batched_signed_logdet_stacks():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((7, 3, 3))
    sign = np.sign(a)
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(a))
    s, ld = detkit.batched_signed_logdet(log_mag, sign)
    s_ref, ld_ref = np.linalg.slogdet(a)
    assert np.array_equal(s, s_ref)
    assert np.allclose(ld, ld_ref)


def test_signed_logdet_rejects_rectangular():
    with pytest.raises(DimensionError):
        detkit.signed_logdet(np.ones((2, 3)))


# ---------------------------------------------------------------------------
# The mixed tail/power matrix


def test_build_m_square_entries():
    a = np.array([3.0, 1.0])
    b = np.array([0.9, 0.4])
    tau = 5
    log_mag, sign = detkit.build_M(a, b, tau)
    assert log_mag.shape == (2, 2)
    assert np.all(sign == 1)
    for i in range(2):
        for j in range(2):
            ref = upper_exp_tail(float(a[i] * b[j]), tau - 2)
            assert log_mag[i, j] == pytest.approx(ref.log_magnitude, rel=1e-10)


def test_build_m_slack_rows_and_columns():
    tau = 6
    # more inputs than outputs: slack rows hold powers of b
    a = np.array([2.0])
    b = np.array([0.8, 0.5, 0.2])
    log_mag, _ = detkit.build_M(a, b, tau)
    assert log_mag.shape == (3, 3)
    for i, exp in zip((1, 2), (tau - 2, tau - 3)):
        assert np.allclose(log_mag[i], exp * np.log(b))
    # more outputs than inputs: slack columns hold powers of a
    a2 = np.array([4.0, 2.0, 1.0])
    b2 = np.array([0.7])
    log_mag2, _ = detkit.build_M(a2, b2, tau)
    for j, exp in zip((1, 2), (tau - 2, tau - 3)):
        assert np.allclose(log_mag2[:, j], exp * np.log(a2))


def test_build_m_rejects_small_tau():
    with pytest.raises(DimensionError):
        detkit.build_M(np.array([2.0, 1.0]), np.array([0.5]), 1)


# ---------------------------------------------------------------------------
# Closed form for E[log det(X L X^H)] against Monte Carlo


def _mc_exp_logdet(l0, m_ambient, n_samples, seed):
    rng = np.random.default_rng(seed)
    weights = np.concatenate([l0, np.ones(m_ambient - l0.size)])
    x = _cgauss(rng, n_samples, l0.size, m_ambient)
    a = (x * weights) @ x.conj().transpose(0, 2, 1)
    ld = np.linalg.slogdet(a)[1]
    return float(np.mean(ld)), float(np.std(ld, ddof=1) / math.sqrt(n_samples))


@pytest.mark.parametrize(
    "l0,m_ambient",
    [
        (np.array([6.0]), 2),
        (np.array([2.5]), 3),
        (np.array([7.0, 2.0]), 3),
        (np.array([9.0, 4.0]), 4),
    ],
)
def test_exp_logdet_closed_form_vs_mc(l0, m_ambient):
    closed = detkit.exp_logdet_gauss_quadratic(l0, m_ambient)
    mc, se = _mc_exp_logdet(l0, m_ambient, 200000, seed=42)
    assert abs(closed - mc) < 4.0 * se


def test_hk_determinant_identity():
    # det H_k equals the gamma-product prefactor times det R_k
    rng = np.random.default_rng(7)
    for n, m in ((1, 2), (1, 3), (2, 3), (2, 4)):
        l0 = np.sort(rng.uniform(1.2, 10.0, size=n))[::-1]
        pref = math.exp(log_gamma_product(n) + log_gamma_product(m - n))
        for k in range(1, n + 1):
            hk = detkit.build_Hk(l0, m, k)
            rk = detkit.build_Rk(l0, k, m)
            det_h = np.linalg.det(hk)
            det_r = np.linalg.det(rk)
            assert det_h == pytest.approx(pref * det_r, rel=1e-8)


def test_sum_det_rk_consistent_with_individual_dets():
    l0 = np.array([5.0, 2.0])
    m = 4
    direct = sum(np.linalg.det(detkit.build_Rk(l0, k, m)) for k in (1, 2))
    lv = detkit.sum_det_Rk_log(l0, m)
    assert lv.value() == pytest.approx(direct, rel=1e-9)


def test_exp_logdet_rejects_bad_spectra():
    with pytest.raises(DomainError):
        detkit.exp_logdet_gauss_quadratic(np.array([0.5]), 2)
    with pytest.raises(DimensionError):
        detkit.exp_logdet_gauss_quadratic(np.array([2.0, 1.5]), 2)


# ---------------------------------------------------------------------------
# Repeated / near-unit spectra


def test_separate_repeats_properties():
    out = detkit.separate_repeats(np.array([3.0, 3.0, 3.0]), 1e-4)
    assert out.shape == (3,)
    assert np.all(out[:-1] > out[1:])
    assert np.all(out[:-1] / out[1:] >= 1.0 + 0.5e-4)
    assert np.allclose(out, 3.0, rtol=1e-3)
    # a well separated spectrum passes through unchanged
    clean = np.array([5.0, 3.0, 2.0])
    assert np.allclose(detkit.separate_repeats(clean, 1e-6), clean)


def test_perturbed_exp_logdet_matches_closed_form_when_clean():
    l0 = np.array([6.0, 2.0])
    closed = detkit.exp_logdet_gauss_quadratic(l0, 4)
    value, err = detkit.perturbed_exp_logdet(l0, 4)
    assert value == pytest.approx(closed, rel=1e-12)
    assert err == 0.0


def test_perturbed_exp_logdet_repeated_spectrum_vs_mc():
    l0 = np.array([4.0, 4.0])
    value, err = detkit.perturbed_exp_logdet(l0, 4)
    mc, se = _mc_exp_logdet(l0, 4, 200000, seed=1)
    assert abs(value - mc) < 4.0 * math.hypot(se, err) + 1e-3


def test_perturbed_exp_logdet_near_unit_spectrum_vs_mc():
    l0 = np.array([1.0 + 1e-9, 1.0 + 1e-12])
    value, err = detkit.perturbed_exp_logdet(l0, 4)
    mc, se = _mc_exp_logdet(l0, 4, 200000, seed=2)
    assert err > 0.0  # Monte-Carlo fallback engaged
    assert abs(value - mc) < 4.0 * math.hypot(se, err)


def test_perturbed_exp_logdet_rejects_below_one():
    with pytest.raises(DomainError):
        detkit.perturbed_exp_logdet(np.array([0.9]), 3)


# ---------------------------------------------------------------------------
# Ordered-region integral identity


def test_andreief_check_polynomials_n1():
    f = [lambda x: 1.0, lambda x: x]
    g = [lambda x: x]
    constants = np.array([[1.0], [2.0]])
    lhs, rhs = detkit.andreief_check(f, g, constants, 0.0, 1.0)
    assert lhs == pytest.approx(rhs, abs=1e-8)


def test_andreief_check_polynomials_n2():
    f = [lambda x: 1.0, lambda x: x, lambda x: x * x]
    g = [lambda x: 1.0, lambda x: x]
    constants = np.array([[1.0], [0.5], [2.0]])
    lhs, rhs = detkit.andreief_check(f, g, constants, 0.0, 1.0)
    assert lhs == pytest.approx(rhs, abs=1e-8)


def test_andreief_check_square_case():
    f = [lambda x: math.exp(-x), lambda x: x * math.exp(-x)]
    g = [lambda x: 1.0, lambda x: x]
    lhs, rhs = detkit.andreief_check(f, g, np.zeros((2, 0)), 0.0, 2.0)
    assert lhs == pytest.approx(rhs, abs=1e-8)


# ---------------------------------------------------------------------------
# Determinant-ratio limit with derivative columns


def test_det_ratio_limit_against_direct_ratio():
    # f_i are smooth exponentials; compare the derivative-column limit
    # against the raw ratio at a small but finite eigenvalue separation
    rates = (0.3, 0.7, 1.1)
    f = [lambda x, c=c: math.exp(c * x) for c in rates]
    a_head = np.array([2.0])
    a0 = 1.0

    limit = detkit.det_ratio_limit(f, a_head, a0, 3)

    eps = 1e-4
    trailing = np.array([a0 + eps, a0])
    spec = np.concatenate([a_head, trailing])
    e = np.array([[fi(x) for x in spec] for fi in f])
    vdm = 1.0
    for i in range(3):
        for j in range(i + 1, 3):
            vdm *= spec[i] - spec[j]
    direct = np.linalg.det(e) / vdm
    assert limit == pytest.approx(direct, rel=1e-3)
