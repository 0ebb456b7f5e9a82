import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eee_urllc import arq_ebp as arq
from eee_urllc.effective_capacity import QoSConstraints, ec_stochastic
from eee_urllc.eee_models import PowerModel, TrafficModel
from eee_urllc.errors import DomainError
from eee_urllc.fbl_rate import LinkParams, rate_moments
from eee_urllc.oracles import finite_diff

import frozen_oracles as F
from conftest import db, within_stderr

EPS_T = 1e-9
FIG7 = LinkParams(500, db(6.0), 1.0, EPS_T)
MOM = rate_moments(FIG7)
PM = PowerModel(1.2, 0.2)


def test_params_validation():
    with pytest.raises(DomainError):
        arq.ArqParams(1e-5, 1e-3, 1e-9)
    with pytest.raises(DomainError):
        arq.ArqParams(1e-12, 1.0, 1e-9)
    a = arq.ArqParams.at_equality(1e-3, 1e-9)
    assert a.eps1 * a.eps2 == pytest.approx(1e-9, rel=1e-15)


def test_no_relaxation_rates_coincide():
    a = arq.ArqParams(EPS_T, EPS_T, EPS_T)
    r = arq.arq_rates(FIG7, a, moments=MOM)
    assert r.r1 == r.r0 and r.r2 == r.r0
    assert r.kappa == pytest.approx((1 - EPS_T) * r.r0 + EPS_T * r.r0 / 2, rel=1e-15)
    assert r.kappa < r.r0


@given(st.floats(1e-8, 0.4), st.floats(1e-8, 0.4))
def test_first_round_rate_increasing_in_eps1(e1, e2):
    if e1 < e2:
        r1 = arq.arq_rates(FIG7, arq.ArqParams.at_equality(max(e1, 2e-9), EPS_T), moments=MOM).r1
        r2 = arq.arq_rates(FIG7, arq.ArqParams.at_equality(max(e2, 2e-9), EPS_T), moments=MOM).r1
        assert r2 >= r1


def test_rates_vs_monte_carlo():
    a = arq.ArqParams.at_equality(math.sqrt(EPS_T), EPS_T)
    r = arq.arq_rates(FIG7, a, moments=MOM)
    for got, (mean, se) in zip((r.r0, r.r1, r.r2), F.MC_ARQ_RATES):
        assert within_stderr(got, mean, se)


def test_nbp_modified_synthetic_root():
    nb = arq.nbp_modified(arq.ArqRates(2.0, 0.0, 0.0, 1.0), 1.0)
    golden = (math.sqrt(5) - 1) / 2
    assert nb.p_nb == pytest.approx(golden, rel=1e-14)
    assert golden == pytest.approx(1.0 / (golden * (2.0 - 1.0) + 1.0), rel=1e-14)


def test_nbp_modified_removable_singularity():
    assert arq.nbp_modified(arq.ArqRates(1.5, 0, 0, 1.5), 0.6).p_nb == pytest.approx(0.4, rel=1e-15)


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(1e-9, 3))
def test_nbp_modified_solves_fixed_point(r0, kappa, lam):
    nb = arq.nbp_modified(arq.ArqRates(r0, 0, 0, kappa), lam)
    if nb.stable:
        assert 0 < nb.p_nb <= 1
        assert nb.p_nb * (nb.p_nb * (r0 - kappa) + kappa) == pytest.approx(lam, rel=1e-10)
    if lam < 1e-6:
        assert nb.p_nb < 1e-5


def test_nbp_modified_vs_monte_carlo():
    a = arq.ArqParams.at_equality(math.sqrt(EPS_T), EPS_T)
    rates = arq.arq_rates(FIG7, a, moments=MOM)
    got = arq.nbp_modified(rates, 0.5).p_nb
    (r0, s0), (r1, s1), (r2, s2) = F.MC_ARQ_RATES
    e1 = a.eps1

    def p_of(r0_, r1_, r2_):
        return arq.nbp_modified(arq.ArqRates(r0_, r1_, r2_, arq.kappa_of(r1_, r2_, e1)), 0.5).p_nb
    # p' falls as any rate rises, so 3-stderr rate boxes bound it.
    lo = p_of(r0 + 3 * s0, r1 + 3 * s1, r2 + 3 * s2)
    hi = p_of(r0 - 3 * s0, r1 - 3 * s1, r2 - 3 * s2)
    assert lo <= got <= hi
    assert lo <= F.MC_ARQ_PNB <= hi


def test_psi_arq_vs_monte_carlo():
    a = arq.ArqParams.at_equality(math.sqrt(EPS_T), EPS_T)
    psi = arq.psi_arq(FIG7, QoSConstraints(0.01), a, F.MC_ARQ_PNB).value
    mean, se = F.MC_ARQ_PSI
    assert within_stderr(psi, mean, se)


def test_ec_arq_collapses_at_unit_nbp():
    a = arq.ArqParams.at_equality(1e-3, EPS_T)
    q = QoSConstraints(0.01)
    assert arq.ec_arq(FIG7, q, a, 1.0) == pytest.approx(ec_stochastic(FIG7, q).ec, rel=1e-12)


def test_ec_arq_vanishing_theta_limit():
    a = arq.ArqParams.at_equality(1e-3, EPS_T)
    rates = arq.arq_rates(FIG7, a, moments=MOM)
    p = 0.4
    lim = p * rates.r0 + (1 - p) * rates.r1
    assert arq.ec_arq(FIG7, QoSConstraints(0.0), a, p) == pytest.approx(lim, rel=1e-3)
    assert arq.ec_arq(FIG7, QoSConstraints(1e-7), a, p) == pytest.approx(lim, rel=1e-3)


def test_power_arq_examples():
    a = arq.ArqParams.at_equality(0.1, 1e-3)
    # [0.5^2 + 0.5 * 0.5 * 1.1] * 1.2 * 2 + 0.2
    assert arq.power_arq(2.0, 0.5, a, PM) == pytest.approx(1.46, rel=1e-14)
    assert arq.power_arq(2.0, 1.0, a, PM) == pytest.approx(1.2 * 2.0 + 0.2, rel=1e-15)


def test_power_arq_nondecreasing_in_nbp():
    for e1 in np.linspace(1e-3, 0.5, 50):
        a = arq.ArqParams.at_equality(float(e1), 1e-4)
        for p in np.linspace(0, 1, 51):
            assert arq.power_arq_dp(2.0, float(p), a, PM) >= 0


@given(st.floats(0.0, 1.0), st.floats(1e-3, 0.5))
def test_power_arq_derivative_matches_difference(p, e1):
    a = arq.ArqParams.at_equality(e1, 1e-4)
    h = 1e-6
    fd = (arq.power_arq(2.0, min(p + h, 1.0), a, PM) - arq.power_arq(2.0, max(p - h, 0.0), a, PM)) / (
        min(p + h, 1.0) - max(p - h, 0.0))
    assert arq.power_arq_dp(2.0, p, a, PM) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_normalized_delay_examples():
    a = arq.ArqParams.at_equality(0.1, 1e-3)
    assert arq.normalized_delay(a, 1.0, 500) == 1.0
    assert arq.normalized_delay(SimpleNamespace(eps1=0.0, nack_overhead=6.0), 0.3, 500) == 1.0
    assert arq.normalized_delay(a, 0.5, 500) == pytest.approx(1.0506, rel=1e-14)


@given(st.floats(0, 1), st.floats(1e-9, 0.5), st.integers(1, 10_000))
def test_normalized_delay_at_least_one(p, e1, n):
    a = arq.ArqParams.at_equality(max(e1, 2e-9), 1e-9)
    assert arq.normalized_delay(a, p, n) >= 1.0


def test_degenerate_split_flagged():
    a = arq.ArqParams.at_equality(EPS_T, EPS_T)
    assert a.eps2 == 1.0 and a.degenerate
    res = arq.eee_arq(FIG7, QoSConstraints(0.01), a, PM, TrafficModel(0.5), moments=MOM)
    assert res.degenerate
    assert res.rates.r2 == 0.0


def test_bound_limit_substitution():
    a = arq.ArqParams.at_equality(1e-3, 1e-12)
    rates = arq.arq_rates(FIG7.with_(epsilon=1e-12), a)
    b = arq.theorem4_upper_bound(rates, a, 1.0, PM, FIG7.rho)
    assert b == pytest.approx(rates.r0 / (1.2 * FIG7.rho + 0.2), rel=1e-9)


def test_kappa_second_derivative_vs_finite_difference():
    for e1 in (1e-3, 1e-2, 0.2):
        an = arq.kappa_derivatives(MOM, e1, EPS_T)[2]
        fd = finite_diff(lambda e: arq.kappa_derivatives(MOM, e, EPS_T)[0], e1, order=2)
        assert abs(an - fd) / abs(fd) < 1e-4


@given(st.floats(3e-9, 0.5))
def test_kappa_first_derivative_vs_finite_difference(e1):
    an = arq.kappa_derivatives(MOM, e1, EPS_T)[1]
    # The default step floor of 1e-9 is comparable to e1 here, so scale the step instead.
    fd = finite_diff(lambda e: arq.kappa_derivatives(MOM, e, EPS_T)[0], e1, h=1e-6 * e1)
    assert an == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_kappa_derivatives_finite_at_half():
    assert all(math.isfinite(v) for v in arq.kappa_derivatives(MOM, 0.5, EPS_T))


def test_curvature_check_fig7():
    rep = arq.kappa_curvature_check(FIG7, EPS_T, 0.5, points=1000, moments=MOM)
    assert rep.concavity_violations == 0
    assert rep.ok


def test_eps1_domain():
    lo, hi = arq.eps1_domain(1e-9)
    assert lo == pytest.approx(2e-9) and hi == 0.5
    with pytest.raises(DomainError):
        arq.eps1_domain(0.3)
