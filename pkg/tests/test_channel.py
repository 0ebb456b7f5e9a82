import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eee_urllc.channel import MONTE_CARLO, EvalConfig, FadingModel, expect, pdf, sample
from eee_urllc.errors import DomainError

import frozen_oracles as F
from conftest import within_stderr


def test_pdf_rayleigh_values():
    assert pdf(FadingModel(1.0), 0.0) == 1.0
    assert pdf(FadingModel(1.0), 1.0) == pytest.approx(math.exp(-1.0))


def test_pdf_mode_m2():
    z = np.linspace(0.01, 3.0, 30_000)
    assert z[np.argmax(pdf(FadingModel(2.0), z))] == pytest.approx(0.5, abs=1e-3)


def test_pdf_rejects_negative_gain():
    with pytest.raises(DomainError):
        pdf(FadingModel(1.0), -0.1)


def test_fading_shape_domain():
    with pytest.raises(DomainError):
        FadingModel(0.4)


def test_sample_mean_rayleigh():
    z = sample(FadingModel(1.0), EvalConfig(seed=3), 10_000_000)
    assert abs(z.mean() - 1.0) <= 4 / math.sqrt(1e7)


def test_sample_variance_m4():
    z = sample(FadingModel(4.0), EvalConfig(seed=5), 10_000_000)
    var = z.var(ddof=1)
    # Var of the sample variance for gamma(k, 1/k) uses the fourth central moment.
    k = 4.0
    mu4 = 3 * (k + 2) / k ** 3
    se = math.sqrt((mu4 - (1 / k) ** 2) / z.size)
    assert abs(var - 0.25) <= 5 * se


def test_sample_deterministic():
    cfg = EvalConfig(seed=42)
    assert np.array_equal(sample(FadingModel(2.0), cfg, 1000), sample(FadingModel(2.0), cfg, 1000))
    assert not np.array_equal(sample(FadingModel(2.0), cfg, 1000, stream=1),
                              sample(FadingModel(2.0), cfg, 1000))


@given(st.floats(0.5, 10.0))
def test_expect_normalization_and_mean(m):
    model = FadingModel(m)
    assert expect(model, lambda z: np.ones_like(z)).value == pytest.approx(1.0, abs=1e-12)
    assert expect(model, lambda z: z).value == pytest.approx(1.0, rel=1e-10)


def test_expect_quadrature_vs_monte_carlo():
    model = FadingModel(1.0)

    def g(z):
        return (1 + 2 * z) ** -3.0
    q = expect(model, g).value
    mean, se = F.MC_INV_CUBE
    assert within_stderr(q, mean, se)
    mc = expect(model, g, EvalConfig(method=MONTE_CARLO, mc_samples=2_000_000, seed=9))
    assert within_stderr(q, mc.value, mc.est_error)


def test_eval_config_validation():
    with pytest.raises(DomainError):
        EvalConfig(method="simpson")
    with pytest.raises(DomainError):
        EvalConfig(mc_samples=0)
