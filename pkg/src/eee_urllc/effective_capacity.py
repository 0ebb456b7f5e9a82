"""Effective capacity: exact fading average, truncated-Taylor and Rayleigh closed forms."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .channel import DEFAULT_EVAL, EvalConfig, expect
from .errors import DomainError
from .fbl_rate import LinkParams, _scales, dispersion_root, expected_rate, rate
from .math_kernels import LOG2E, KernelValue, gamma_expectation, gaussian_q_inv, power_exp_integral

LN2 = math.log(2.0)


class EcMethod(str, Enum):
    STOCHASTIC = "stochastic"
    LEMMA1 = "lemma1"        # Nakagami-m truncated Taylor form
    THEOREM1 = "theorem1"    # Rayleigh closed form with the J kernel
    SHANNON = "shannon"      # infinite blocklength, error-free baseline


@dataclass(frozen=True)
class QoSConstraints:
    theta: float
    delta: float = 500.0
    Lambda: float = 1e-2
    epsilon_t: float = 1e-4

    def __post_init__(self):
        if not self.theta >= 0:
            raise DomainError("delay exponent theta must be >= 0")
        if not self.delta > 0:
            raise DomainError("delay bound delta must be > 0")
        if not 0.0 < self.Lambda < 1.0:
            raise DomainError("violation probability Lambda must lie in (0, 1)")
        if not 0.0 < self.epsilon_t <= 0.5:
            raise DomainError("target error epsilon_t must lie in (0, 0.5]")

    def with_(self, **changes) -> "QoSConstraints":
        return replace(self, **changes)


@dataclass(frozen=True)
class ClosedFormTerms:
    alpha: float
    beta: float
    taylor_terms: int = 3

    @classmethod
    def from_params(cls, p: LinkParams, theta: float, taylor_terms: int = 3) -> "ClosedFormTerms":
        if taylor_terms < 1:
            raise DomainError("taylor_terms must be >= 1")
        alpha = -theta * p.n / LN2
        beta = theta * math.sqrt(p.n) * gaussian_q_inv(p.epsilon) * LOG2E
        return cls(alpha, beta, taylor_terms)

    @property
    def kappa1(self) -> float:
        return 0.5 * self.beta ** 2 + self.beta + 1.0

    @property
    def kappa2(self) -> float:
        return 0.5 * self.beta ** 2 + self.beta


@dataclass(frozen=True)
class EcResult:
    ec: float
    psi: float
    method: EcMethod
    est_error: float = 0.0
    converged: bool = True


def _require_theta(q: QoSConstraints):
    if not q.theta > 0:
        raise DomainError("theta must be > 0 here; theta = 0 is handled by the limit form")


def _ec_from_psi(psi: float, n: int, theta: float) -> float:
    return -math.log(psi) / (n * theta)


def _theta_zero_limit(p: LinkParams, cfg: EvalConfig, method: EcMethod) -> EcResult:
    if p.epsilon >= 1.0:
        return EcResult(0.0, 1.0, method)
    r = expected_rate(p, cfg)
    return EcResult((1.0 - p.epsilon) * r.value, 1.0, method, r.est_error, r.converged)


def _psi_scales(p: LinkParams, theta: float):
    sc = list(_scales(p))
    if p.rho > 0:
        w = LN2 / (p.rho * p.n * theta)
        sc += [0.1 * w, w, 10.0 * w]
    return sc


def psi_stochastic(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL):
    """``E_Z[eps + (1-eps) exp(-n theta r)]`` with the unclamped rate."""
    _require_theta(q)
    eps = p.epsilon
    if eps >= 1.0:
        return KernelValue(1.0)
    k = p.n * q.theta

    def g(z):
        return eps + (1.0 - eps) * np.exp(-k * rate(p, z))
    return expect(p.fading, g, cfg, _psi_scales(p, q.theta))


def ec_stochastic(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL) -> EcResult:
    """Effective capacity ``-ln(psi) / (n theta)`` from the exact fading average."""
    if q.theta == 0:
        return _theta_zero_limit(p, cfg, EcMethod.STOCHASTIC)
    psi = psi_stochastic(p, q, cfg)
    ec = _ec_from_psi(psi.value, p.n, q.theta)
    err = psi.est_error / (psi.value * p.n * q.theta)
    return EcResult(ec, psi.value, EcMethod.STOCHASTIC, err, psi.converged)


def lemma1_moments(p: LinkParams, terms: ClosedFormTerms, cfg: EvalConfig = DEFAULT_EVAL):
    """``E[(1+rho Z)^alpha gamma^k]`` for ``k = 0 .. taylor_terms-1``."""
    a = terms.alpha
    out = []
    for k in range(terms.taylor_terms):
        if k == 0:
            kv = power_exp_integral(a, p.rho, p.m, cfg.quad)
        else:
            def g(z, k=k):
                s = p.rho * z
                return np.exp(a * np.log1p(s)) * dispersion_root(s) ** k
            kv = gamma_expectation(g, p.m, cfg.quad, _psi_scales(p, -a * LN2 / p.n))
        out.append(kv)
    return out


def psi_lemma1(p: LinkParams, terms: ClosedFormTerms, cfg: EvalConfig = DEFAULT_EVAL) -> float:
    eps = p.epsilon
    if eps >= 1.0:
        return 1.0
    moments = lemma1_moments(p, terms, cfg)
    series = sum(terms.beta ** k / math.factorial(k) * mv.value for k, mv in enumerate(moments))
    return eps + (1.0 - eps) * series


def ec_lemma1(p: LinkParams, q: QoSConstraints, terms: ClosedFormTerms | None = None,
              cfg: EvalConfig = DEFAULT_EVAL) -> EcResult:
    """Nakagami-m effective capacity with ``exp(beta*gamma)`` truncated to ``taylor_terms``."""
    if q.theta == 0:
        return _theta_zero_limit(p, cfg, EcMethod.LEMMA1)
    if p.rho == 0:
        return EcResult(0.0, 1.0, EcMethod.LEMMA1)
    if terms is None:
        terms = ClosedFormTerms.from_params(p, q.theta)
    psi = psi_lemma1(p, terms, cfg)
    return EcResult(_ec_from_psi(psi, p.n, q.theta), psi, EcMethod.LEMMA1)


class JTerms(NamedTuple):
    j: float
    i_alpha: float
    i_alpha2: float
    terms: ClosedFormTerms


def j_terms(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL) -> JTerms:
    """The Rayleigh J kernel and the two gamma-type integrals it is built from.

    ``J = kappa1 I(alpha) - kappa2 I(alpha - 2)`` where ``I`` is
    :func:`power_exp_integral`; this is the overflow-free form of the
    ``e^{1/rho} rho^alpha Gamma(., 1/rho)`` products.
    """
    if p.m != 1.0:
        raise DomainError("the J kernel is the Rayleigh (m = 1) closed form")
    _require_theta(q)
    if not p.rho > 0:
        raise DomainError("the J kernel needs rho > 0")
    t = ClosedFormTerms.from_params(p, q.theta)
    i0 = power_exp_integral(t.alpha, p.rho, 1.0, cfg.quad).value
    i2 = power_exp_integral(t.alpha - 2.0, p.rho, 1.0, cfg.quad).value
    return JTerms(t.kappa1 * i0 - t.kappa2 * i2, i0, i2, t)


def j_kernel(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL) -> float:
    return j_terms(p, q, cfg).j


def j_kernel_drho(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL,
                  jt: JTerms | None = None) -> float:
    """``dJ/drho = (1 - J)/rho^2 + alpha J / rho + 2 kappa2 I(alpha-2) / rho``.

    Follows from differentiating the incomplete-gamma form of ``J`` and
    mapping each term back onto the bounded integrals ``I``.
    """
    if jt is None:
        jt = j_terms(p, q, cfg)
    rho = p.rho
    return ((1.0 - jt.j) / rho ** 2 + jt.terms.alpha * jt.j / rho
            + 2.0 * jt.terms.kappa2 * jt.i_alpha2 / rho)


def psi_theorem1(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL) -> float:
    if p.epsilon >= 1.0:
        return 1.0
    if p.rho == 0:
        return 1.0
    return p.epsilon + (1.0 - p.epsilon) * j_kernel(p, q, cfg)


def ec_theorem1(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL) -> EcResult:
    if q.theta == 0:
        return _theta_zero_limit(p, cfg, EcMethod.THEOREM1)
    psi = psi_theorem1(p, q, cfg)
    return EcResult(_ec_from_psi(psi, p.n, q.theta), psi, EcMethod.THEOREM1)


def ec_shannon(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL) -> EcResult:
    """Long-packet baseline: no dispersion penalty and no decoding errors."""
    if p.rho == 0:
        return EcResult(0.0, 1.0, EcMethod.SHANNON)
    if q.theta == 0:
        kv = expect(p.fading, lambda z: np.log1p(p.rho * z) * LOG2E, cfg, _scales(p))
        return EcResult(kv.value, 1.0, EcMethod.SHANNON, kv.est_error, kv.converged)
    alpha = -q.theta * p.n / LN2
    kv = expect(p.fading, lambda z: np.exp(alpha * np.log1p(p.rho * z)), cfg,
                _psi_scales(p, q.theta))
    ec = _ec_from_psi(kv.value, p.n, q.theta)
    return EcResult(ec, kv.value, EcMethod.SHANNON, kv.est_error / (kv.value * p.n * q.theta),
                    kv.converged)


def effective_capacity(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL,
                       method: EcMethod | str = EcMethod.STOCHASTIC) -> EcResult:
    method = EcMethod(method)
    if method is EcMethod.STOCHASTIC:
        return ec_stochastic(p, q, cfg)
    if method is EcMethod.LEMMA1:
        return ec_lemma1(p, q, None, cfg)
    if method is EcMethod.THEOREM1:
        return ec_theorem1(p, q, cfg)
    return ec_shannon(p, q, cfg)


def delay_bound(ec: float, q: QoSConstraints, theta: float | None = None) -> float:
    """Largest delay (symbol periods) meeting ``exp(-theta * ec * delta) = Lambda``."""
    theta = q.theta if theta is None else theta
    if not ec > 0:
        raise DomainError("effective capacity must be positive")
    if not theta > 0:
        raise DomainError("theta must be positive")
    return -math.log(q.Lambda) / (theta * ec)


def delay_bound_symbols(ec: float, q: QoSConstraints, theta: float | None = None) -> int:
    """:func:`delay_bound` rounded down to whole symbol periods."""
    return int(math.floor(delay_bound(ec, q, theta) * (1.0 + 1e-12)))
