"""Buffer-aware ARQ on top of the empty-buffer model.

When the transmitter knows the next slot will be idle it sends at a relaxed
error ``eps1`` and keeps the idle slot for a single retransmission at
``eps2 = eps_target / eps1``.  Rates are averages of the normal-approximation
rate at the three error levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import DEFAULT_EVAL, EvalConfig, expect
from .effective_capacity import QoSConstraints, _psi_scales
from .eee_models import PowerModel, TrafficModel
from .errors import DomainError
from .fbl_rate import LinkParams, RateMoments, dispersion_root, rate_moments
from .math_kernels import LOG2E, SQRT_2PI, gaussian_q_inv

# A second round above this error is outside the normal-approximation range.
MAX_ROUND_ERROR = 0.5


@dataclass(frozen=True)
class ArqParams:
    eps1: float
    eps2: float
    eps_target: float
    nack_overhead: float = 6.0

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps_target"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise DomainError(f"{name} must lie in (0, 1]")
        if self.eps1 < self.eps_target:
            raise DomainError("eps1 must be >= eps_target")
        if self.eps1 * self.eps2 > self.eps_target * (1.0 + 1e-12):
            raise DomainError("eps1 * eps2 exceeds the target error")
        if not self.nack_overhead >= 0:
            raise DomainError("nack_overhead must be >= 0")

    @classmethod
    def at_equality(cls, eps1: float, eps_target: float, nack_overhead: float = 6.0) -> "ArqParams":
        """Split with ``eps1 * eps2 = eps_target`` exactly."""
        return cls(eps1, min(eps_target / eps1, 1.0), eps_target, nack_overhead)

    @property
    def degenerate(self) -> bool:
        return self.eps2 > MAX_ROUND_ERROR or self.eps1 > MAX_ROUND_ERROR


class ArqRates(NamedTuple):
    r0: float
    r1: float
    r2: float
    kappa: float


class NbpModified(NamedTuple):
    p_nb: float
    stable: bool


@dataclass(frozen=True)
class ArqResult:
    p_nb_mod: float
    ec2: float
    p_total: float
    eee2: float
    tau_n: float
    bound: float
    rates: ArqRates
    stable: bool = True
    degenerate: bool = False


def _round_rate(mom: RateMoments, eps: float) -> float:
    # A round that always fails delivers nothing.
    return 0.0 if eps >= 1.0 else mom.mean_rate(eps)


def kappa_of(r1: float, r2: float, eps1: float) -> float:
    return (1.0 - eps1) * r1 + 0.5 * eps1 * r2


def arq_rates(p: LinkParams, a: ArqParams, cfg: EvalConfig = DEFAULT_EVAL,
              moments: RateMoments | None = None) -> ArqRates:
    """Mean rates at ``eps_target``, ``eps1`` and ``eps2`` plus the blended ``kappa``."""
    mom = rate_moments(p, cfg) if moments is None else moments
    r0 = mom.mean_rate(a.eps_target)
    r1 = _round_rate(mom, a.eps1)
    r2 = _round_rate(mom, a.eps2)
    return ArqRates(r0, r1, r2, kappa_of(r1, r2, a.eps1))


def nbp_modified(rates: ArqRates, lam: float) -> NbpModified:
    """Root of ``p = lam / (p (r0 - kappa) + kappa)`` in (0, 1].

    Written as ``2 lam / (kappa + sqrt(kappa^2 + 4 (r0 - kappa) lam))`` so that
    ``r0 = kappa`` needs no special case.
    """
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    r0, kappa = rates.r0, rates.kappa
    disc = kappa * kappa + 4.0 * (r0 - kappa) * lam
    if disc < 0 or kappa + math.sqrt(max(disc, 0.0)) <= 0:
        return NbpModified(1.0, False)
    p = 2.0 * lam / (kappa + math.sqrt(disc))
    if p > 1.0:
        return NbpModified(1.0, False)
    return NbpModified(p, True)


def fixed_point_residual(rates: ArqRates, lam: float, p_nb: float) -> float:
    return p_nb - lam / (p_nb * (rates.r0 - rates.kappa) + rates.kappa)


def _branch_rates(p: LinkParams, a: ArqParams, z):
    s = p.rho * z
    shannon = np.log1p(s) * LOG2E
    mu = LOG2E / math.sqrt(p.n) * dispersion_root(s)

    def at(eps):
        return np.zeros_like(s) if eps >= 1.0 else shannon - gaussian_q_inv(eps) * mu
    return at(a.eps_target), at(a.eps1), at(a.eps2)


def psi_arq(p: LinkParams, q: QoSConstraints, a: ArqParams, p_nb_mod: float,
            cfg: EvalConfig = DEFAULT_EVAL):
    """Fading average of the four-branch service mixture with per-realization rates."""
    eps, e1, e2 = a.eps_target, a.eps1, a.eps2
    k = p.n * q.theta

    def g(z):
        r0, r1, r2 = _branch_rates(p, a, z)
        busy = eps + (1.0 - eps) * np.exp(-k * r0)
        idle = (1.0 - e1) * np.exp(-k * r1) + e1 * (1.0 - e2) * np.exp(-0.5 * k * r2) + eps
        return p_nb_mod * busy + (1.0 - p_nb_mod) * idle
    return expect(p.fading, g, cfg, _psi_scales(p, q.theta))


def ec_arq(p: LinkParams, q: QoSConstraints, a: ArqParams, p_nb_mod: float,
           cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """EBP-ARQ effective capacity; ``theta = 0`` returns its vanishing-delay limit."""
    if p.rho == 0:
        return 0.0
    if q.theta == 0:
        return _limit_throughput(arq_rates(p, a, cfg), a, p_nb_mod)
    psi = psi_arq(p, q, a, p_nb_mod, cfg).value
    return -math.log(psi) / (p.n * q.theta)


def power_arq(rho: float, p_nb_mod: float, a: ArqParams, pm: PowerModel) -> float:
    if not 0.0 <= p_nb_mod <= 1.0:
        raise DomainError("p_nb_mod must lie in [0, 1]")
    factor = p_nb_mod ** 2 + p_nb_mod * (1.0 - p_nb_mod) * (1.0 + a.eps1)
    return factor * pm.zeta * rho + pm.pc


def power_arq_dp(rho: float, p_nb_mod: float, a: ArqParams, pm: PowerModel) -> float:
    """``dP_t / dp'``; non-negative on the unit square."""
    return (-2.0 * a.eps1 * p_nb_mod + 1.0 + a.eps1) * pm.zeta * rho


def _limit_throughput(rates: ArqRates, a: ArqParams, p_nb_mod: float) -> float:
    idle = (1.0 - a.eps1) * rates.r1 + a.eps1 * (1.0 - a.eps2) * 0.5 * rates.r2
    return p_nb_mod * (1.0 - a.eps_target) * rates.r0 + (1.0 - p_nb_mod) * idle


def theorem4_upper_bound(rates: ArqRates, a: ArqParams, p_nb_mod: float,
                         pm: PowerModel, rho: float) -> float:
    """Vanishing-delay-exponent limit of the EBP-ARQ EEE."""
    return _limit_throughput(rates, a, p_nb_mod) / power_arq(rho, p_nb_mod, a, pm)


def normalized_delay(a: ArqParams, p_nb_mod: float, n: int) -> float:
    """Mean delay in units of one packet time, counting the NACK span."""
    return 1.0 + (1.0 + a.nack_overhead / n) * (1.0 - p_nb_mod) * a.eps1


def eee_arq(p: LinkParams, q: QoSConstraints, a: ArqParams, pm: PowerModel,
            tm: TrafficModel, cfg: EvalConfig = DEFAULT_EVAL,
            moments: RateMoments | None = None) -> ArqResult:
    """Full pipeline: rates, modified NBP, EC, power and EEE."""
    rates = arq_rates(p, a, cfg, moments)
    nb = nbp_modified(rates, tm.lam)
    ec2 = ec_arq(p, q, a, nb.p_nb, cfg)
    pt = power_arq(p.rho, nb.p_nb, a, pm)
    return ArqResult(
        p_nb_mod=nb.p_nb, ec2=ec2, p_total=pt, eee2=ec2 / pt,
        tau_n=normalized_delay(a, nb.p_nb, p.n),
        bound=theorem4_upper_bound(rates, a, nb.p_nb, pm, p.rho),
        rates=rates, stable=nb.stable, degenerate=a.degenerate,
    )


# Derivatives of kappa along eps1 with eps2 = eps_target / eps1.

def _rate_deps(mom: RateMoments, eps: float):
    """First and second derivatives of ``E[r]`` in its error probability."""
    x = gaussian_q_inv(eps)
    d1 = mom.mu * SQRT_2PI * math.exp(0.5 * x * x)
    d2 = -2.0 * math.pi * mom.mu * x * math.exp(x * x)
    return d1, d2


def kappa_derivatives(mom: RateMoments, eps1: float, eps_target: float):
    """``(kappa, dkappa/deps1, d2kappa/deps1^2)`` with the split held at equality."""
    eps2 = eps_target / eps1
    r1, r2 = mom.mean_rate(eps1), mom.mean_rate(eps2)
    a1, b1 = _rate_deps(mom, eps1)
    a2, b2 = _rate_deps(mom, eps2)
    w = eps2 / eps1                   # -d eps2 / d eps1
    dr2 = -a2 * w
    d2r2 = b2 * w * w + 2.0 * a2 * w / eps1
    k = kappa_of(r1, r2, eps1)
    dk = -r1 + (1.0 - eps1) * a1 + 0.5 * r2 + 0.5 * eps1 * dr2
    d2k = -2.0 * a1 + (1.0 - eps1) * b1 + dr2 + 0.5 * eps1 * d2r2
    return k, dk, d2k


@dataclass(frozen=True)
class CurvatureReport:
    eps1: np.ndarray
    d2kappa: np.ndarray
    p_nb: np.ndarray
    concavity_violations: int
    valley_sign_changes: int

    @property
    def ok(self) -> bool:
        return self.concavity_violations == 0 and self.valley_sign_changes <= 1


def eps1_domain(eps_target: float):
    """Admissible first-round errors: both rounds within the normal-approximation range."""
    lo = eps_target / MAX_ROUND_ERROR
    if lo >= MAX_ROUND_ERROR:
        raise DomainError("eps_target too large for a two-round split")
    return lo, MAX_ROUND_ERROR


def kappa_curvature_check(p: LinkParams, eps_target: float, lam: float,
                          points: int = 1000, cfg: EvalConfig = DEFAULT_EVAL,
                          moments: RateMoments | None = None) -> CurvatureReport:
    """Check ``d2kappa/deps1^2 < 0`` and a single valley of ``p'`` over a log grid of ``eps1``."""
    mom = rate_moments(p, cfg) if moments is None else moments
    lo, hi = eps1_domain(eps_target)
    grid = np.geomspace(lo, hi, points + 2)[1:-1]
    d2 = np.array([kappa_derivatives(mom, e, eps_target)[2] for e in grid])
    pn = np.array([
        nbp_modified(arq_rates(p, ArqParams.at_equality(e, eps_target), cfg, mom), lam).p_nb
        for e in grid
    ])
    diffs = np.sign(np.diff(pn))
    diffs = diffs[diffs != 0]
    changes = int(np.count_nonzero(diffs[1:] != diffs[:-1]))
    return CurvatureReport(grid, d2, pn, int(np.count_nonzero(d2 >= 0)), changes)
