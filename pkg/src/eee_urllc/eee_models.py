"""Power consumption models and the effective energy efficiency quotient."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .channel import DEFAULT_EVAL, EvalConfig
from .effective_capacity import EcMethod, EcResult, QoSConstraints, effective_capacity
from .errors import DomainError
from .fbl_rate import LinkParams, expected_rate, rate_moments


@dataclass(frozen=True)
class PowerModel:
    """``zeta`` is the inverse drain efficiency, ``pc`` the circuit power in watts."""

    zeta: float = 1.2
    pc: float = 0.2

    def __post_init__(self):
        if not self.zeta >= 1.0:
            raise DomainError("zeta must be >= 1")
        if not self.pc >= 0.0:
            raise DomainError("circuit power must be >= 0")


class BufferMode(str, Enum):
    FULL_BUFFER = "full"
    EMPTY_BUFFER_AWARE = "ebp"


@dataclass(frozen=True)
class TrafficModel:
    lam: float = 1.0
    buffer_mode: BufferMode = BufferMode.EMPTY_BUFFER_AWARE

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("arrival rate lambda must be > 0")
        object.__setattr__(self, "buffer_mode", BufferMode(self.buffer_mode))


@dataclass(frozen=True)
class EeeResult:
    eee: float
    ec: float
    p_nb: float
    p_total: float
    feasible: bool = True
    mean_rate: float = math.nan
    method: EcMethod = EcMethod.STOCHASTIC


class NbpResult(NamedTuple):
    p_nb: float
    feasible: bool
    mean_rate: float


class ThetaStar(NamedTuple):
    theta: float
    slack: bool    # True when P_nb <= Lambda already meets the outage target


def power_total_linear(rho: float, pm: PowerModel) -> float:
    if not rho >= 0:
        raise DomainError("rho must be >= 0")
    return pm.zeta * rho + pm.pc


def power_total_ebp(rho: float, p_nb: float, pm: PowerModel) -> float:
    if not 0.0 <= p_nb <= 1.0:
        raise DomainError("p_nb must lie in [0, 1]")
    return p_nb * pm.zeta * rho + pm.pc


def ec_for_eee(p: LinkParams, q: QoSConstraints, cfg: EvalConfig,
               method: EcMethod | str) -> EcResult:
    """EC for the EEE numerator; the Rayleigh closed form falls back to Lemma 1 when m != 1."""
    method = EcMethod(method)
    if method is EcMethod.THEOREM1 and p.m != 1.0:
        method = EcMethod.LEMMA1
    return effective_capacity(p, q, cfg, method)


def eee_full_buffer(p: LinkParams, q: QoSConstraints, pm: PowerModel,
                    cfg: EvalConfig = DEFAULT_EVAL,
                    method: EcMethod | str = EcMethod.STOCHASTIC) -> EeeResult:
    """``C_e / (zeta rho + P_c)``, the transmitter always busy."""
    ec = ec_for_eee(p, q, cfg, method)
    pt = power_total_linear(p.rho, pm)
    return EeeResult(ec.ec / pt, ec.ec, 1.0, pt, True, method=ec.method)


def nbp(p: LinkParams, tm: TrafficModel, cfg: EvalConfig = DEFAULT_EVAL,
        shannon: bool = False) -> NbpResult:
    """Non-empty buffer probability ``lambda / E[max(r, 0)]``, capped at one.

    ``feasible`` is False when the mean service rate cannot keep up with the
    arrivals, i.e. the queue is unstable. ``shannon`` serves the queue at
    ``log2(1 + rho Z)`` instead.
    """
    if tm.buffer_mode is BufferMode.FULL_BUFFER:
        return NbpResult(1.0, True, math.nan)
    if shannon:
        mean = rate_moments(p, cfg).shannon
    else:
        mean = expected_rate(p, cfg, clamp_nonneg=True).value
    if not mean > 0:
        return NbpResult(1.0, False, mean)
    ratio = tm.lam / mean
    return NbpResult(min(ratio, 1.0), ratio <= 1.0, mean)


def eee_ebp(p: LinkParams, q: QoSConstraints, pm: PowerModel, tm: TrafficModel,
            cfg: EvalConfig = DEFAULT_EVAL,
            method: EcMethod | str = EcMethod.STOCHASTIC) -> EeeResult:
    """``C_e / (P_nb zeta rho + P_c)``; an unstable queue is returned with ``feasible=False``."""
    nb = nbp(p, tm, cfg, shannon=EcMethod(method) is EcMethod.SHANNON)
    ec = ec_for_eee(p, q, cfg, method)
    pt = power_total_ebp(p.rho, nb.p_nb, pm)
    return EeeResult(ec.ec / pt, ec.ec, nb.p_nb, pt, nb.feasible, nb.mean_rate, ec.method)


def theta_star(tm: TrafficModel, q: QoSConstraints, p_nb: float) -> ThetaStar:
    """Smallest delay exponent meeting ``P_nb exp(-theta lambda delta) <= Lambda``."""
    if not 0.0 < p_nb <= 1.0:
        raise DomainError("p_nb must lie in (0, 1]")
    if p_nb <= q.Lambda:
        return ThetaStar(0.0, True)
    return ThetaStar(math.log(p_nb / q.Lambda) / (tm.lam * q.delta), False)
