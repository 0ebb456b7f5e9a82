"""Normal-approximation achievable rate at finite blocklength and its derivatives."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .channel import DEFAULT_EVAL, EvalConfig, FadingModel, expect
from .errors import DomainError
from .math_kernels import LOG2E, KernelValue, gaussian_q_inv


@dataclass(frozen=True)
class LinkParams:
    """Per-link physical configuration.

    ``rho`` is the average SNR in linear units (equivalently watts, the noise
    power being one). ``epsilon = 1`` is accepted only as the degenerate
    always-fail link; the rate itself needs ``epsilon <= 0.5``.
    """

    n: int
    rho: float
    m: float = 1.0
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("blocklength n must be >= 1")
        if not self.rho >= 0:
            raise DomainError("rho must be >= 0")
        if not 0.0 < self.epsilon <= 1.0:
            raise DomainError("epsilon must lie in (0, 1]")
        FadingModel(self.m)

    @property
    def fading(self) -> FadingModel:
        return FadingModel(self.m)

    def with_(self, **changes) -> "LinkParams":
        return replace(self, **changes)


class RateTerms(NamedTuple):
    shannon: np.ndarray
    dispersion_root: np.ndarray
    phi: float
    mu: np.ndarray


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dispersion_root(snr):
    """``sqrt(1 - (1+s)^-2)`` written to stay accurate as ``s -> 0``."""
    snr = np.asarray(snr, dtype=float)
    return np.sqrt(snr * (2.0 + snr)) / (1.0 + snr)


def phi(p: LinkParams) -> float:
    """Dispersion coefficient ``Q^-1(eps) log2(e) / sqrt(n)``."""
    if p.epsilon > 0.5:
        raise DomainError("the normal approximation is used for epsilon <= 0.5 only")
    return gaussian_q_inv(p.epsilon) * LOG2E / math.sqrt(p.n)


def rate_terms(p: LinkParams, z) -> RateTerms:
    s = p.rho * np.asarray(z, dtype=float)
    g = dispersion_root(s)
    return RateTerms(np.log1p(s) * LOG2E, g, phi(p), LOG2E / math.sqrt(p.n) * g)


def rate(p: LinkParams, z):
    """Achievable rate in bpcu at channel gain ``z``; may be negative in deep fades."""
    s = p.rho * np.asarray(z, dtype=float)
    return np.log1p(s) * LOG2E - phi(p) * dispersion_root(s)


def _check_positive_snr(s):
    if np.any(np.asarray(s) <= 0):
        raise DomainError("rate derivatives are singular at rho*z = 0")


def rate_drho(p: LinkParams, z):
    """First derivative of :func:`rate` with respect to ``rho``."""
    z = np.asarray(z, dtype=float)
    s = p.rho * z
    _check_positive_snr(s)
    return z / ((1.0 + s) * math.log(2.0)) - phi(p) * z / ((1.0 + s) ** 3 * dispersion_root(s))


def rate_d2rho(p: LinkParams, z):
    """Second derivative of :func:`rate` with respect to ``rho``."""
    z = np.asarray(z, dtype=float)
    s = p.rho * z
    _check_positive_snr(s)
    g = dispersion_root(s)
    ph = phi(p)
    z2 = z * z
    return (3.0 * ph * z2 / ((1.0 + s) ** 4 * g)
            + ph * z2 / ((1.0 + s) ** 6 * g ** 3)
            - z2 / ((1.0 + s) ** 2 * math.log(2.0)))


def _scales(p: LinkParams):
    if p.rho <= 0:
        return ()
    ph = phi(p) if p.epsilon <= 0.5 else 0.0
    # Rate crosses zero near rho*z ~ (phi*ln2)^2 * 2.
    s0 = 2.0 * (ph * math.log(2.0)) ** 2
    return tuple(x / p.rho for x in (0.1 * s0, s0, 10.0 * s0, 0.1, 1.0)) if s0 > 0 else (1.0 / p.rho,)


def expected_rate(p: LinkParams, cfg: EvalConfig = DEFAULT_EVAL,
                  clamp_nonneg: bool = False) -> KernelValue:
    """``E_Z[r]``, or ``E_Z[max(r, 0)]`` when ``clamp_nonneg``."""
    if p.rho == 0:
        return KernelValue(0.0, 0.0, True)
    if clamp_nonneg:
        def g(z):
            return np.maximum(rate(p, z), 0.0)
    else:
        def g(z):
            return rate(p, z)
    return expect(p.fading, g, cfg, _scales(p))


class RateMoments(NamedTuple):
    """``E[log2(1+rho Z)]`` and ``E[mu]`` with ``mu = log2(e) gamma / sqrt(n)``.

    The unclamped mean rate at any error level is ``shannon - Q^-1(eps) * mu``.
    """

    shannon: float
    mu: float

    def mean_rate(self, eps):
        return self.shannon - gaussian_q_inv(eps) * self.mu


def rate_moments(p: LinkParams, cfg: EvalConfig = DEFAULT_EVAL) -> RateMoments:
    if p.rho == 0:
        return RateMoments(0.0, 0.0)
    sc = _scales(p)
    s = expect(p.fading, lambda z: np.log1p(p.rho * z) * LOG2E, cfg, sc).value
    mu = expect(p.fading, lambda z: LOG2E / math.sqrt(p.n) * dispersion_root(p.rho * z), cfg, sc).value
    return RateMoments(s, mu)
