"""Quasi-static Nakagami-m fading: density, sampling and fading expectations.

The channel power gain ``Z = |h|^2`` is gamma distributed with shape ``m``
and unit mean; the average SNR lives entirely in ``rho``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import special

from .errors import DomainError
from .math_kernels import DEFAULT_QUAD, KernelValue, QuadratureConfig, gamma_expectation

QUADRATURE = "quadrature"
MONTE_CARLO = "montecarlo"
_MC_CHUNK = 1 << 20


@dataclass(frozen=True)
class FadingModel:
    m: float = 1.0

    def __post_init__(self):
        if not self.m >= 0.5:
            raise DomainError(f"Nakagami shape m must be >= 0.5, got {self.m}")


@dataclass(frozen=True)
class EvalConfig:
    """How fading expectations are evaluated."""

    method: str = QUADRATURE
    mc_samples: int = 1_000_000
    seed: int = 0
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if self.method not in (QUADRATURE, MONTE_CARLO):
            raise DomainError(f"unknown evaluation method {self.method!r}")
        if self.mc_samples < 1:
            raise DomainError("mc_samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


DEFAULT_EVAL = EvalConfig()


def pdf(model: FadingModel, z):
    """Gamma density ``m^m z^(m-1) e^(-m z) / Gamma(m)``."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("fading power gain must be non-negative")
    m = model.m
    if m == 1.0:
        out = np.exp(-z)
    else:
        with np.errstate(divide="ignore"):
            out = np.exp(m * math.log(m) + (m - 1.0) * np.log(z) - m * z - special.gammaln(m))
    return float(out) if out.ndim == 0 else out


def generator(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``(seed, *stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *stream])))


def sample(model: FadingModel, cfg: EvalConfig, count: int, stream: int = 0) -> np.ndarray:
    """``count`` i.i.d. draws of ``Z``; identical for identical ``(seed, stream)``."""
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = generator(cfg.seed, stream)
    return rng.standard_gamma(model.m, size=count) / model.m


def _mc_expect(model: FadingModel, g, cfg: EvalConfig, stream: int) -> KernelValue:
    rng = generator(cfg.seed, stream)
    remaining = cfg.mc_samples
    total = 0.0
    total_sq = 0.0
    while remaining:
        k = min(remaining, _MC_CHUNK)
        vals = np.asarray(g(rng.standard_gamma(model.m, size=k) / model.m), dtype=float)
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        remaining -= k
    n = cfg.mc_samples
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return KernelValue(mean, math.sqrt(var / n), True)


def expect(model: FadingModel, g: Callable[[np.ndarray], np.ndarray],
           cfg: EvalConfig = DEFAULT_EVAL, scales: Iterable[float] = (),
           stream: int = 0) -> KernelValue:
    """``E_Z[g(Z)]`` by quadrature or Monte Carlo, per ``cfg.method``.

    ``g`` must accept numpy arrays. For Monte Carlo, ``est_error`` is the
    standard error of the sample mean.
    """
    if cfg.method == MONTE_CARLO:
        return _mc_expect(model, g, cfg, stream)
    return gamma_expectation(g, model.m, cfg.quad, scales)


__all__ = [
    "QUADRATURE", "MONTE_CARLO", "FadingModel", "EvalConfig", "DEFAULT_EVAL",
    "DEFAULT_QUAD", "pdf", "generator", "sample", "expect",
]
