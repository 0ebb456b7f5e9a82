"""Brute-force reference computations used to cross-check the main code paths.

Nothing here calls the package's quadrature engine or RNG helper: Monte Carlo
draws come from a PCG64 stream seeded through a distinct key, deterministic
integrals use scipy's QUADPACK or mpmath, and the rate formula is restated
with the standard library's normal quantile.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate, stats

_ORACLE_KEY = 0x0E1C
_CHUNK = 1 << 20
_STD = NormalDist()


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    primary: float
    oracle: float
    tolerance: float
    kind: str = "rel"          # "rel", "abs" or "stderr" (tolerance in standard errors)
    stderr: float = math.nan

    @property
    def deviation(self) -> float:
        d = abs(self.primary - self.oracle)
        if self.kind == "rel":
            return d / abs(self.oracle) if self.oracle != 0 else d
        if self.kind == "stderr":
            return d / self.stderr if self.stderr > 0 else (0.0 if d == 0 else math.inf)
        return d

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


@dataclass(frozen=True)
class McEstimate:
    psi: float
    psi_stderr: float
    ec: float
    ec_stderr: float
    samples: int


# Independent restatement of the rate --------------------------------------

def qinv_ref(eps: float) -> float:
    return -_STD.inv_cdf(eps)


def rate_ref(n: int, eps: float, snr):
    """``log2(1+s) - sqrt(V/n) Q^-1(eps) log2 e`` with ``V = 1 - (1+s)^-2``."""
    snr = np.asarray(snr, dtype=float)
    v = 1.0 - 1.0 / (1.0 + snr) ** 2
    return np.log2(1.0 + snr) - np.sqrt(np.maximum(v, 0.0) / n) * qinv_ref(eps) / math.log(2.0)


# Monte Carlo ----------------------------------------------------------------

def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(_ORACLE_KEY, *key))))


def mc_mean(fn: Callable[[np.ndarray], np.ndarray], m: float, samples: int, seed: int,
            key: int = 0, dims: int = 1):
    """Sample mean and standard error of ``fn(Z)`` (or ``fn(Z1, Z2)`` when dims=2)."""
    if samples < 2:
        raise ValueError("need at least two samples")
    rng = _rng(seed, key)
    total = total_sq = 0.0
    left = samples
    while left:
        k = min(left, _CHUNK)
        zs = [rng.gamma(m, 1.0 / m, size=k) for _ in range(dims)]
        v = np.asarray(fn(*zs), dtype=float)
        total += float(v.sum())
        total_sq += float(v @ v)
        left -= k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


def mc_ec_oracle(n: int, rho: float, m: float, eps: float, theta: float,
                 samples: int = 1_000_000, seed: int = 0) -> McEstimate:
    """Effective capacity by raw sampling, with a delta-method standard error."""
    if samples < 10_000:
        raise ValueError("samples must be >= 1e4")
    if eps >= 1.0:
        return McEstimate(1.0, 0.0, 0.0, 0.0, samples)
    k = n * theta

    def g(z):
        return eps + (1.0 - eps) * np.exp(-k * rate_ref(n, eps, rho * z))
    psi, se = mc_mean(g, m, samples, seed)
    return McEstimate(psi, se, -math.log(psi) / k, se / (psi * k), samples)


def mc_rate_oracle(n: int, rho: float, m: float, eps: float, samples: int = 1_000_000,
                   seed: int = 0, clamp: bool = False):
    def g(z):
        r = rate_ref(n, eps, rho * z)
        return np.maximum(r, 0.0) if clamp else r
    return mc_mean(g, m, samples, seed, key=1)


def mc_arq_psi_oracle(n: int, rho: float, m: float, eps: float, eps1: float, eps2: float,
                      p_nb: float, theta: float, samples: int = 1_000_000, seed: int = 0):
    """Four-branch ARQ service mixture averaged over sampled gains."""
    k = n * theta

    def g(z):
        s = rho * z
        r0, r1, r2 = (rate_ref(n, e, s) for e in (eps, eps1, eps2))
        busy = eps + (1.0 - eps) * np.exp(-k * r0)
        idle = (1 - eps1) * np.exp(-k * r1) + eps1 * (1 - eps2) * np.exp(-0.5 * k * r2) + eps
        return p_nb * busy + (1.0 - p_nb) * idle
    return mc_mean(g, m, samples, seed, key=2)


# Deterministic integration (QUADPACK / mpmath) -----------------------------

def quad_gamma_expectation(g: Callable[[float], float], m: float) -> float:
    """``E[g(Z)]``, ``Z ~ Gamma(m, 1/m)``, by adaptive QUADPACK on split ranges."""
    pdf = stats.gamma(m, scale=1.0 / m).pdf
    cuts = [0.0, 1e-6, 1e-3, 0.05, 0.5, 2.0, 10.0, 60.0 / m + 60.0]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(lambda z: g(z) * pdf(z), a, b, limit=400,
                                epsabs=1e-15, epsrel=1e-12)
        total += val
    return total


def power_integral_mpmath(beta: float, rho: float, dps: int = 40) -> float:
    """``E[(1+rho Z)^beta]`` for Rayleigh fading via the upper incomplete gamma."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(1) / rho
        val = mpmath.exp(x) * x ** (-beta) * mpmath.gammainc(beta + 1, x)
        return float(val)


# Search and differentiation ---------------------------------------------------

def grid_argopt_oracle(f: Callable[[float], float], interval: Sequence[float], points: int = 10_000,
                       maximize: bool = False, log: bool = False):
    """Exhaustive search, then one refinement grid around the best cell.

    Returns ``(arg, value)``. ``log`` spaces the grid geometrically.
    """
    if points < 1000:
        raise ValueError("points must be >= 1000")
    lo, hi = float(interval[0]), float(interval[1])
    space = np.geomspace if log else np.linspace
    sign = -1.0 if maximize else 1.0

    def best(xs):
        vals = np.array([sign * f(float(x)) for x in xs])
        vals[~np.isfinite(vals)] = np.inf
        i = int(np.argmin(vals))
        return i, vals

    xs = space(lo, hi, points)
    i, _ = best(xs)
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
    xs2 = space(a, b, points)
    j, vals2 = best(xs2)
    return float(xs2[j]), float(sign * vals2[j])


def fd_step(x: float, order: int = 1) -> float:
    """``max(1e-6 |x|, 1e-9)`` for slopes; second derivatives use ``1e-4 |x|`` to limit cancellation."""
    if order == 1:
        return max(1e-6 * abs(x), 1e-9)
    return max(1e-4 * abs(x), 1e-7)


def finite_diff(f: Callable[[float], float], x: float, order: int = 1,
                h: float | None = None) -> float:
    """Central difference with one Richardson extrapolation step."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    h = fd_step(x, order) if h is None else h
    if x + h == x or x + 0.5 * h == x:
        warnings.warn("finite-difference step underflows at this x", RuntimeWarning)

    def central(s):
        if order == 1:
            return (f(x + s) - f(x - s)) / (2.0 * s)
        return (f(x + s) - 2.0 * f(x) + f(x - s)) / (s * s)
    return (4.0 * central(0.5 * h) - central(h)) / 3.0
