"""Scalar optimizers: optimal error probability, optimal power, the constrained
EEE line search and Dinkelbach's method for the EBP-ARQ error split."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .arq_ebp import ArqParams, arq_rates, eps1_domain, kappa_of, nbp_modified
from .channel import DEFAULT_EVAL, EvalConfig
from .effective_capacity import (
    LN2, ClosedFormTerms, EcMethod, QoSConstraints, j_kernel_drho, j_terms, lemma1_moments,
)
from .eee_models import (
    BufferMode, EeeResult, PowerModel, TrafficModel, ec_for_eee, nbp, power_total_ebp, theta_star,
)
from .errors import DomainError
from .fbl_rate import LinkParams, RateMoments, rate_moments
from .math_kernels import LOG2E, gaussian_q_inv

EPS_MIN = 1e-12
EPS_MAX = 0.5


@dataclass(frozen=True)
class OptimResult:
    arg_opt: float
    value_opt: float
    iterations: int
    converged: bool
    bracket: tuple
    trace: list = field(default_factory=list)
    info: dict = field(default_factory=dict)


def scan_minimize(f: Callable[[float], float], lo: float, hi: float, points: int = 64,
                  xatol: float = 1e-10, max_iter: int = 500) -> OptimResult:
    """Minimize ``f`` on ``[lo, hi]``: coarse scan, then bounded Brent in the best cell.

    The scan guards against the refinement locking onto a flat shoulder when
    the objective is unimodal but badly scaled.
    """
    xs = np.linspace(lo, hi, points)
    vals = np.array([f(x) for x in xs])
    finite = np.isfinite(vals)
    if not finite.any():
        return OptimResult(float("nan"), float("inf"), points, False, (lo, hi))
    vals = np.where(finite, vals, np.inf)
    i = int(np.argmin(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
    res = optimize.minimize_scalar(f, bounds=(a, b), method="bounded",
                                   options={"xatol": xatol, "maxiter": max_iter})
    x, v = float(res.x), float(res.fun)
    if not v <= vals[i]:
        x, v = float(xs[i]), float(vals[i])
    return OptimResult(x, v, points + int(res.nfev), bool(res.success), (float(a), float(b)))


# Optimal error probability ------------------------------------------------

def _beta(n: int, theta: float, eps):
    return theta * math.sqrt(n) * gaussian_q_inv(eps) * LOG2E


def psi_of_epsilon(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL):
    """``psi`` as a cheap function of ``eps`` alone; the fading integrals do not depend on it.

    Rayleigh uses the J kernel, other shapes the truncated-Taylor form.
    """
    if q.theta == 0:
        mom = rate_moments(p, cfg)
        # With no delay constraint the EC is the mean throughput.
        return lambda eps: -(1.0 - eps) * mom.mean_rate(eps)
    if p.m == 1.0:
        jt = j_terms(p, q, cfg)
        i0, i2 = jt.i_alpha, jt.i_alpha2

        def psi(eps):
            b = _beta(p.n, q.theta, eps)
            k2 = 0.5 * b * b + b
            return eps + (1.0 - eps) * ((k2 + 1.0) * i0 - k2 * i2)
        return psi
    terms = ClosedFormTerms.from_params(p, q.theta)
    moments = [mv.value for mv in lemma1_moments(p, terms, cfg)]

    def psi_nak(eps):
        b = _beta(p.n, q.theta, eps)
        return eps + (1.0 - eps) * sum(b ** k / math.factorial(k) * t for k, t in enumerate(moments))
    return psi_nak


def optimal_epsilon(p: LinkParams, q: QoSConstraints, cfg: EvalConfig = DEFAULT_EVAL,
                    clip: bool = True) -> OptimResult:
    """``argmin_eps eps + (1 - eps) J(eps)`` over ``[1e-12, 0.5]``, searched in ``log10 eps``.

    With ``clip`` the returned argument is ``min(eps*, q.epsilon_t)``; the
    unconstrained optimum is kept in ``info['eps_star']``.
    """
    if not p.rho > 0:
        raise DomainError("optimal epsilon needs rho > 0")
    psi = psi_of_epsilon(p, q, cfg)
    lo, hi = math.log10(EPS_MIN), math.log10(EPS_MAX)
    res = scan_minimize(lambda u: psi(10.0 ** u), lo, hi, points=96, xatol=1e-9)
    eps_star = 10.0 ** res.arg_opt
    arg = min(eps_star, q.epsilon_t) if clip else eps_star
    return OptimResult(arg, float(psi(arg)), res.iterations, res.converged,
                       (EPS_MIN, EPS_MAX), info={"eps_star": eps_star, "clipped": arg < eps_star})


# Optimal power -------------------------------------------------------------

def eee_theorem1(p: LinkParams, q: QoSConstraints, pm: PowerModel,
                 cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """Full-buffer EEE with the Rayleigh closed-form EC."""
    if p.rho == 0:
        return 0.0
    jt = j_terms(p, q, cfg)
    psi = p.epsilon + (1.0 - p.epsilon) * jt.j
    return -math.log(psi) / (p.n * q.theta) / (pm.zeta * p.rho + pm.pc)


def eee_theorem1_slope(p: LinkParams, q: QoSConstraints, pm: PowerModel,
                       cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """``d eta / d rho`` scaled by the positive factor ``P_t^2``."""
    jt = j_terms(p, q, cfg)
    psi = p.epsilon + (1.0 - p.epsilon) * jt.j
    nt = p.n * q.theta
    ec = -math.log(psi) / nt
    dec = -(1.0 - p.epsilon) * j_kernel_drho(p, q, cfg, jt) / (psi * nt)
    return dec * (pm.zeta * p.rho + pm.pc) - ec * pm.zeta


def optimal_power_theorem3(p: LinkParams, q: QoSConstraints, pm: PowerModel,
                           rho_max: float, cfg: EvalConfig = DEFAULT_EVAL,
                           grid_points: int = 64, rtol: float = 1e-8) -> OptimResult:
    """Stationary point of the Rayleigh closed-form EEE in ``rho``.

    The slope sign is scanned on a log grid over ``[rho_max 1e-6, rho_max]``
    and the first positive-to-negative change is polished by Brent's method.
    Without a sign change the best boundary is returned with
    ``converged=False``.
    """
    if p.m != 1.0:
        raise DomainError("the closed-form optimal power is for Rayleigh fading (m = 1)")
    if not q.theta > 0 or not rho_max > 0:
        raise DomainError("need theta > 0 and rho_max > 0")

    def slope(rho):
        return eee_theorem1_slope(p.with_(rho=rho), q, pm, cfg)

    def eee(rho):
        return eee_theorem1(p.with_(rho=rho), q, pm, cfg)

    grid = np.geomspace(rho_max * 1e-6, rho_max, grid_points)
    s = np.array([slope(r) for r in grid])
    change = np.nonzero((s[:-1] > 0) & (s[1:] <= 0))[0]
    if change.size == 0:
        rho = float(rho_max if s[-1] > 0 else grid[0])
        return OptimResult(rho, eee(rho), grid_points, False, (float(grid[0]), rho_max),
                           info={"boundary": True})
    i = int(change[0])
    rho, rr = optimize.brentq(slope, grid[i], grid[i + 1], rtol=rtol, xtol=1e-300,
                              full_output=True)
    return OptimResult(float(rho), eee(rho), grid_points + rr.function_calls, rr.converged,
                       (float(grid[i]), float(grid[i + 1])), info={"boundary": False})


# Constrained EEE maximisation ----------------------------------------------

@dataclass(frozen=True)
class ConstrainedPoint:
    rho: float
    eps: float
    theta: float
    result: EeeResult
    theta_slack: bool = False

    @property
    def eee(self) -> float:
        return self.result.eee if self.result.feasible else -math.inf


def _constraint_violations(pt: ConstrainedPoint, q: QoSConstraints, tm: TrafficModel,
                           rho_max: float, slack: float = 1e-9) -> list:
    r = pt.result
    bad = []
    if not r.ec >= tm.lam * (1.0 - slack):
        bad.append("ec >= lambda")
    if not r.p_nb * math.exp(-pt.theta * tm.lam * q.delta) <= q.Lambda * (1.0 + slack):
        bad.append("delay outage")
    if not pt.rho <= rho_max * (1.0 + slack):
        bad.append("rho <= rho_max")
    if not pt.eps <= q.epsilon_t * (1.0 + slack):
        bad.append("eps <= eps_t")
    if not 0.0 <= r.p_nb <= 1.0:
        bad.append("0 <= p_nb <= 1")
    return bad


def constrained_point(p: LinkParams, q: QoSConstraints, pm: PowerModel, tm: TrafficModel,
                      rho: float, cfg: EvalConfig = DEFAULT_EVAL,
                      method: EcMethod | str = EcMethod.STOCHASTIC,
                      max_iter: int = 50) -> ConstrainedPoint:
    """Evaluate one line-search candidate.

    ``theta`` follows the outage constraint at equality, ``eps`` is
    ``min(eps*, eps_t)`` at that ``theta`` and ``P_nb`` follows ``eps``;
    the three are iterated to a joint fixed point.
    """
    link = p.with_(rho=rho)
    shannon = EcMethod(method) is EcMethod.SHANNON
    th = theta_star(tm, q, 1.0)
    eps = q.epsilon_t
    nb = None
    for _ in range(max_iter):
        qq = q.with_(theta=th.theta)
        if not shannon:
            eps = optimal_epsilon(link, qq, cfg).arg_opt
        nb = nbp(link.with_(epsilon=eps), tm, cfg, shannon=shannon)
        new = theta_star(tm, q, nb.p_nb)
        done = abs(new.theta - th.theta) <= 1e-12 * max(th.theta, 1e-300)
        th = new
        if done or tm.buffer_mode is BufferMode.FULL_BUFFER:
            break
    link = link.with_(epsilon=eps)
    qq = q.with_(theta=th.theta)
    ec = ec_for_eee(link, qq, cfg, method)
    pt = power_total_ebp(rho, nb.p_nb, pm)
    feasible = nb.feasible and ec.ec >= tm.lam
    res = EeeResult(ec.ec / pt, ec.ec, nb.p_nb, pt, feasible, nb.mean_rate, ec.method)
    return ConstrainedPoint(rho, eps, th.theta, res, th.slack)


def maximize_eee_constrained(p: LinkParams, q: QoSConstraints, pm: PowerModel,
                             tm: TrafficModel, rho_max: float,
                             cfg: EvalConfig = DEFAULT_EVAL,
                             method: EcMethod | str = EcMethod.STOCHASTIC,
                             points: int = 256):
    """Line search over ``rho`` for the QoS-constrained EEE maximum.

    Returns ``(best_point, OptimResult)``. When no candidate meets
    ``C_e >= lambda`` the best point is None and ``converged`` is False.
    Ties within 1e-12 relative go to the smallest ``rho``.
    """
    if not rho_max > 0:
        raise DomainError("rho_max must be > 0")
    grid = np.geomspace(rho_max * 1e-3, rho_max, points)
    cands = [constrained_point(p, q, pm, tm, float(r), cfg, method) for r in grid]
    vals = np.array([c.eee for c in cands])
    trace = [(c.rho, c.eee) for c in cands]
    if not np.isfinite(vals).any():
        return None, OptimResult(math.nan, -math.inf, points, False, (grid[0], rho_max),
                                 trace, {"infeasible": True})
    top = vals.max()
    i = int(np.nonzero(vals >= top - 1e-12 * abs(top))[0][0])
    best = cands[i]
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    cache = {}

    def neg(u):
        c = constrained_point(p, q, pm, tm, float(math.exp(u)), cfg, method)
        cache[u] = c
        return -c.eee if math.isfinite(c.eee) else 1e300

    res = optimize.minimize_scalar(neg, bounds=(math.log(lo), math.log(hi)), method="bounded",
                                   options={"xatol": 1e-9})
    refined = cache.get(res.x) or constrained_point(p, q, pm, tm, float(math.exp(res.x)), cfg, method)
    if refined.eee > best.eee * (1.0 + 1e-12):
        best = refined
    bad = _constraint_violations(best, q, tm, rho_max)
    opt = OptimResult(best.rho, best.eee, points + int(res.nfev), not bad, (float(lo), float(hi)),
                      trace, {"violations": bad})
    return best, opt


# Dinkelbach for the EBP-ARQ error split ------------------------------------

@dataclass(frozen=True)
class DinkelbachState:
    sigma: float
    f_value: float
    tolerance: float
    max_iter: int


class _SplitObjective:
    """``p' = A / B`` with ``A = kappa - sqrt(kappa^2 - 4 (kappa - r0) lam)`` and
    ``B = 2 (kappa - r0)``, the sign-normalised root of the NBP fixed point.
    ``B > 0`` wherever ``kappa > r0``, which is where ``p' < lam / r0``.
    """

    def __init__(self, mom: RateMoments, eps_t: float, lam: float):
        self.mom, self.eps_t, self.lam = mom, eps_t, lam
        self.r0 = mom.mean_rate(eps_t)

    def kappa(self, e1: float) -> float:
        return kappa_of(self.mom.mean_rate(e1), self.mom.mean_rate(self.eps_t / e1), e1)

    def parts(self, e1: float):
        k = self.kappa(e1)
        disc = max(k * k - 4.0 * (k - self.r0) * self.lam, 0.0)
        return k - math.sqrt(disc), 2.0 * (k - self.r0)

    def p_nb(self, e1: float) -> float:
        k = self.kappa(e1)
        disc = max(k * k + 4.0 * (self.r0 - k) * self.lam, 0.0)
        return 2.0 * self.lam / (k + math.sqrt(disc))


def _positive_region(obj: _SplitObjective, lo: float, hi: float, points: int = 257):
    """Log-interval of ``eps1`` where ``kappa > r0`` (an interval since kappa is concave)."""
    us = np.linspace(math.log(lo), math.log(hi), points)
    g = np.array([obj.kappa(math.exp(u)) - obj.r0 for u in us])
    pos = np.nonzero(g > 0)[0]
    if pos.size == 0:
        return None
    i, j = int(pos[0]), int(pos[-1])

    def h(u):
        return obj.kappa(math.exp(u)) - obj.r0
    a = us[i] if i == 0 else optimize.brentq(h, us[i - 1], us[i], xtol=1e-13)
    b = us[j] if j == points - 1 else optimize.brentq(h, us[j], us[j + 1], xtol=1e-13)
    # Stay strictly inside so that B > 0.
    pad = 1e-9 * (b - a)
    return a + pad, b - pad


def dinkelbach_min_nbp(p: LinkParams, eps_t: float, lam: float,
                       cfg: EvalConfig = DEFAULT_EVAL, tol: float = 1e-8,
                       max_iter: int = 50, moments: RateMoments | None = None,
                       scan_points: int = 64) -> OptimResult:
    """Minimise the modified NBP over ``eps1`` with ``eps2 = eps_t / eps1``.

    Each step minimises ``A(eps1) - sigma B(eps1)`` (scan plus bounded Brent
    in ``log eps1``), sets ``sigma = A / B`` at the minimiser and stops once
    ``|F| <= tol``. ``trace`` holds ``(eps1, sigma, F)`` per iteration.
    """
    if not 0.0 < eps_t <= 0.25:
        raise DomainError("eps_t must lie in (0, 0.25]")
    if not tol > 0:
        raise DomainError("tol must be > 0")
    mom = rate_moments(p, cfg) if moments is None else moments
    obj = _SplitObjective(mom, eps_t, lam)
    lo, hi = eps1_domain(eps_t)
    region = _positive_region(obj, lo, hi)
    if region is None:
        # No split beats single-shot transmission; fall back to a direct search.
        res = scan_minimize(lambda u: obj.p_nb(math.exp(u)), math.log(lo), math.log(hi),
                            points=scan_points)
        e1 = math.exp(res.arg_opt)
        return OptimResult(e1, obj.p_nb(e1), res.iterations, False, (lo, hi),
                           info={"fallback": True, "r0": obj.r0})
    ua, ub = region
    start = min(max(math.log(math.sqrt(eps_t)), ua), ub)
    a, b = obj.parts(math.exp(start))
    sigma = a / b
    trace = [(math.exp(start), sigma, math.nan)]
    e1 = math.exp(start)
    for it in range(1, max_iter + 1):
        def sub(u, s=sigma):
            aa, bb = obj.parts(math.exp(u))
            return aa - s * bb
        res = scan_minimize(sub, ua, ub, points=scan_points, xatol=1e-12)
        # The incumbent scores zero, so F <= 0; keep it unless the search beats it.
        if res.value_opt < sub(math.log(e1)):
            e1 = math.exp(res.arg_opt)
        a, b = obj.parts(e1)
        f = a - sigma * b
        sigma = a / b
        trace.append((e1, sigma, f))
        if abs(f) <= tol:
            state = DinkelbachState(sigma, f, tol, max_iter)
            return OptimResult(e1, sigma, it, True, (math.exp(ua), math.exp(ub)), trace,
                               {"state": state, "r0": obj.r0, "fallback": False})
    state = DinkelbachState(sigma, trace[-1][2], tol, max_iter)
    return OptimResult(e1, sigma, max_iter, False, (math.exp(ua), math.exp(ub)), trace,
                       {"state": state, "r0": obj.r0, "fallback": False})


def min_power_split(p: LinkParams, eps_t: float, lam: float, cfg: EvalConfig = DEFAULT_EVAL,
                    moments: RateMoments | None = None) -> ArqParams:
    """Error split minimising the modified NBP, hence the transmit power."""
    res = dinkelbach_min_nbp(p, eps_t, lam, cfg, moments=moments)
    return ArqParams.at_equality(res.arg_opt, eps_t)


def check_nbp_consistency(p: LinkParams, a: ArqParams, lam: float,
                          cfg: EvalConfig = DEFAULT_EVAL) -> float:
    """Difference between the Dinkelbach objective and the closed-form modified NBP."""
    obj = _SplitObjective(rate_moments(p, cfg), a.eps_target, lam)
    return obj.p_nb(a.eps1) - nbp_modified(arq_rates(p, a, cfg), lam).p_nb


__all__ = [
    "OptimResult", "DinkelbachState", "ConstrainedPoint", "scan_minimize", "psi_of_epsilon",
    "optimal_epsilon", "eee_theorem1", "check_nbp_consistency", "eee_theorem1_slope", "optimal_power_theorem3",
    "constrained_point", "maximize_eee_constrained", "dinkelbach_min_nbp", "min_power_split",
    "LN2",
]
