"""Cross-check battery run by ``eee-urllc validate``: each primary result against its oracle."""
from __future__ import annotations

import math

from . import arq_ebp as arq
from .channel import DEFAULT_EVAL, EvalConfig
from .effective_capacity import QoSConstraints, ec_stochastic, j_kernel, j_kernel_drho, psi_stochastic
from .eee_models import PowerModel, TrafficModel, nbp
from .fbl_rate import LinkParams, db_to_linear, expected_rate, rate, rate_d2rho, rate_drho, rate_moments
from .math_kernels import gaussian_q_inv, power_exp_integral
from .optimizers import (
    _SplitObjective, dinkelbach_min_nbp, eee_theorem1, optimal_epsilon, optimal_power_theorem3,
    psi_of_epsilon,
)
from .oracles import (
    OracleReport, finite_diff, grid_argopt_oracle, mc_arq_psi_oracle, mc_ec_oracle, mc_rate_oracle,
    power_integral_mpmath, qinv_ref, quad_gamma_expectation, rate_ref,
)

# Reference operating point: 3 dB, n = 500, eps = 1e-4, theta = 0.01, Rayleigh.
REF_RHO = float(db_to_linear(3.0))
REF = dict(n=500, rho=REF_RHO, m=1.0, epsilon=1e-4)
REF_THETA = 0.01
# EBP-ARQ operating point: 6 dB, eps_t = 1e-9, lambda = 0.5.
ARQ = dict(n=500, rho=float(db_to_linear(6.0)), m=1.0, epsilon=1e-9)
ARQ_LAMBDA = 0.5


def _q_inverse():
    return [OracleReport(f"qinv({e:g})", gaussian_q_inv(e), qinv_ref(e), 1e-12)
            for e in (1e-9, 1e-4, 0.1, 0.5 - 1e-9)]


def _kernels():
    out = []
    for beta, rho in ((-7.2135, 2.0), (-80.0, 0.5), (1.0, 10.0)):
        out.append(OracleReport(f"I({beta:g};rho={rho:g})", power_exp_integral(beta, rho).value,
                                power_integral_mpmath(beta, rho), 1e-9))
    return out


def _psi_quadrature():
    p, q = LinkParams(**REF), QoSConstraints(REF_THETA)
    k = p.n * q.theta

    def g(z):
        return p.epsilon + (1 - p.epsilon) * math.exp(-k * float(rate_ref(p.n, p.epsilon, p.rho * z)))
    return [OracleReport("psi quadrature vs QUADPACK", psi_stochastic(p, q).value,
                         quad_gamma_expectation(g, 1.0), 1e-8)]


def _nakagami_mean_rate():
    out = []
    for m in (0.5, 2.0):
        p = LinkParams(**{**REF, "m": m})
        ref = quad_gamma_expectation(lambda z: float(rate_ref(p.n, p.epsilon, p.rho * z)), m)
        out.append(OracleReport(f"E[r] m={m:g} vs QUADPACK", expected_rate(p).value, ref, 1e-8))
    return out


def _monte_carlo(samples: int, seed: int, cfg: EvalConfig):
    p, q = LinkParams(**REF), QoSConstraints(REF_THETA)
    mc = mc_ec_oracle(p.n, p.rho, p.m, p.epsilon, q.theta, samples, seed)
    out = [
        OracleReport("psi vs MC", psi_stochastic(p, q, cfg).value, mc.psi, 3.0, "stderr", mc.psi_stderr),
        OracleReport("EC vs MC", ec_stochastic(p, q, cfg).ec, mc.ec, 3.0, "stderr", mc.ec_stderr),
    ]
    mean, se = mc_rate_oracle(p.n, p.rho, p.m, p.epsilon, samples, seed, clamp=True)
    tm = TrafficModel(1.0)
    out.append(OracleReport("P_nb vs MC", nbp(p, tm, cfg).p_nb, min(tm.lam / mean, 1.0), 3.0,
                            "stderr", tm.lam * se / mean ** 2))
    pa = LinkParams(**ARQ)
    a = arq.ArqParams.at_equality(math.sqrt(pa.epsilon), pa.epsilon)
    rates = arq.arq_rates(pa, a, cfg)
    for name, eps, val in (("r0", a.eps_target, rates.r0), ("r1", a.eps1, rates.r1),
                           ("r2", a.eps2, rates.r2)):
        mean, se = mc_rate_oracle(pa.n, pa.rho, pa.m, eps, samples, seed)
        out.append(OracleReport(f"ARQ {name} vs MC", val, mean, 3.0, "stderr", se))
    nb = arq.nbp_modified(rates, ARQ_LAMBDA).p_nb
    psi_mc, se = mc_arq_psi_oracle(pa.n, pa.rho, pa.m, a.eps_target, a.eps1, a.eps2, nb,
                                   REF_THETA, samples, seed)
    psi = arq.psi_arq(pa, QoSConstraints(REF_THETA), a, nb, cfg).value
    out.append(OracleReport("ARQ psi vs MC", psi, psi_mc, 3.0, "stderr", se))
    return out


def _derivatives():
    p, q = LinkParams(**{**REF, "rho": 2.0}), QoSConstraints(REF_THETA)
    out = [OracleReport("dJ/drho vs FD", j_kernel_drho(p, q),
                        finite_diff(lambda r: j_kernel(p.with_(rho=r), q), p.rho), 1e-5)]
    for z in (0.05, 1.0, 4.0):
        out.append(OracleReport(f"dr/drho z={z:g} vs FD", float(rate_drho(p, z)),
                                finite_diff(lambda r: float(rate(p.with_(rho=r), z)), p.rho), 1e-5))
        out.append(OracleReport(f"d2r/drho2 z={z:g} vs FD", float(rate_d2rho(p, z)),
                                finite_diff(lambda r: float(rate(p.with_(rho=r), z)), p.rho, 2), 1e-4))
    pa = LinkParams(**ARQ)
    mom = rate_moments(pa)
    for e1 in (1e-3, 0.0238, 0.3):
        d2 = arq.kappa_derivatives(mom, e1, pa.epsilon)[2]
        fd = finite_diff(lambda e: arq.kappa_derivatives(mom, e, pa.epsilon)[0], e1, 2)
        out.append(OracleReport(f"d2kappa eps1={e1:g} vs FD", d2, fd, 1e-4))
    return out


def _optimizers(cfg: EvalConfig):
    out = []
    p = LinkParams(500, 10.0, 1.0, 1e-4)
    q = QoSConstraints(REF_THETA)
    res = optimal_epsilon(p, q, cfg, clip=False)
    psi = psi_of_epsilon(p, q, cfg)
    _, best = grid_argopt_oracle(psi, (1e-12, 0.5), 10_000, log=True)
    out.append(OracleReport("optimal eps objective vs grid", res.value_opt, best, 1e-9, "abs"))

    pm = PowerModel(1.2, 1.2)
    lp = LinkParams(**REF)
    t3 = optimal_power_theorem3(lp, q, pm, 1e3, cfg)
    arg, _ = grid_argopt_oracle(lambda r: eee_theorem1(lp.with_(rho=r), q, pm, cfg),
                                (1e-3, 1e3), 2000, maximize=True, log=True)
    out.append(OracleReport("optimal power vs grid", t3.arg_opt, arg, 1e-3))

    pa = LinkParams(**ARQ)
    mom = rate_moments(pa, cfg)
    dk = dinkelbach_min_nbp(pa, pa.epsilon, ARQ_LAMBDA, cfg, moments=mom)
    obj = _SplitObjective(mom, pa.epsilon, ARQ_LAMBDA)
    lo, hi = arq.eps1_domain(pa.epsilon)
    _, best = grid_argopt_oracle(obj.p_nb, (lo, hi), 10_000, log=True)
    out.append(OracleReport("Dinkelbach p' vs grid", dk.value_opt, best, 1e-6, "abs"))
    a = arq.ArqParams.at_equality(dk.arg_opt, pa.epsilon)
    rates = arq.arq_rates(pa, a, cfg, mom)
    nb = arq.nbp_modified(rates, ARQ_LAMBDA).p_nb
    out.append(OracleReport("p' fixed point residual", arq.fixed_point_residual(rates, ARQ_LAMBDA, nb),
                            0.0, 1e-10, "abs"))
    return out


def run_battery(cfg: EvalConfig = DEFAULT_EVAL, samples: int = 1_000_000, seed: int = 12345):
    """All implementation-vs-oracle checks; returns a list of :class:`OracleReport`."""
    return [*_q_inverse(), *_kernels(), *_psi_quadrature(), *_nakagami_mean_rate(),
            *_monte_carlo(samples, seed, cfg), *_derivatives(), *_optimizers(cfg)]
