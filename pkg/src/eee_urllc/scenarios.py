"""Experiment sweeps, one per figure, plus the two-user SIC exemplar.

Each figure is a grid over one axis crossed with a few fixed families.  Rows
are independent, so they are evaluated as separate tasks (optionally in a
process pool) and reassembled in grid order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from . import arq_ebp as arq
from .channel import DEFAULT_EVAL, MONTE_CARLO, EvalConfig, expect, generator
from .effective_capacity import EcMethod, QoSConstraints, _psi_scales, ec_shannon, ec_stochastic
from .eee_models import (
    BufferMode, PowerModel, TrafficModel, eee_ebp, eee_full_buffer, nbp, theta_star,
)
from .errors import ConvergenceError, DomainError
from .fbl_rate import LinkParams, _scales, db_to_linear, expected_rate, rate, rate_moments
from .optimizers import (
    dinkelbach_min_nbp, eee_theorem1, maximize_eee_constrained, scan_minimize,
)

FIGURES = tuple(range(1, 11))


@dataclass(frozen=True)
class SweepSpec:
    fig: int
    axis: str
    grid: tuple
    fixed: dict = field(default_factory=dict)
    methods: tuple = ()

    def __post_init__(self):
        if self.fig not in FIGURES:
            raise DomainError(f"unknown figure {self.fig}")
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0:
            raise DomainError("sweep grid is empty")
        d = np.diff(g)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise DomainError("sweep grid must be strictly monotone")

    def with_fixed(self, **changes) -> "SweepSpec":
        return replace(self, fixed={**self.fixed, **changes})


@dataclass
class Table:
    columns: tuple
    rows: list
    config: dict
    notes: tuple = ()

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def where(self, **match) -> "Table":
        idx = [self.columns.index(k) for k in match]
        keep = [r for r in self.rows if all(r[i] == v for i, v in zip(idx, match.values()))]
        return Table(self.columns, keep, self.config, self.notes)


# Presets ---------------------------------------------------------------------

_COMMON = {"n": 500, "m": 1.0, "zeta": 1.2}


def _grid(kind: str, lo: float, hi: float, points: int):
    if kind == "log":
        return tuple(float(x) for x in np.geomspace(lo, hi, points))
    return tuple(float(x) for x in np.linspace(lo, hi, points))


def default_spec(fig: int, points: int = 41) -> SweepSpec:
    """Parameter record for each figure, as stated alongside it."""
    if fig == 1:
        return SweepSpec(1, "rho_db", _grid("lin", -5, 20, points), {
            **_COMMON, "n_values": (50, 500), "thetas": (1e-3, 1e-2, 0.1),
            "eps": 1e-4, "pc": 1.2}, ("theorem1", "stochastic"))
    if fig == 2:
        return SweepSpec(2, "theta", _grid("log", 1e-4, 1.0, points), {
            **_COMMON, "rho_db": 3.0, "eps": 1e-4, "pcs": (0.2, 1.0), "m_values": (1.0, 2.0)},
            ("stochastic", "shannon"))
    if fig == 3:
        return SweepSpec(3, "eps", _grid("log", 1e-8, 0.3, points), {
            **_COMMON, "rho_db": 10.0, "Lambdas": (1e-2, 1e-3), "pc": 0.2, "lam": 1.0,
            "delta": 500.0}, ("stochastic", "shannon"))
    if fig in (4, 6):
        return SweepSpec(fig, "delta", _grid("log", 100, 10000, points), {
            **_COMMON, "Lambdas": (1e-2, 1e-3), "pc": 0.2, "lam": 1.0, "rho_max_db": 13.0,
            "eps_t": 1e-3 if fig == 4 else 1e-4, "line_points": 256,
            "ec_method": "stochastic"}, ("stochastic", "shannon"))
    if fig == 5:
        return SweepSpec(5, "lambda1", _grid("lin", 0.05, 1.25, points), {
            "n": 500, "m": 1.0, "zeta": 1.2, "pc": 0.2, "rho1_db": 6.0, "rho2_db": 0.0,
            "eps_u1": 1e-4, "eps_u2": 0.1, "theta": 0.01, "lam2": 0.5, "delta": 500.0})
    if fig == 7:
        return SweepSpec(7, "theta", _grid("log", 1e-3, 1.0, points), {
            **_COMMON, "rho_db": 6.0, "eps_t": 1e-9, "lam": 0.5, "pc": 0.2,
            "eps1_grid_points": 200}, ("stochastic",))
    if fig == 8:
        return SweepSpec(8, "p_nb", _grid("lin", 0.05, 1.0, points), {
            **_COMMON, "rho_db": 3.0, "eps": 1e-4, "theta": 0.01, "pcs": (0.2, 1.0)},
            ("stochastic", "shannon"))
    if fig == 9:
        return SweepSpec(9, "lam", _grid("lin", 0.1, 1.5, points), {
            **_COMMON, "rho_db": 6.0, "eps_t": 1e-9, "theta": 0.01, "pc": 0.2})
    if fig == 10:
        return SweepSpec(10, "lam", _grid("lin", 0.1, 1.5, points), {
            **_COMMON, "rho_db": 6.0, "eps_targets": (1e-9, 1e-5), "theta": 0.01, "pc": 0.2})
    raise DomainError(f"unknown figure {fig}")


# Per-figure row builders -------------------------------------------------------
# Each takes (task, fixed, cfg) and returns a list of row tuples.

def _pm(f, pc=None) -> PowerModel:
    return PowerModel(f["zeta"], f["pc"] if pc is None else pc)


def _fig1(t, f, cfg):
    p = LinkParams(t["n"], float(db_to_linear(t["x"])), f["m"], f["eps"])
    q = QoSConstraints(t["theta"])
    pm = _pm(f)
    closed = eee_theorem1(p, q, pm, cfg)
    stoch = eee_full_buffer(p, q, pm, cfg, EcMethod.STOCHASTIC).eee
    return [(t["x"], t["theta"], closed, stoch, t["n"])]


def _fig2(t, f, cfg):
    p = LinkParams(f["n"], float(db_to_linear(f["rho_db"])), t["m"], f["eps"])
    q = QoSConstraints(t["x"])
    pm = _pm(f, t["pc"])
    fbl = eee_full_buffer(p, q, pm, cfg, EcMethod.STOCHASTIC)
    sh = eee_full_buffer(p, q, pm, cfg, EcMethod.SHANNON)
    return [(t["x"], t["pc"], t["m"], fbl.ec, sh.ec, fbl.eee, sh.eee)]


def _fig3(t, f, cfg):
    p = LinkParams(f["n"], float(db_to_linear(f["rho_db"])), f["m"], t["x"])
    pm = _pm(f)
    lam, lam_ = f["lam"], t["Lambda"]
    q = QoSConstraints(0.0, f["delta"], lam_)
    ebp = TrafficModel(lam, BufferMode.EMPTY_BUFFER_AWARE)
    nb = nbp(p, ebp, cfg)
    th = theta_star(ebp, q, nb.p_nb).theta
    r_ebp = eee_ebp(p, q.with_(theta=th), pm, ebp, cfg, EcMethod.STOCHASTIC)
    th_full = theta_star(ebp, q, 1.0).theta
    r_full = eee_full_buffer(p, q.with_(theta=th_full), pm, cfg, EcMethod.STOCHASTIC)
    nb_sh = nbp(p, ebp, cfg, shannon=True)
    th_sh = theta_star(ebp, q, nb_sh.p_nb).theta
    r_sh = eee_ebp(p, q.with_(theta=th_sh), pm, ebp, cfg, EcMethod.SHANNON)
    return [(t["x"], lam_, th, nb.p_nb, r_ebp.eee, r_full.eee, r_sh.eee, int(r_ebp.feasible))]


def _fig46(t, f, cfg):
    p = LinkParams(f["n"], 1.0, f["m"], f["eps_t"])
    q = QoSConstraints(0.0, t["x"], t["Lambda"], f["eps_t"])
    tm = TrafficModel(f["lam"], t["mode"])
    pm = _pm(f)
    rho_max = float(db_to_linear(f["rho_max_db"]))
    pts = int(f["line_points"])
    best, _ = maximize_eee_constrained(p, q, pm, tm, rho_max, cfg, f["ec_method"], pts)
    sh, _ = maximize_eee_constrained(p, q, pm, tm, rho_max, cfg, EcMethod.SHANNON, pts)
    nan = math.nan

    def fields(b):
        if b is None:
            return (nan, nan, nan, nan, nan, nan, 0)
        r = b.result
        return (10 * math.log10(b.rho), b.eps, b.theta, r.p_nb, r.ec, r.eee, 1)
    fb, fs = fields(best), fields(sh)
    return [(t["x"], t["Lambda"], t["mode"], *fb, fs[0], fs[5], fs[6])]


@dataclass(frozen=True)
class TwoUserConfig:
    rho1: float
    rho2: float
    eps1_user: float
    eps2_user: float
    lambda1: float
    lambda2: float
    n: int = 500
    theta: float = 0.01
    pm: PowerModel = PowerModel()
    delta: float = 500.0
    m: float = 1.0

    def __post_init__(self):
        if not (self.rho1 >= 0 and self.rho2 > 0):
            raise DomainError("need rho1 >= 0 and rho2 > 0")
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise DomainError("arrival rates must be > 0")


@dataclass(frozen=True)
class TwoUserResult:
    p_nb1: float
    p_nb2: float
    ec1: float
    ec2: float
    eee1: float
    eee2: float
    feasible: bool
    converged: bool
    residual: float
    iterations: int


TWO_USER_NOTES = (
    "two-user model: user 2 is decoded first treating user 1 as interference",
    "two-user model: user 1 is decoded last after ideal cancellation, interference free",
    "two-user model: user 1 interferes only while its buffer is non-empty (probability P_nb1)",
    "two-user model: SINR2 = rho2 Z2 / (1 + rho1 Z1) with independent Z1, Z2",
)


def _interfered_expectation(c: TwoUserConfig, g: Callable, cfg: EvalConfig) -> float:
    """``E[g(rate of user 2 at SINR rho2 Z2 / (1 + rho1 Z1))]`` with independent gains."""
    p2 = LinkParams(c.n, c.rho2, c.m, c.eps2_user)
    if c.rho1 == 0:
        return expect(p2.fading, lambda z: g(rate(p2, z)), cfg, _scales(p2)).value
    if cfg.method == MONTE_CARLO:
        gen1, gen2 = generator(cfg.seed, 1), generator(cfg.seed, 2)
        z1 = gen1.standard_gamma(c.m, cfg.mc_samples) / c.m
        z2 = gen2.standard_gamma(c.m, cfg.mc_samples) / c.m
        return float(np.mean(g(rate(p2, z2 / (1.0 + c.rho1 * z1)))))

    def outer(z1):
        out = np.empty_like(z1)
        for i, zi in enumerate(z1):
            pe = p2.with_(rho=c.rho2 / (1.0 + c.rho1 * zi))
            out[i] = expect(pe.fading, lambda z, pe=pe: g(rate(pe, z)), cfg, _scales(pe)).value
        return out
    return expect(p2.fading, outer, cfg, (1.0 / c.rho1,)).value


@lru_cache(maxsize=64)
def _two_user_kernels(c: TwoUserConfig, cfg: EvalConfig):
    """Arrival-independent expectations: mean rates and psi terms per user."""
    k = c.n * c.theta
    p1 = LinkParams(c.n, c.rho1, c.m, c.eps1_user)
    p2 = LinkParams(c.n, c.rho2, c.m, c.eps2_user)
    e2 = c.eps2_user

    def clamp(r):
        return np.maximum(r, 0.0)

    def psi_g(r):
        return e2 + (1.0 - e2) * np.exp(-k * r)
    q = QoSConstraints(c.theta)
    mean1 = expect(p1.fading, lambda z: clamp(rate(p1, z)), cfg, _scales(p1)).value if c.rho1 > 0 else 0.0
    ec1 = ec_stochastic(p1, q, cfg).ec if c.rho1 > 0 else 0.0
    mean2_clean = expect(p2.fading, lambda z: clamp(rate(p2, z)), cfg, _scales(p2)).value
    psi2_clean = expect(p2.fading, lambda z: psi_g(rate(p2, z)), cfg, _psi_scales(p2, c.theta)).value
    mean2_int = _interfered_expectation(c, clamp, cfg)
    psi2_int = _interfered_expectation(c, psi_g, cfg)
    return mean1, ec1, mean2_clean, psi2_clean, mean2_int, psi2_int


def two_user_sic(c: TwoUserConfig, cfg: EvalConfig = DEFAULT_EVAL, damping: float = 0.5,
                 tol: float = 1e-8, max_iter: int = 500) -> TwoUserResult:
    """Coupled NBPs of a two-user SIC uplink, solved by damped fixed-point iteration."""
    mean1, ec1, m2c, psi2c, m2i, psi2i = _two_user_kernels(c, cfg)

    def update(x):
        nb1 = min(c.lambda1 / mean1, 1.0) if mean1 > 0 else 1.0
        e2 = x[0] * m2i + (1.0 - x[0]) * m2c
        nb2 = min(c.lambda2 / e2, 1.0) if e2 > 0 else 1.0
        return np.array([nb1, nb2])

    x = np.array([0.5, 0.5])
    resid = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        fx = update(x)
        resid = float(np.max(np.abs(fx - x)))
        if resid < tol:
            x = fx
            break
        x = (1.0 - damping) * x + damping * fx
    converged = resid < tol
    nb1, nb2 = float(x[0]), float(x[1])
    feasible = (mean1 > 0 and c.lambda1 <= mean1
                and c.lambda2 <= nb1 * m2i + (1.0 - nb1) * m2c)
    psi2 = nb1 * psi2i + (1.0 - nb1) * psi2c
    ec2 = -math.log(psi2) / (c.n * c.theta)
    pm = c.pm
    eee1 = ec1 / (nb1 * pm.zeta * c.rho1 + pm.pc)
    eee2 = ec2 / (nb2 * pm.zeta * c.rho2 + pm.pc)
    return TwoUserResult(nb1, nb2, ec1, ec2, eee1, eee2, feasible, converged, resid, it)


def _fig5(t, f, cfg):
    c = TwoUserConfig(
        rho1=float(db_to_linear(f["rho1_db"])), rho2=float(db_to_linear(f["rho2_db"])),
        eps1_user=f["eps_u1"], eps2_user=f["eps_u2"], lambda1=t["x"], lambda2=f["lam2"],
        n=f["n"], theta=f["theta"], pm=_pm(f), delta=f["delta"], m=f["m"])
    r = two_user_sic(c, cfg)
    if not r.converged:
        raise ConvergenceError(f"two-user fixed point stalled at residual {r.residual:g}")
    return [(t["x"], r.p_nb1, r.p_nb2, r.ec1, r.ec2, r.eee1, r.eee2, int(r.feasible),
             r.residual, r.iterations)]


def _arq_setup(f, eps_t, cfg):
    p = LinkParams(f["n"], float(db_to_linear(f["rho_db"])), f["m"], eps_t)
    return p, rate_moments(p, cfg)


def best_split_grid(p, q, pm, tm, eps_t, points, cfg, moments):
    """EBP-ARQ EEE maximised over a log grid of ``eps1`` then polished."""
    lo, hi = arq.eps1_domain(eps_t)

    def neg(u):
        a = arq.ArqParams.at_equality(math.exp(u), eps_t)
        return -arq.eee_arq(p, q, a, pm, tm, cfg, moments).eee2
    res = scan_minimize(neg, math.log(lo), math.log(hi), points=points, xatol=1e-8)
    return math.exp(res.arg_opt), -res.value_opt


def _fig7(t, f, cfg):
    eps_t = f["eps_t"]
    p, mom = _arq_setup(f, eps_t, cfg)
    q = QoSConstraints(t["x"], epsilon_t=eps_t)
    pm, tm = _pm(f), TrafficModel(f["lam"])
    e1 = dinkelbach_min_nbp(p, eps_t, f["lam"], cfg, moments=mom).arg_opt
    mp = arq.eee_arq(p, q, arq.ArqParams.at_equality(e1, eps_t), pm, tm, cfg, mom)
    eq = arq.eee_arq(p, q, arq.ArqParams.at_equality(math.sqrt(eps_t), eps_t), pm, tm, cfg, mom)
    e1_best, eee_best = best_split_grid(p, q, pm, tm, eps_t, int(f["eps1_grid_points"]), cfg, mom)
    plain = eee_ebp(p, q, pm, tm, cfg, EcMethod.STOCHASTIC)
    full = eee_full_buffer(p, q, pm, cfg, EcMethod.STOCHASTIC)
    return [(t["x"], e1, mp.p_nb_mod, mp.eee2, eq.eee2, eee_best, e1_best, plain.eee,
             full.eee, mp.bound, mp.tau_n)]


def _fig8(t, f, cfg):
    p = LinkParams(f["n"], float(db_to_linear(f["rho_db"])), f["m"], f["eps"])
    q = QoSConstraints(f["theta"])
    ec = ec_stochastic(p, q, cfg).ec
    ecs = ec_shannon(p, q, cfg).ec
    mean = expected_rate(p, cfg, clamp_nonneg=True).value
    mean_sh = rate_moments(p, cfg).shannon
    pm = _pm(f, t["pc"])
    pt = t["x"] * pm.zeta * p.rho + pm.pc
    return [(t["x"], t["pc"], t["x"] * mean, t["x"] * mean_sh, ec / pt, ecs / pt)]


def _fig9(t, f, cfg):
    eps_t = f["eps_t"]
    p, mom = _arq_setup(f, eps_t, cfg)
    lam = t["x"]
    pm, tm = _pm(f), TrafficModel(lam)
    nb = nbp(p, tm, cfg)
    res = dinkelbach_min_nbp(p, eps_t, lam, cfg, moments=mom)
    a = arq.ArqParams.at_equality(res.arg_opt, eps_t)
    nbm = arq.nbp_modified(arq.arq_rates(p, a, cfg, mom), lam)
    pt_full = pm.zeta * p.rho + pm.pc
    pt_ebp = nb.p_nb * pm.zeta * p.rho + pm.pc
    pt_arq = arq.power_arq(p.rho, nbm.p_nb, a, pm)
    return [(lam, pt_full, pt_ebp, pt_arq, nb.p_nb, nbm.p_nb, res.arg_opt,
             int(nb.feasible and nbm.stable))]


def _fig10(t, f, cfg):
    eps_t = t["eps_t"]
    p, mom = _arq_setup(f, eps_t, cfg)
    lam = t["x"]
    res = dinkelbach_min_nbp(p, eps_t, lam, cfg, moments=mom)
    a = arq.ArqParams.at_equality(res.arg_opt, eps_t)
    nbm = arq.nbp_modified(arq.arq_rates(p, a, cfg, mom), lam)
    return [(lam, eps_t, res.arg_opt, nbm.p_nb, arq.normalized_delay(a, nbm.p_nb, p.n),
             int(nbm.stable))]


# Task expansion: families outermost, the swept axis innermost.

def _tasks(spec: SweepSpec):
    f, g = spec.fixed, spec.grid
    if spec.fig == 1:
        return [{"n": n, "theta": th, "x": x} for n in f["n_values"] for th in f["thetas"] for x in g]
    if spec.fig == 2:
        return [{"m": m, "pc": pc, "x": x} for m in f["m_values"] for pc in f["pcs"] for x in g]
    if spec.fig == 3:
        return [{"Lambda": L, "x": x} for L in f["Lambdas"] for x in g]
    if spec.fig in (4, 6):
        return [{"Lambda": L, "mode": mode, "x": x} for L in f["Lambdas"]
                for mode in ("ebp", "full") for x in g]
    if spec.fig == 8:
        return [{"pc": pc, "x": x} for pc in f["pcs"] for x in g]
    if spec.fig == 10:
        return [{"eps_t": e, "x": x} for e in f["eps_targets"] for x in g]
    return [{"x": x} for x in g]


_FIG46_COLS = ("delta", "Lambda", "mode", "rho_opt_db", "eps", "theta", "p_nb", "ec", "eee",
               "feasible", "rho_shannon_db", "eee_shannon", "feasible_shannon")

_BUILDERS = {
    1: (_fig1, ("rho_db", "theta", "eee_closed", "eee_stochastic", "n")),
    2: (_fig2, ("theta", "pc", "m", "ec_fbl", "ec_shannon", "eee_fbl", "eee_shannon")),
    3: (_fig3, ("eps", "Lambda", "theta_ebp", "p_nb", "eee_ebp", "eee_full", "eee_shannon_ebp",
                "feasible")),
    4: (_fig46, _FIG46_COLS),
    5: (_fig5, ("lambda1", "p_nb1", "p_nb2", "ec1", "ec2", "eee1", "eee2", "feasible",
                "residual", "iterations")),
    6: (_fig46, _FIG46_COLS),
    7: (_fig7, ("theta", "eps1_minpower", "p_nb_mod", "eee_arq_minpower", "eee_arq_equal",
                "eee_arq_gridbest", "eps1_gridbest", "eee_ebp", "eee_full", "bound", "tau_n")),
    8: (_fig8, ("p_nb", "pc", "lam", "lam_shannon", "eee_fbl", "eee_shannon")),
    9: (_fig9, ("lam", "pt_full", "pt_ebp", "pt_arq", "p_nb", "p_nb_mod", "eps1", "feasible")),
    10: (_fig10, ("lam", "eps_t", "eps1", "p_nb_mod", "tau_n", "stable")),
}


def row_seed(seed: int, fig: int, index: int) -> int:
    """Per-row seed that depends only on the row's position, not on scheduling."""
    return int(np.random.SeedSequence([seed, fig, index]).generate_state(1, dtype=np.uint64)[0])


def _run_task(args):
    fig, task, fixed, cfg = args
    return _BUILDERS[fig][0](task, fixed, cfg)


def run_sweep(spec: SweepSpec, cfg: EvalConfig = DEFAULT_EVAL, threads: int = 1) -> Table:
    """Evaluate every grid row; output order is the task order whatever ``threads`` is."""
    if threads < 1:
        raise DomainError("threads must be >= 1")
    tasks = _tasks(spec)
    jobs = [(spec.fig, t, spec.fixed, replace(cfg, seed=row_seed(cfg.seed, spec.fig, i)))
            for i, t in enumerate(tasks)]
    if threads == 1:
        chunks = [_run_task(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            chunks = list(ex.map(_run_task, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    rows = [r for chunk in chunks for r in chunk]
    config = {"fig": spec.fig, "axis": spec.axis, "grid": list(spec.grid), **spec.fixed,
              "methods": list(spec.methods), "eval_method": cfg.method, "seed": cfg.seed,
              "mc_samples": cfg.mc_samples, "abs_tol": cfg.quad.abs_tol,
              "rel_tol": cfg.quad.rel_tol}
    notes = TWO_USER_NOTES if spec.fig == 5 else ()
    return Table(_BUILDERS[spec.fig][1], rows, config, notes)
