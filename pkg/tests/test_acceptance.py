"""Acceptance criteria, one test per criterion.

Each test records a ``CRITERION n: PASS|FAIL  detail`` line; conftest prints them
in the terminal summary, and running this file directly prints them too.
"""
from __future__ import annotations

import csv
import itertools
import math
import subprocess
import sys
from functools import lru_cache
from pathlib import Path

import mpmath
import numpy as np
import pytest

from eee_urllc import arq_ebp as arq
from eee_urllc.channel import MONTE_CARLO
from eee_urllc.cli import main as cli_main
from eee_urllc.effective_capacity import (
    ClosedFormTerms, EcMethod, QoSConstraints, delay_bound_symbols, ec_theorem1, j_kernel,
    j_kernel_drho, psi_lemma1, psi_stochastic,
)
from eee_urllc.eee_models import PowerModel, TrafficModel, eee_ebp, eee_full_buffer
from eee_urllc.fbl_rate import LinkParams, db_to_linear, rate_d2rho, rate_drho, rate_moments
from eee_urllc.optimizers import (
    _SplitObjective, dinkelbach_min_nbp, eee_theorem1, optimal_epsilon, optimal_power_theorem3,
    psi_of_epsilon,
)
from eee_urllc.oracles import finite_diff, grid_argopt_oracle
from eee_urllc.scenarios import default_spec, run_sweep

HERE = Path(__file__).resolve().parent
RESULTS: dict = {}

FIG1_RHO_DB = (-5.0, 20.0)
FIG1_FAMILIES = tuple(itertools.product((50, 500), (1e-3, 1e-2, 0.1)))
FIG7 = dict(n=500, rho_db=6.0, eps_t=1e-9, zeta=1.2, pc=0.2, lam=0.5)


def record(n: int, passed: bool, detail: str):
    RESULTS[n] = f"CRITERION {n}: {'PASS' if passed else 'FAIL'}  {detail}"
    return passed


def db(x):
    return float(db_to_linear(x))


def rel(a, b):
    return abs(a - b) / abs(b)


def argument_or_objective(arg, arg_ref, val, val_ref):
    """Optimizer agreement: 0.1% in the argument or 1e-6 in the objective."""
    return rel(arg, arg_ref) <= 1e-3 or abs(val - val_ref) <= 1e-6


def unimodal(values) -> bool:
    s = np.sign(np.diff(np.asarray(values, dtype=float)))
    s = s[s != 0]
    return bool(np.all(np.diff(s) <= 0) and np.count_nonzero(s[1:] != s[:-1]) <= 1)


# Shared sweeps ------------------------------------------------------------------

@lru_cache(maxsize=None)
def fig_table(fig: int, points: int):
    return run_sweep(default_spec(fig, points))


@lru_cache(maxsize=None)
def fig46_table(fig: int):
    spec = default_spec(fig, 9)
    return run_sweep(spec)


@lru_cache(maxsize=None)
def fig7_setup():
    p = LinkParams(FIG7["n"], db(FIG7["rho_db"]), 1.0, FIG7["eps_t"])
    mom = rate_moments(p)
    e1 = dinkelbach_min_nbp(p, FIG7["eps_t"], FIG7["lam"], moments=mom).arg_opt
    return p, mom, arq.ArqParams.at_equality(e1, FIG7["eps_t"])


def fig7_eval(theta: float):
    p, mom, a = fig7_setup()
    q = QoSConstraints(theta, epsilon_t=FIG7["eps_t"])
    pm, tm = PowerModel(FIG7["zeta"], FIG7["pc"]), TrafficModel(FIG7["lam"])
    return arq.eee_arq(p, q, a, pm, tm, moments=mom), eee_ebp(p, q, pm, tm, method=EcMethod.STOCHASTIC)


# 1 ---------------------------------------------------------------------------------

def criterion_1():
    d1 = delay_bound_symbols(1.0, QoSConstraints(0.01, Lambda=1e-5))
    d2 = delay_bound_symbols(1.0, QoSConstraints(0.1, Lambda=1e-5))
    return record(1, (d1, d2) == (1151, 115), f"delta(theta=0.01)={d1}, delta(theta=0.1)={d2}")


# 2 ---------------------------------------------------------------------------------

def fig1_oracle_rows():
    with open(HERE / "data" / "fig1_mc_oracle.csv") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(lines)]


def criterion_2():
    rows = fig1_oracle_rows()
    worst, bad, worst_at = 0.0, 0, None
    by_theta: dict = {}
    for r in rows:
        p = LinkParams(int(r["n"]), db(r["rho_db"]), 1.0, 1e-4)
        ec = ec_theorem1(p, QoSConstraints(r["theta"])).ec
        d = rel(ec, r["ec"])
        bad += d > 0.02
        by_theta.setdefault(r["theta"], []).append(d)
        if d > worst:
            worst, worst_at = d, (r["rho_db"], r["theta"], int(r["n"]))
    medians = ", ".join(f"theta={k:g}: {np.median(v):.1%}" for k, v in sorted(by_theta.items()))
    return record(2, bad == 0, f"{bad}/{len(rows)} cells above 2%; max rel EC error {worst:.3g} at "
                               f"(rho_db, theta, n)={worst_at}; median error {medians}")


# 3 ---------------------------------------------------------------------------------

def criterion_3():
    worst3 = worst1 = 0.0
    bad = 0
    by_theta: dict = {}
    for r in fig1_oracle_rows():
        p = LinkParams(int(r["n"]), db(r["rho_db"]), 1.0, 1e-4)
        exact = psi_stochastic(p, QoSConstraints(r["theta"])).value
        e3 = rel(psi_lemma1(p, ClosedFormTerms.from_params(p, r["theta"], 3)), exact)
        e1 = rel(psi_lemma1(p, ClosedFormTerms.from_params(p, r["theta"], 1)), exact)
        bad += e3 > 1e-3
        worst3, worst1 = max(worst3, e3), max(worst1, e1)
        by_theta[r["theta"]] = max(by_theta.get(r["theta"], 0.0), e3)
    per = ", ".join(f"theta={k:g}: {v:.1e}" for k, v in sorted(by_theta.items()))
    return record(3, bad == 0, f"{bad} cells with 3-term psi rel error > 1e-3; max {worst3:.3e} "
                               f"(per theta {per}); 1-term max {worst1:.3e} (reported only)")


# 4 ---------------------------------------------------------------------------------

def criterion_4():
    rhos = np.geomspace(db(FIG1_RHO_DB[0]), db(FIG1_RHO_DB[1]), 200)
    pm = PowerModel(1.2, 1.2)
    violations = []
    for n, theta in FIG1_FAMILIES:
        q = QoSConstraints(theta)
        closed = [eee_theorem1(LinkParams(n, float(r), 1.0, 1e-4), q, pm) for r in rhos]
        stoch = [eee_full_buffer(LinkParams(n, float(r), 1.0, 1e-4), q, pm,
                                 method=EcMethod.STOCHASTIC).eee for r in rhos]
        for name, vals in (("closed", closed), ("stochastic", stoch)):
            if not unimodal(vals):
                violations.append((n, theta, name))
    return record(4, not violations, f"{len(violations)} non-unimodal rows of {2 * len(FIG1_FAMILIES)} "
                                     f"(200-point log grids over [-5, 20] dB) {violations or ''}")


# 5 ---------------------------------------------------------------------------------

def _fig6_thetas():
    lam = 1.0
    return [(L, -math.log(L) / (lam * d)) for L in (1e-2, 1e-3) for d in (100.0, 1000.0, 10000.0)]


def sigma_decreasing(trace, tol) -> bool:
    """Every non-terminal step lowers sigma strictly; the terminal step (|F| <= tol) may not raise it.

    sigma moves by F / B per step, so a step that reaches F = 0 leaves it unchanged.
    """
    for (_, s0, _), (_, s1, f) in zip(trace, trace[1:]):
        if not (s1 < s0 or (abs(f) <= tol and s1 <= s0)):
            return False
    return True


def criterion_5():
    fails, notes = [], []
    # Optimal power against an exhaustive search of the same objective.
    cases = [(n, th, 1.2, 1e3) for n, th in FIG1_FAMILIES]
    cases += [(500, th, 0.2, db(13.0)) for _, th in _fig6_thetas()]
    worst = 0.0
    for n, th, pc, rho_max in cases:
        p, q, pm = LinkParams(n, 1.0, 1.0, 1e-4), QoSConstraints(th), PowerModel(1.2, pc)
        res = optimal_power_theorem3(p, q, pm, rho_max)
        arg, val = grid_argopt_oracle(lambda r: eee_theorem1(p.with_(rho=r), q, pm),
                                      (rho_max * 1e-6, rho_max), 2000, maximize=True, log=True)
        worst = max(worst, rel(res.arg_opt, arg))
        if not argument_or_objective(res.arg_opt, arg, res.value_opt, val):
            fails.append(("power", n, th, pc))
    notes.append(f"rho* worst rel {worst:.1e}")
    # Optimal error probability.
    worst = 0.0
    eps_cases = [(n, th, r) for n, th in FIG1_FAMILIES for r in (-5.0, 0.0, 5.0, 10.0, 20.0)]
    eps_cases += [(500, th, r) for _, th in _fig6_thetas() for r in (0.0, 6.0, 13.0)]
    for n, th, rdb in eps_cases:
        p, q = LinkParams(n, db(rdb), 1.0, 1e-4), QoSConstraints(th)
        res = optimal_epsilon(p, q, clip=False)
        psi = psi_of_epsilon(p, q)
        arg, val = grid_argopt_oracle(psi, (1e-12, 0.5), 10_000, log=True)
        worst = max(worst, rel(res.arg_opt, arg))
        if not argument_or_objective(res.arg_opt, arg, res.value_opt, val):
            fails.append(("eps", n, th, rdb))
    notes.append(f"eps* worst rel {worst:.1e}")
    # Dinkelbach against a grid of the modified NBP, with its convergence profile.
    worst, max_it, nondecr = 0.0, 0, 0
    dk_cases = [(FIG7["eps_t"], FIG7["lam"])]
    dk_cases += [(e, lam) for e in (1e-9, 1e-5) for lam in np.linspace(0.1, 1.5, 8)]
    for eps_t, lam in dk_cases:
        p = LinkParams(500, db(6.0), 1.0, eps_t)
        mom = rate_moments(p)
        res = dinkelbach_min_nbp(p, eps_t, float(lam), tol=1e-8, moments=mom)
        obj = _SplitObjective(mom, eps_t, float(lam))
        arg, val = grid_argopt_oracle(obj.p_nb, arq.eps1_domain(eps_t), 10_000, log=True)
        worst = max(worst, rel(res.arg_opt, arg))
        decreasing = sigma_decreasing(res.trace, 1e-8)
        max_it = max(max_it, res.iterations)
        nondecr += not decreasing
        if not (res.converged and res.iterations <= 15 and decreasing
                and argument_or_objective(res.arg_opt, arg, res.value_opt, val)):
            fails.append(("dinkelbach", eps_t, float(lam)))
    notes.append(f"eps1* worst rel {worst:.1e}, max iterations {max_it}, "
                 f"{nondecr} runs with non-decreasing sigma")
    return record(5, not fails, "; ".join(notes) + (f"; failures {fails}" if fails else ""))


# 6 ---------------------------------------------------------------------------------

def criterion_6():
    r6, _ = fig7_eval(1e-6)
    bound = r6.bound
    thetas = np.geomspace(1e-4, 1.0, 25)
    above = [float(t) for t in thetas if fig7_eval(float(t))[0].eee2 > bound]
    gap = 1.0 - r6.eee2 / bound
    ok = abs(bound / 1.07 - 1.0) <= 0.10 and not above and 0.0 <= gap <= 0.01
    return record(6, ok, f"bound {bound:.4f} bpcu/W (target 1.07 +/- 10%), eta_ee2 above bound at "
                          f"{len(above)} of {thetas.size} thetas, gap at theta=1e-6 {gap:.3%}")


# 7 ---------------------------------------------------------------------------------

def criterion_7():
    t = fig_table(7, 31)
    theta = t.column("theta")
    ratio = t.column("eee_arq_minpower") / t.column("eee_ebp")
    sel = theta >= 0.1
    bad = sel & ~(ratio >= 1.8)
    neg = sel & (t.column("eee_ebp") < 0)
    return record(7, not bad.any(),
                  f"eta_ee2/eta_ee(EBP) < 1.8 at {int(bad.sum())}/{int(sel.sum())} rows with theta >= 0.1 "
                  f"(min {ratio[sel].min():.3f}); plain EBP EC negative at {int(neg.sum())} of them; "
                  f"ratio {ratio[sel & ~neg].min():.2f}..{ratio[sel & ~neg].max():.2f} where positive")


# 8 ---------------------------------------------------------------------------------

def criterion_8():
    t = fig_table(10, 41)
    tau = t.column("tau_n")
    return record(8, bool(np.all(tau >= 1.0) and np.all(tau <= 1.03)),
                  f"tau_n in [{tau.min():.5f}, {tau.max():.5f}] over {tau.size} rows")


# 9 ---------------------------------------------------------------------------------

def _rate_mp(n, eps, z):
    qi = -mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(eps) - 1)
    z = mpmath.mpf(z)

    def f(r):
        s = r * z
        return mpmath.log(1 + s, 2) - mpmath.sqrt((1 - (1 + s) ** -2) / n) * qi / mpmath.log(2)
    return f


def validity_grid():
    for n, eps in itertools.product((100, 500), (1e-3, 1e-9)):
        for rho, z in itertools.product(np.geomspace(0.1, 30.0, 13), np.geomspace(0.1, 10.0, 13)):
            if rho * z >= 0.1:
                yield n, eps, float(rho), float(z)


def criterion_9():
    bad, notes = [], []
    # J' against differences of J.
    worst = 0.0
    for rho, th in itertools.product((0.5, 2.0, 10.0), (1e-3, 1e-2, 0.1)):
        p, q = LinkParams(500, rho, 1.0, 1e-4), QoSConstraints(th)
        fd = finite_diff(lambda r: j_kernel(p.with_(rho=r), q), rho)
        worst = max(worst, rel(j_kernel_drho(p, q), fd))
    notes.append(f"J' {worst:.1e}")
    bad += ["J'"] if worst > 1e-5 else []
    # Rate slope and curvature against 30-digit differences of a restated rate.
    w1 = w2 = 0.0
    positive = []
    with mpmath.workdps(30):
        for n, eps, rho, z in validity_grid():
            p, f, x = LinkParams(n, rho, 1.0, eps), _rate_mp(n, eps, z), mpmath.mpf(rho)
            d2 = float(rate_d2rho(p, z))
            w1 = max(w1, rel(float(rate_drho(p, z)), float(mpmath.diff(f, x))))
            w2 = max(w2, rel(d2, float(mpmath.diff(f, x, 2))))
            if d2 >= 0:
                positive.append(rho * z)
    notes.append(f"dr/drho {w1:.1e}, d2r/drho2 {w2:.1e}")
    bad += ["dr/drho"] if w1 > 1e-5 else []
    bad += ["d2r/drho2"] if w2 > 1e-4 else []
    if positive:
        bad.append("curvature sign")
        notes.append(f"d2r/drho2 >= 0 at {len(positive)} validity-grid cells (SNR up to {max(positive):.3f})")
    # Derivatives of the mean rate and of kappa in eps1, relative steps.
    p = LinkParams(500, db(6.0), 1.0, FIG7["eps_t"])
    mom = rate_moments(p)
    lo, hi = arq.eps1_domain(FIG7["eps_t"])
    wk = 0.0
    for e1 in np.geomspace(lo * 1.01, hi * 0.99, 25):
        e1 = float(e1)
        k, dk, d2k = arq.kappa_derivatives(mom, e1, FIG7["eps_t"])
        dr, d2r = arq._rate_deps(mom, e1)
        kap = lambda e: arq.kappa_derivatives(mom, e, FIG7["eps_t"])[0]
        checks = ((dr, finite_diff(mom.mean_rate, e1, 1, h=1e-5 * e1), 1e-5),
                  (d2r, finite_diff(mom.mean_rate, e1, 2, h=1e-3 * e1), 1e-4),
                  (dk, finite_diff(kap, e1, 1, h=1e-5 * e1), 1e-5),
                  (d2k, finite_diff(kap, e1, 2, h=1e-3 * e1), 1e-4))
        for a, fd, tol in checks:
            e = rel(a, fd)
            wk = max(wk, e / tol)
            if e > tol:
                bad.append(("eps1 derivative", e1))
    notes.append(f"eps1 derivatives worst error/tolerance {wk:.1e}")
    rep = arq.kappa_curvature_check(p, FIG7["eps_t"], FIG7["lam"], points=1000, moments=mom)
    notes.append(f"d2kappa < 0 violations {rep.concavity_violations}/1000")
    if rep.concavity_violations:
        bad.append("kappa concavity")
    return record(9, not bad, "; ".join(notes))


# 10 --------------------------------------------------------------------------------

class Orderings:
    def __init__(self):
        self.failed, self.lines = [], []

    def check(self, name, lhs, rhs, mask=None):
        """Pointwise ``lhs >= rhs``."""
        lhs, rhs = np.asarray(lhs, float), np.asarray(rhs, float)
        m = np.ones(lhs.shape, bool) if mask is None else np.asarray(mask, bool)
        n_bad = int(np.count_nonzero(lhs[m] < rhs[m]))
        if n_bad:
            self.failed.append(f"{name} ({n_bad}/{int(m.sum())})")
        return n_bad

    def monotone(self, name, values, increasing):
        v = np.asarray(values, float)
        v = v[np.isfinite(v)]
        return self.check(name, v[1:], v[:-1]) if increasing else self.check(name, v[:-1], v[1:])


def criterion_10():
    o = Orderings()
    gaps = []
    t2 = fig_table(2, 21)
    for m, pc in itertools.product((1.0, 2.0), (0.2, 1.0)):
        s = t2.where(m=m, pc=pc)
        o.check(f"fig2 Shannon >= FBL m={m:g} pc={pc:g}", s.column("eee_shannon"), s.column("eee_fbl"))
        o.monotone(f"fig2 EEE decreasing in theta m={m:g} pc={pc:g}", s.column("eee_fbl"), False)
        gaps.append(float(np.max(1 - s.column("eee_fbl") / s.column("eee_shannon"))))
    for m in (1.0, 2.0):
        o.check(f"fig2 EEE decreasing in P_c m={m:g}", t2.where(m=m, pc=0.2).column("eee_fbl"),
                t2.where(m=m, pc=1.0).column("eee_fbl"))
    for pc in (0.2, 1.0):
        o.check(f"fig2 EEE increasing in m pc={pc:g}", t2.where(m=2.0, pc=pc).column("eee_fbl"),
                t2.where(m=1.0, pc=pc).column("eee_fbl"))

    t3 = fig_table(3, 21)
    for L in (1e-2, 1e-3):
        s = t3.where(Lambda=L)
        ok = s.column("feasible") == 1
        o.check(f"fig3 EBP >= full Lambda={L:g}", s.column("eee_ebp"), s.column("eee_full"), ok)
        o.check(f"fig3 Shannon >= FBL Lambda={L:g}", s.column("eee_shannon_ebp"), s.column("eee_ebp"), ok)

    infeasible = 0
    ebp_gap = []
    for fig in (4, 6):
        t = fig46_table(fig)
        for L in (1e-2, 1e-3):
            e, f = t.where(Lambda=L, mode="ebp"), t.where(Lambda=L, mode="full")
            ok = (e.column("feasible") == 1) & (f.column("feasible") == 1)
            infeasible += int(np.count_nonzero(e.column("feasible") == 0) + np.count_nonzero(f.column("feasible") == 0))
            o.check(f"fig{fig} EBP >= full Lambda={L:g}", e.column("eee"), f.column("eee"), ok)
            if ok.any():
                ebp_gap.append(float(np.max(e.column("eee")[ok] / f.column("eee")[ok] - 1)))
            for mode, s in (("ebp", e), ("full", f)):
                feas = s.column("feasible") == 1
                both = feas & (s.column("feasible_shannon") == 1)
                o.check(f"fig{fig} Shannon >= FBL {mode} Lambda={L:g}", s.column("eee_shannon"),
                        s.column("eee"), both)
                o.monotone(f"fig{fig} EEE increasing in delta {mode} Lambda={L:g}",
                           np.where(feas, s.column("eee"), np.nan), True)
                o.monotone(f"fig{fig} rho* increasing in delta {mode} Lambda={L:g}",
                           np.where(feas, s.column("rho_opt_db"), np.nan), True)
        for mode in ("ebp", "full"):
            a, b = t.where(Lambda=1e-3, mode=mode), t.where(Lambda=1e-2, mode=mode)
            ok = (a.column("feasible") == 1) & (b.column("feasible") == 1)
            o.check(f"fig{fig} rho* decreasing in Lambda {mode}", a.column("rho_opt_db"),
                    b.column("rho_opt_db"), ok)

    t7 = fig_table(7, 31)
    o.check("fig7 EBP >= full", t7.column("eee_ebp"), t7.column("eee_full"))
    o.monotone("fig7 EEE decreasing in theta", t7.column("eee_arq_minpower"), False)

    t8 = fig_table(8, 21)
    for pc in (0.2, 1.0):
        s = t8.where(pc=pc)
        o.check(f"fig8 Shannon >= FBL pc={pc:g}", s.column("eee_shannon"), s.column("eee_fbl"))
        o.monotone(f"fig8 EEE decreasing in P_nb pc={pc:g}", s.column("eee_fbl"), False)
    o.check("fig8 EEE decreasing in P_c", t8.where(pc=0.2).column("eee_fbl"), t8.where(pc=1.0).column("eee_fbl"))

    t9 = fig_table(9, 21)
    ok = t9.column("feasible") == 1
    o.check("fig9 P_t EBP >= EBP-ARQ", t9.column("pt_ebp"), t9.column("pt_arq"), ok)
    o.check("fig9 P_t full >= EBP", t9.column("pt_full"), t9.column("pt_ebp"), ok)
    saving = float(np.max(1 - t9.column("pt_arq")[ok] / t9.column("pt_ebp")[ok]))

    t10 = fig_table(10, 41)
    o.check("fig10 tau_n >= 1", t10.column("tau_n"), np.ones(len(t10.rows)))

    detail = (f"gaps: Shannon over FBL up to {max(gaps):.1%}, EBP over full up to "
              f"{max(ebp_gap) if ebp_gap else math.nan:.1%}, ARQ power saving up to {saving:.1%}; "
              f"{infeasible} infeasible fig4/6 cells skipped")
    if o.failed:
        detail += "; violated: " + ", ".join(o.failed)
    return record(10, not o.failed, detail)


# 11 --------------------------------------------------------------------------------

def _sweep_bytes(tmp: Path, tag: str, args, threads: int, subprocess_run: bool = False) -> bytes:
    out = tmp / f"{tag}-{threads}-{int(subprocess_run)}.csv"
    argv = ["sweep", *args, "--threads", str(threads), "--out", str(out)]
    if subprocess_run:
        subprocess.run([sys.executable, "-m", "eee_urllc", *argv], check=True, capture_output=True)
    else:
        assert cli_main(argv) == 0
    return out.read_bytes()


def criterion_11(tmp: Path):
    runs = {
        "fig1-mc": ["--fig", "1", "--points", "6", "--eval", MONTE_CARLO, "--mc-samples", "20000",
                    "--seed", "7"],
        "fig10": ["--fig", "10", "--points", "5", "--seed", "7"],
    }
    mismatched = []
    for tag, args in runs.items():
        ref = _sweep_bytes(tmp, tag, args, 1)
        others = [_sweep_bytes(tmp, tag, args, 1), _sweep_bytes(tmp, tag, args, 2),
                  _sweep_bytes(tmp, tag, args, 3), _sweep_bytes(tmp, tag, args, 2, subprocess_run=True)]
        if any(o != ref for o in others):
            mismatched.append(tag)
    return record(11, not mismatched, f"{len(runs)} sweeps x 5 runs (threads 1, 1, 2, 3, fresh process): "
                                      f"{'all byte-identical' if not mismatched else 'differ: ' + str(mismatched)}")


# pytest entry points -------------------------------------------------------------------

def test_criterion_1_delay_bound_example():
    assert criterion_1(), RESULTS[1]


@pytest.mark.slow
def test_criterion_2_closed_form_vs_monte_carlo():
    assert criterion_2(), RESULTS[2]


def test_criterion_3_three_term_truncation():
    assert criterion_3(), RESULTS[3]


def test_criterion_4_unimodal_eee():
    assert criterion_4(), RESULTS[4]


@pytest.mark.slow
def test_criterion_5_optimizers_vs_grid():
    assert criterion_5(), RESULTS[5]


def test_criterion_6_throughput_bound():
    assert criterion_6(), RESULTS[6]


@pytest.mark.slow
def test_criterion_7_arq_gain():
    assert criterion_7(), RESULTS[7]


def test_criterion_8_latency_ceiling():
    assert criterion_8(), RESULTS[8]


def test_criterion_9_derivatives():
    assert criterion_9(), RESULTS[9]


@pytest.mark.slow
def test_criterion_10_orderings():
    assert criterion_10(), RESULTS[10]


@pytest.mark.slow
def test_criterion_11_determinism(tmp_path):
    assert criterion_11(tmp_path), RESULTS[11]


if __name__ == "__main__":
    import tempfile
    import time
    for i in range(1, 12):
        t0 = time.time()
        if i == 11:
            with tempfile.TemporaryDirectory() as d:
                criterion_11(Path(d))
        else:
            globals()[f"criterion_{i}"]()
        print(RESULTS[i], f"[{time.time() - t0:.1f} s]", flush=True)
