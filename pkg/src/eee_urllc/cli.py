"""Command-line front end.

Exit codes: 0 success, 1 failed validation checks, 2 invalid arguments,
3 infeasible problem, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import arq_ebp as arq
from .channel import MONTE_CARLO, QUADRATURE, EvalConfig
from .effective_capacity import EcMethod, QoSConstraints, delay_bound, effective_capacity
from .eee_models import BufferMode, PowerModel, TrafficModel, eee_ebp, eee_full_buffer
from .errors import ConvergenceError, DomainError, InfeasibleError
from .fbl_rate import LinkParams, db_to_linear, rate_moments
from .math_kernels import QuadratureConfig
from .optimizers import (
    dinkelbach_min_nbp, maximize_eee_constrained, optimal_epsilon, optimal_power_theorem3,
)
from .scenarios import FIGURES, Table, default_spec, run_sweep

log = logging.getLogger("eee_urllc")

EXIT_OK, EXIT_CHECKS, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NONCONVERGED = 0, 1, 2, 3, 4
THREADS_ENV = "EEE_THREADS"

DEFAULTS = {
    "n": 500, "rho_db": 3.0, "m": 1.0, "eps": 1e-4, "theta": 0.01, "delta": 500.0,
    "Lambda": 1e-2, "eps_target": 1e-4, "lam": 1.0, "zeta": 1.2, "pc": 0.2,
    "rho_max_db": 13.0, "buffer": "full", "ec_method": "stochastic", "eval": QUADRATURE,
    "seed": 0, "mc_samples": 1_000_000,
}

PRESETS = {
    "fig1": {"n": 500, "m": 1.0, "eps": 1e-4, "pc": 1.2, "zeta": 1.2, "theta": 0.01},
    "fig2": {"n": 500, "rho_db": 3.0, "eps": 1e-4},
    "fig3": {"n": 500, "rho_db": 10.0, "pc": 0.2, "zeta": 1.2, "lam": 1.0, "delta": 500.0},
    "fig4": {"n": 500, "pc": 0.2, "zeta": 1.2, "lam": 1.0, "rho_max_db": 13.0, "eps_target": 1e-3},
    "fig5": {"n": 500, "theta": 0.01, "pc": 0.2, "zeta": 1.2, "delta": 500.0},
    "fig6": {"n": 500, "pc": 0.2, "zeta": 1.2, "lam": 1.0, "rho_max_db": 13.0, "eps_target": 1e-4},
    "fig7": {"n": 500, "rho_db": 6.0, "eps": 1e-9, "eps_target": 1e-9, "pc": 0.2, "zeta": 1.2,
             "lam": 0.5},
    "fig8": {"n": 500, "rho_db": 3.0, "eps": 1e-4, "theta": 0.01},
    "fig9": {"n": 500, "rho_db": 6.0, "eps": 1e-9, "eps_target": 1e-9, "theta": 0.01, "pc": 0.2,
             "zeta": 1.2},
    "fig10": {"n": 500, "rho_db": 6.0, "eps_target": 1e-9, "theta": 0.01, "pc": 0.2, "zeta": 1.2},
}

# Flag name -> (config key, type)
_PARAMS = {
    "n": ("n", int), "rho-db": ("rho_db", float), "m": ("m", float), "eps": ("eps", float),
    "theta": ("theta", float), "delta": ("delta", float), "Lambda": ("Lambda", float),
    "eps-target": ("eps_target", float), "lambda": ("lam", float), "zeta": ("zeta", float),
    "pc": ("pc", float), "rho-max-db": ("rho_max_db", float),
    "seed": ("seed", int), "mc-samples": ("mc_samples", int),
}
_TYPES = {key: typ for key, typ in _PARAMS.values()}
_TYPES.update({"buffer": str, "ec_method": str, "eval": str})


class UsageError(Exception):
    pass


# Configuration ----------------------------------------------------------------

def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, value):
    typ = _TYPES.get(key)
    if typ is None:
        return _literal(value)
    try:
        return typ(float(value)) if typ is int and isinstance(value, str) and "e" in value.lower() else typ(value)
    except (TypeError, ValueError):
        raise UsageError(f"bad value for {key}: {value!r}") from None


def _literal(value):
    if not isinstance(value, str):
        return value
    try:
        return ast.literal_eval(value)
    except (ValueError, SyntaxError):
        return value


def resolve(args: argparse.Namespace) -> dict:
    """Flags override the config file, which overrides the preset and built-in defaults."""
    cfg = dict(DEFAULTS)
    if args.preset:
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
        cfg.update(PRESETS[args.preset])
    extra = {}
    if args.config:
        for k, v in read_config_file(args.config).items():
            if k in cfg:
                cfg[k] = _coerce(k, v)
            else:
                extra[k] = _literal(v)
    explicit = {k for k in read_config_file(args.config)} if args.config else set()
    for key in [k for k, _ in _PARAMS.values()] + ["buffer", "ec_method", "eval"]:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
            explicit.add(key)
    cfg["_extra"] = extra
    cfg["_explicit"] = explicit
    return cfg


def eval_config(c: dict) -> EvalConfig:
    return EvalConfig(method=c["eval"], mc_samples=int(c["mc_samples"]), seed=int(c["seed"]),
                      quad=QuadratureConfig())


def link(c: dict, eps=None) -> LinkParams:
    return LinkParams(int(c["n"]), float(db_to_linear(c["rho_db"])), float(c["m"]),
                      float(c["eps"] if eps is None else eps))


def qos(c: dict, theta=None) -> QoSConstraints:
    return QoSConstraints(float(c["theta"] if theta is None else theta), float(c["delta"]),
                          float(c["Lambda"]), float(c["eps_target"]))


def validate_params(c: dict) -> None:
    """Build every domain object once so bad inputs fail before any computation."""
    eval_config(c)
    link(c)
    link(c, c["eps_target"])
    qos(c)
    PowerModel(c["zeta"], c["pc"])
    TrafficModel(c["lam"], BufferMode(c["buffer"]))
    EcMethod(c["ec_method"])


# Output -----------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _public(config: dict) -> dict:
    return {k: v for k, v in config.items() if not k.startswith("_")}


def write_table(table: Table, stream, extra_comments=()) -> None:
    """Comma-separated, 17 significant digits, LF endings, ``#`` comment header."""
    stream.write("# config: " + json.dumps(_public(table.config), sort_keys=True, default=str) + "\n")
    for note in table.notes:
        stream.write(f"# note: {note}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    for c in extra_comments:
        stream.write(f"# {c}\n")


def emit(table: Table, out: str | None, extra_comments=()) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            write_table(table, fh, extra_comments)
    else:
        buf = io.StringIO()
        write_table(table, buf, extra_comments)
        sys.stdout.write(buf.getvalue())


# Subcommands ------------------------------------------------------------------

def cmd_ec(args, c):
    p, q, cfg = link(c), qos(c), eval_config(c)
    methods = list(EcMethod) if args.method == "all" else [EcMethod(args.method)]
    if p.m != 1.0 and EcMethod.THEOREM1 in methods:
        if args.method != "all":
            raise UsageError("the theorem1 closed form needs m = 1")
        methods.remove(EcMethod.THEOREM1)
    res = {m: effective_capacity(p, q, cfg, m) for m in methods}
    rows = [(m.value, r.ec, r.psi, r.est_error, r.converged) for m, r in res.items()]
    comments = []
    keys = list(res)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            dev = abs(res[a].ec - res[b].ec) / abs(res[b].ec) if res[b].ec else math.inf
            comments.append(f"reldev {a.value} vs {b.value}: {dev:.6g}")
    if c["theta"] > 0 and res[keys[0]].ec > 0:
        comments.append(f"delay bound ({keys[0].value}): {delay_bound(res[keys[0]].ec, q):.6g}")
    emit(Table(("method", "ec", "psi", "est_error", "converged"), rows, _public(c)), args.out, comments)
    return EXIT_OK if all(r.converged for r in res.values()) else EXIT_NONCONVERGED


def cmd_eee(args, c):
    p, q, cfg, pm = link(c), qos(c), eval_config(c), PowerModel(c["zeta"], c["pc"])
    mode = BufferMode(c["buffer"])
    if mode is BufferMode.FULL_BUFFER:
        r = eee_full_buffer(p, q, pm, cfg, c["ec_method"])
    else:
        r = eee_ebp(p, q, pm, TrafficModel(c["lam"], mode), cfg, c["ec_method"])
    emit(Table(("eee", "ec", "p_nb", "p_total", "feasible"),
               [(r.eee, r.ec, r.p_nb, r.p_total, r.feasible)], _public(c)), args.out)
    return EXIT_OK if r.feasible else EXIT_INFEASIBLE


def cmd_opt_power(args, c):
    p, q, cfg, pm = link(c), qos(c), eval_config(c), PowerModel(c["zeta"], c["pc"])
    r = optimal_power_theorem3(p, q, pm, float(db_to_linear(c["rho_max_db"])), cfg)
    rows = [(r.arg_opt, 10 * math.log10(r.arg_opt), r.value_opt, r.iterations, r.converged,
             r.info.get("boundary", False))]
    emit(Table(("rho_opt", "rho_opt_db", "eee_opt", "iterations", "converged", "boundary"),
               rows, _public(c)), args.out)
    return EXIT_OK if r.converged or r.info.get("boundary") else EXIT_NONCONVERGED


def cmd_opt_eps(args, c):
    p, q, cfg = link(c), qos(c), eval_config(c)
    r = optimal_epsilon(p, q, cfg)
    rows = [(r.arg_opt, r.info["eps_star"], r.value_opt, r.info["clipped"], r.converged)]
    emit(Table(("eps_opt", "eps_star", "psi", "clipped", "converged"), rows, _public(c)), args.out)
    return EXIT_OK if r.converged else EXIT_NONCONVERGED


def cmd_opt_constrained(args, c):
    p, cfg, pm = link(c, c["eps_target"]), eval_config(c), PowerModel(c["zeta"], c["pc"])
    q = qos(c, 0.0)
    tm = TrafficModel(c["lam"], BufferMode(c["buffer"]))
    best, opt = maximize_eee_constrained(p, q, pm, tm, float(db_to_linear(c["rho_max_db"])),
                                         cfg, c["ec_method"], args.points)
    if best is None:
        raise InfeasibleError("no power level in (0, rho_max] meets C_e >= lambda")
    r = best.result
    rows = [(best.rho, 10 * math.log10(best.rho), best.eps, best.theta, r.p_nb, r.ec, r.eee,
             r.p_total, not opt.info["violations"])]
    emit(Table(("rho_opt", "rho_opt_db", "eps", "theta", "p_nb", "ec", "eee", "p_total",
                "constraints_ok"), rows, _public(c)), args.out)
    return EXIT_OK if opt.converged else EXIT_NONCONVERGED


def _split(c, args, p, cfg, mom):
    eps_t = float(c["eps_target"])
    if args.eps1 is not None:
        return arq.ArqParams.at_equality(args.eps1, eps_t)
    res = dinkelbach_min_nbp(p, eps_t, c["lam"], cfg, moments=mom)
    return arq.ArqParams.at_equality(res.arg_opt, eps_t)


def cmd_arq(args, c):
    cfg = eval_config(c)
    p = link(c, c["eps_target"])
    mom = rate_moments(p, cfg)
    a = _split(c, args, p, cfg, mom)
    pm, tm = PowerModel(c["zeta"], c["pc"]), TrafficModel(c["lam"])
    r = arq.eee_arq(p, qos(c), a, pm, tm, cfg, mom)
    rows = [(a.eps1, a.eps2, r.p_nb_mod, r.ec2, r.p_total, r.eee2, r.bound, r.tau_n,
             r.stable, r.degenerate)]
    emit(Table(("eps1", "eps2", "p_nb_mod", "ec2", "p_total", "eee2", "bound", "tau_n", "stable",
                "degenerate"), rows, _public(c)), args.out)
    return EXIT_OK if r.stable else EXIT_INFEASIBLE


def cmd_dinkelbach(args, c):
    cfg = eval_config(c)
    p = link(c, c["eps_target"])
    r = dinkelbach_min_nbp(p, float(c["eps_target"]), c["lam"], cfg, tol=args.tol,
                           max_iter=args.max_iter)
    if args.trace:
        rows = [(k, e1, s, f) for k, (e1, s, f) in enumerate(r.trace)]
        table = Table(("iteration", "eps1", "sigma", "F"), rows, _public(c))
    else:
        table = Table(("eps1", "p_nb_mod", "iterations"), [(r.arg_opt, r.value_opt, r.iterations)],
                      _public(c))
    emit(table, args.out, ["converged" if r.converged else "not converged"])
    return EXIT_OK if r.converged else EXIT_NONCONVERGED


# Point-command keys whose sweep parameter goes by another name.
_SWEEP_KEYS = {"eps_target": "eps_t"}


def _sweep_overrides(spec, c, args):
    changes = {}
    for k in c["_explicit"]:
        fk = _SWEEP_KEYS.get(k, k)
        if fk in spec.fixed:
            changes[fk] = c[k]
    for k, v in c["_extra"].items():
        if k in spec.fixed:
            changes[k] = v
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if k not in spec.fixed:
            raise UsageError(f"figure {spec.fig} has no parameter {k!r}; known: {sorted(spec.fixed)}")
        changes[k] = _literal(v.strip())
    return spec.with_fixed(**changes) if changes else spec


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be >= 1")
    return n


def cmd_sweep(args, c):
    spec = _sweep_overrides(default_spec(args.fig, args.points), c, args)
    threads = args.threads if args.threads is not None else default_threads()
    table = run_sweep(spec, eval_config(c), threads)
    emit(table, args.out)
    return EXIT_OK


def cmd_validate(args, c):
    from .validation import run_battery
    reports = run_battery(eval_config(c), samples=args.samples, seed=int(c["seed"]) or 12345)
    rows = [(r.quantity, r.primary, r.oracle, r.deviation, r.tolerance, r.kind, r.passed)
            for r in reports]
    failed = sum(not r.passed for r in reports)
    emit(Table(("quantity", "primary", "oracle", "deviation", "tolerance", "kind", "pass"), rows,
               _public(c)), args.out, [f"{len(reports) - failed}/{len(reports)} checks passed"])
    return EXIT_OK if failed == 0 else EXIT_CHECKS


# Parser -----------------------------------------------------------------------

def _add_common(sp):
    g = sp.add_argument_group("parameters")
    for flag, (key, typ) in _PARAMS.items():
        g.add_argument(f"--{flag}", dest=key, type=typ if typ is not int else _int, default=None)
    g.add_argument("--buffer", choices=[m.value for m in BufferMode], default=None)
    g.add_argument("--ec-method", dest="ec_method", choices=[m.value for m in EcMethod], default=None)
    g.add_argument("--eval", choices=[QUADRATURE, MONTE_CARLO], default=None,
                   help="how fading expectations are computed")
    sp.add_argument("--config", help="key = value file")
    sp.add_argument("--preset", help=f"named parameter set: {', '.join(sorted(PRESETS))}")
    sp.add_argument("--out", help="write CSV here instead of stdout")
    sp.add_argument("-v", "--verbose", action="count", default=0)


def _int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"expected an integer, got {s}")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eee-urllc",
                                 description="Effective energy efficiency of short-packet links.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ec", help="effective capacity at one operating point")
    _add_common(sp)
    sp.add_argument("--method", default="all", choices=["all", *[m.value for m in EcMethod]])
    sp.set_defaults(func=cmd_ec)

    sp = sub.add_parser("eee", help="effective energy efficiency at one operating point")
    _add_common(sp)
    sp.set_defaults(func=cmd_eee)

    sp = sub.add_parser("opt-power", help="EEE-optimal SNR (Rayleigh closed form)")
    _add_common(sp)
    sp.set_defaults(func=cmd_opt_power)

    sp = sub.add_parser("opt-eps", help="EC-optimal error probability")
    _add_common(sp)
    sp.set_defaults(func=cmd_opt_eps)

    sp = sub.add_parser("opt-constrained", help="QoS-constrained EEE maximisation over rho")
    _add_common(sp)
    sp.add_argument("--points", type=int, default=256)
    sp.set_defaults(func=cmd_opt_constrained)

    sp = sub.add_parser("arq", help="EBP-ARQ point evaluation")
    _add_common(sp)
    sp.add_argument("--eps1", type=float, default=None,
                    help="first-round error; default is the minimum-power split")
    sp.set_defaults(func=cmd_arq)

    sp = sub.add_parser("dinkelbach", help="minimum-NBP error split")
    _add_common(sp)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=50)
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_dinkelbach)

    sp = sub.add_parser("sweep", help="figure reproduction sweep")
    _add_common(sp)
    sp.add_argument("--fig", type=int, required=True, choices=FIGURES)
    sp.add_argument("--points", type=int, default=41)
    sp.add_argument("--threads", type=int, default=None,
                    help=f"worker processes (default: ${THREADS_ENV} or 1)")
    sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a fixed figure parameter")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="run the oracle cross-check battery")
    _add_common(sp)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        c = resolve(args)
        validate_params(c)
        return args.func(args, c)
    except (UsageError, DomainError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as e:
        print(f"not converged: {e}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
