"""Command-line front end.

    python -m blowup osgood   --config configs/counterexample.json
    python -m blowup bounds   --config configs/paris.json --seed 3
    python -m blowup simulate --config configs/paris.json --out results/paris
    python -m blowup paris    --config configs/paris.json --convention cdf --quantile 0.95

Exit codes: 0 success, 1 malformed config, 2 precondition failure,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings

import numpy as np

from . import paris
from .bounds import bound_report, epa_lower
from .config import ConfigError, ScenarioConfig, load_config
from .dynamics import explosion_time_thm2, solve_noisy
from .errors import DomainError, InconsistencyError, NonConvergenceError, PreconditionError
from .funcat import FunctionSpec
from .osgood import osgood_test
from .stochastic import (
    bound_crack,
    bound_pra1,
    bound_pra2,
    maintenance_time,
    mc_explosion,
    sample_path,
)
from .transforms import T_upper

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_NONCONVERGENCE = 0, 1, 2, 3
CONVENTIONS = ("centered", "cdf")


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def _t_max(cfg: ScenarioConfig, T: float) -> float:
    if cfg.solver.t_max is not None:
        return cfg.solver.t_max
    return 1.1 * T if math.isfinite(T) else 10.0


def _horizon(cfg: ScenarioConfig, T: float) -> float:
    if cfg.monte_carlo.horizon is not None:
        return cfg.monte_carlo.horizon
    if not math.isfinite(T):
        raise PreconditionError("Brownian noise needs a finite T = A^-1(B(inf)) or an explicit horizon")
    return 1.1 * T


def _grid(cfg: ScenarioConfig, T: float) -> np.ndarray:
    n = cfg.analysis.n_grid
    return np.arange(1, n + 1) * T / (n + 1)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


# -- subcommands ------------------------------------------------------------------

def cmd_osgood(cfg: ScenarioConfig, out_dir=None) -> dict:
    p = cfg.problem_spec()
    rep = osgood_test(p, ignore_noise=True)
    out = {"command": "osgood", "name": cfg.name, "report": rep.to_dict(), "warnings": []}
    if cfg.brownian:
        out["warnings"].append("Brownian noise ignored; the report is the noiseless baseline")
    elif not p.noiseless and not rep.explodes:
        traj = solve_noisy(p, cfg.solver.controls(_t_max(cfg, rep.T_point)), record=False)
        if traj.blow_up is not None:
            bu = traj.blow_up
            out["warnings"].append(
                f"the test finds no explosion for g = 0, but numeric simulation with the configured "
                f"noise (simulate) blows up in [{bu.t_lo!r}, {bu.t_hi!r}]")
            out["simulated_blow_up"] = [bu.t_lo, bu.t_hi]
    return out


def cmd_bounds(cfg: ScenarioConfig, out_dir=None) -> dict:
    base = cfg.problem_spec()
    out = {"command": "bounds", "name": cfg.name}
    if cfg.brownian:
        T = T_upper(base)
        horizon = _horizon(cfg, T)
        path = sample_path(horizon, cfg.monte_carlo.dt, cfg.monte_carlo.seed, cfg.monte_carlo.sigma)
        p = base.with_noise(FunctionSpec.abs_brownian(path))
        out["seed"] = cfg.monte_carlo.seed
    else:
        p = base
    rep = bound_report(p)
    out["report"] = rep.to_dict()
    if not p.noiseless:
        horizon = p.g.domain_hi if cfg.brownian else _t_max(cfg, rep.upper)
        traj = solve_noisy(p, cfg.solver.controls(min(horizon, _t_max(cfg, rep.upper))), record=False)
        if traj.blow_up is not None:
            out["numeric_bracket"] = [traj.blow_up.t_lo, traj.blow_up.t_hi]
    return out


def _simulate_closed(cfg, p, out_dir):
    T = T_upper(p.with_noise(None))
    traj = solve_noisy(p, cfg.solver.controls(_t_max(cfg, T)))
    out = {"status": traj.status, "n_steps": traj.residual_stats["n_accepted"],
           "blow_up": None, "notes": []}
    if traj.blow_up is not None:
        bu = traj.blow_up
        out["blow_up"] = {"t_lo": bu.t_lo, "t_hi": bu.t_hi, "reason": bu.reason}
        try:
            out["thm2_explosion_time"] = explosion_time_thm2(p, traj).T_point
        except PreconditionError as exc:
            out["notes"].append(f"explosion-time formula not applicable: {exc}")
    if out_dir:
        traj.to_csv(os.path.join(out_dir, "trajectory.csv"))
        out["files"] = ["trajectory.csv"]
    return out, traj


def _simulate_brownian(cfg, base, out_dir):
    mc = cfg.monte_carlo
    T = T_upper(base)
    horizon = _horizon(cfg, T)
    controls = cfg.solver.controls(horizon)
    L = cfg.analysis.L if cfg.analysis.L is not None else 2.0 * base.x0
    r = cfg.analysis.r

    path = sample_path(horizon, mc.dt, mc.seed, mc.sigma)
    traj = solve_noisy(base.with_noise(FunctionSpec.abs_brownian(path)), controls)
    dist = mc_explosion(base, mc.n_paths, horizon, mc.dt, mc.seed, controls, mc.sigma, level=L,
                        workers=mc.workers)

    ts = _grid(cfg, T)
    emp = dist.cdf(ts)
    se = dist.standard_error(ts)
    cond = dist.ghat_T >= r
    emp_cond = dist.cdf(ts, cond) if cond.any() else np.full(ts.shape, math.nan)
    se_cond = dist.standard_error(ts, cond) if cond.any() else np.full(ts.shape, math.nan)
    emp_cross = dist.level_cdf(ts)
    se_cross = np.sqrt(emp_cross * (1 - emp_cross) / dist.n)

    curves, validity = [], {}
    for conv in CONVENTIONS:
        pra1 = np.array([bound_pra1(base, t, T, conv) for t in ts])
        pra2 = np.array([bound_pra2(base, t, r, T, conv) for t in ts])
        crack = np.array([bound_crack(base, t, L, T, conv) for t in ts])
        validity[conv] = {
            "pra1": bool(np.all(emp <= pra1 + 3 * se)),
            "pra2": bool(np.all(emp_cond <= pra2 + 3 * se_cond)) if cond.any() else None,
            "crack": bool(np.all(emp_cross <= crack + 3 * se_cross)),
        }
        curves += [(t, e, a, b, c, conv) for t, e, a, b, c in zip(ts, emp, pra1, pra2, crack)]

    # path-wise EPA sandwich on every uncensored path
    alive = ~dist.censored
    lowers = np.array([epa_lower(base, g) for g in dist.ghat_T])
    width = dist.t_hi - dist.t_lo
    times = dist.times
    bad = alive & ((times < lowers - width) | (times > T + width))

    out = {
        "T": T, "horizon": horizon, "dt": mc.dt, "n_paths": dist.n, "base_seed": mc.seed,
        "censored": int(dist.censored.sum()), "r": r, "L": L,
        "sample_path": {"seed": mc.seed, "status": traj.status,
                        "blow_up": None if traj.blow_up is None else [traj.blow_up.t_lo, traj.blow_up.t_hi]},
        "epa_sandwich_violations": int(bad.sum()),
        "bound_validity": validity,
        "empirical": {"t": ts, "cdf": emp, "halfwidth": dist.halfwidth(ts)},
    }
    if out_dir:
        traj.to_csv(os.path.join(out_dir, "trajectory.csv"))
        _write_csv(os.path.join(out_dir, "empirical_cdf.csv"), ["t", "empirical", "halfwidth", "se"],
                   zip(ts, emp, dist.halfwidth(ts), se))
        _write_csv(os.path.join(out_dir, "bound_curves.csv"),
                   ["t", "empirical", "pra1", "pra2", "crack", "convention"], curves)
        _write_csv(os.path.join(out_dir, "paths.csv"),
                   ["seed", "t_lo", "t_hi", "ghat_T", "epa_lower", "censored"],
                   [(int(s), lo, hi, g, lw, int(c)) for s, lo, hi, g, lw, c in
                    zip(dist.seeds, dist.t_lo, dist.t_hi, dist.ghat_T, lowers, dist.censored)])
        out["files"] = ["trajectory.csv", "empirical_cdf.csv", "bound_curves.csv", "paths.csv"]
    return out, traj


def cmd_simulate(cfg: ScenarioConfig, out_dir=None) -> dict:
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    if cfg.brownian:
        body, _ = _simulate_brownian(cfg, cfg.problem_spec(), out_dir)
    else:
        body, _ = _simulate_closed(cfg, cfg.problem_spec(), out_dir)
    return {"command": "simulate", "name": cfg.name, **body}


def cmd_paris(cfg: ScenarioConfig, out_dir=None) -> dict:
    base = cfg.problem_spec().with_noise(None)
    pp = paris.ParisParams.from_problem(base)
    q, conv = cfg.analysis.quantile, cfg.analysis.convention
    numeric_T = osgood_test(base).T_point

    maint = {}
    for c in CONVENTIONS:
        try:
            t_m = paris.maintenance_time(pp, q, c)
            maint[c] = {"t": t_m, "generic": maintenance_time(base, q, c, pp.T),
                        "pra1_at_t": bound_pra1(base, t_m, pp.T, c)}
        except PreconditionError as exc:
            maint[c] = {"t": None, "reason": str(exc)}

    ts = _grid(cfg, pp.T)
    curves = []
    for c in CONVENTIONS:
        afe = paris.afe_bound(pp, ts, c)
        p2 = paris.prop2_curve(pp, ts, c)
        curves += [(t, u, v, c) for t, u, v in zip(ts, afe, p2)]
    table = paris.comparison_table(conv=conv)
    tally = {k: sum(1 for row in table if row[-1] == k) for k in ("afe", "prop2", "equal")}

    out = {
        "command": "paris", "name": cfg.name,
        "alpha": pp.alpha, "a0": pp.a0, "x0": pp.x0,
        "T": pp.T, "T_numeric": numeric_T,
        "quantile": q, "convention": conv,
        "maintenance_time": maint[conv]["t"],
        "maintenance": maint,
        "comparison": {"tighter_bound_counts": tally, "rows": len(table),
                       "note": "alpha a0 x0^alpha t < 1 for every 0 < t < T"},
    }
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _write_csv(os.path.join(out_dir, "paris_curves.csv"), ["t", "afe", "prop2", "convention"], curves)
        _write_csv(os.path.join(out_dir, "paris_comparison.csv"),
                   ["alpha", "a0", "x0", "t_over_T", "afe", "prop2", "smaller"], table)
        out["files"] = ["paris_curves.csv", "paris_comparison.csv"]
    return out


COMMANDS = {"osgood": cmd_osgood, "bounds": cmd_bounds, "simulate": cmd_simulate, "paris": cmd_paris}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blowup", description="Blow-up analysis of Y' = a(t) b(Y + g(t)).")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__name__.replace("cmd_", "") + " analysis")
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", default=None, help="output directory (default: config output.dir)")
        sp.add_argument("--seed", type=int, default=None, help="override monte_carlo.seed")
        sp.add_argument("--convention", choices=CONVENTIONS, default=None, help="reading of Phi")
        sp.add_argument("--quantile", type=float, default=None, help="maintenance quantile q")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(args.seed, args.convention, args.quantile, args.out)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = cfg.output.dir
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            report = COMMANDS[args.command](cfg, out_dir)
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except DomainError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NonConvergenceError, InconsistencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    text = dumps(report)
    sys.stdout.write(text)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, f"{args.command}_report.json"), "w") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
