"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 usage or input error,
3 numerical failure (unstable grid, blow-up, singular system).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import model1, model2, model3, sim_engine, validation
from .errors import NumericalError
from .model2 import HazardSpec
from .model3 import FirmValueParams, SolverGrid
from .params import PARAM_KEYS, ConfigError, ImpactParams, check_condition_13, parse_key_values, parse_number

# config-file keys beyond the impact constants, mapped to RunConfig.extra names
EXTRA_KEYS = {
    "lambda": "lam", "beta": "beta", "xi": "xi", "rho": "rho", "y0": "y0", "barrier": "barrier",
    "xmax": "xmax", "nspace": "nspace", "ntime": "ntime", "paths": "paths", "nsteps": "nsteps",
}
INT_KEYS = {"nspace", "ntime", "paths", "nsteps"}


@dataclass
class RunConfig:
    model: str
    params: ImpactParams
    hazard: Optional[HazardSpec] = None
    hazard_file: Optional[str] = None
    firm: Optional[FirmValueParams] = None
    grid: Optional[SolverGrid] = None
    out: Optional[Path] = None
    seed: int = 0
    extra: dict = field(default_factory=dict)


def _num(v: float) -> str:
    return f"{v:.12g}"


def csv_text(header, columns) -> str:
    """Rows of ``columns`` with 12 significant digits and LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_num(float(v)) if isinstance(v, (float, int, np.floating, np.integer))
                    and not isinstance(v, bool) else v for v in row])
    return buf.getvalue()


def _json_value(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    f = float(v)
    return f if math.isfinite(f) else None


def json_text(summary: dict) -> str:
    return json.dumps({k: _json_value(v) for k, v in summary.items()}, indent=2) + "\n"


def _param_flags(parser):
    g = parser.add_argument_group("impact parameters")
    for key in PARAM_KEYS:
        g.add_argument(f"--{key}", type=str, default=None, metavar="X")


def _global_flags(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, metavar="PATH", help="key=value parameter file")
    parser.add_argument("--out", default=d, metavar="DIR", help="directory for CSV/JSON files")
    parser.add_argument("--seed", type=int, default=d if suppress else 0, metavar="N")


def _firm_flags(parser):
    parser.add_argument("--beta", type=str, default=None)
    parser.add_argument("--xi", type=str, default=None, help="firm-value volatility")
    parser.add_argument("--rho", type=str, default=None)
    parser.add_argument("--y0", type=str, default=None)
    parser.add_argument("--barrier", type=str, default=None, help="default barrier alpha*")
    parser.add_argument("--xmax", type=str, default=None)
    parser.add_argument("--nspace", type=str, default=None)
    parser.add_argument("--ntime", type=str, default=None)
    parser.add_argument("--force", action="store_true", help="solve even on an unstable grid")
    parser.add_argument("--picard-iters", type=int, default=1)


def _hazard_flags(parser):
    g = parser.add_mutually_exclusive_group()
    g.add_argument("--lambda", dest="lam", type=str, default=None, help="constant hazard rate")
    g.add_argument("--hazard-file", default=None, metavar="CSV", help="tabulated hazard, header t,l")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="liqhorizon", description="Optimal liquidation solvers and simulator.")
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("model1", help="fixed horizon: hands-clean vs penalised strategy")
    p2 = sub.add_parser("model2", help="random horizon with a hazard rate")
    p3 = sub.add_parser("model3", help="counterparty-default horizon: PDE surface and one path")
    ps = sub.add_parser("simulate", help="Monte Carlo replay of a model's feedback strategy")
    pv = sub.add_parser("validate", help="run the acceptance suite")
    for p in (p1, p2, p3, ps, pv):
        _global_flags(p, suppress=True)
    for p in (p1, p2, p3, ps):
        _param_flags(p)
    _hazard_flags(p2)
    _firm_flags(p3)
    ps.add_argument("--model", choices=("1", "2", "3"), required=True)
    ps.add_argument("--paths", type=str, default=None)
    ps.add_argument("--nsteps", type=str, default=None)
    _hazard_flags(ps)
    _firm_flags(ps)
    pv.add_argument("--only", default=None, help="comma-separated criterion numbers")
    pv.add_argument("--tol", action="append", default=[], metavar="N:KEY=VALUE",
                    help="override one tolerance, e.g. 1:gap_at_1000=1e-9")
    return ap


def _file_values(path: Optional[str]) -> dict[str, str]:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = parse_key_values(p.read_text(), str(p))
    for key in values:
        if key not in PARAM_KEYS and key not in EXTRA_KEYS:
            raise ConfigError(f"{path}: unknown key {key!r}")
    return values


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and flags (flags win) into a RunConfig."""
    file_vals = _file_values(getattr(args, "config", None))
    impact = {}
    for key in PARAM_KEYS:
        raw = getattr(args, key, None)
        raw = file_vals.get(key) if raw is None else raw
        if raw is not None:
            impact[key] = parse_number(raw, key)
    params = ImpactParams(**impact)

    extra: dict = {}
    for key, attr in EXTRA_KEYS.items():
        raw = getattr(args, attr if key == "lambda" else key, None)
        raw = file_vals.get(key) if raw is None else raw
        if raw is None:
            continue
        val = parse_number(raw, key)
        if key in INT_KEYS:
            if val != int(val) or val < 1:
                raise ConfigError(f"{key} must be a positive integer, got {raw!r}")
            val = int(val)
        extra[key] = val

    cmd = args.command
    model = getattr(args, "model", None) or cmd.replace("model", "")
    cfg = RunConfig(model=model, params=params, seed=int(getattr(args, "seed", 0) or 0), extra=extra)
    out = getattr(args, "out", None)
    cfg.out = Path(out) if out else None

    if model == "2":
        hf = getattr(args, "hazard_file", None)
        if hf is not None:
            if not Path(hf).is_file():
                raise ConfigError(f"hazard file not found: {hf}")
            cfg.hazard = HazardSpec.from_csv(hf)
            cfg.hazard_file = hf
            if not cfg.hazard.covers(params.T):
                raise ConfigError(f"hazard file {hf} does not cover [0, {params.T}]")
        else:
            cfg.hazard = HazardSpec.constant(extra.get("lambda", 1.0))
    if model == "3":
        defaults = FirmValueParams()
        cfg.firm = FirmValueParams(
            beta=extra.get("beta", defaults.beta),
            xi_firm=extra.get("xi", defaults.xi_firm),
            rho=extra.get("rho", defaults.rho),
            y0=extra.get("y0", defaults.y0),
            alpha_star=extra.get("barrier", defaults.alpha_star),
        )
        n_time = extra.get("ntime", extra.get("nsteps", 1000))
        cfg.grid = model3.make_grid(params, cfg.firm, n_time=n_time,
                                    n_space=extra.get("nspace"), x_max=extra.get("xmax", 10.0))
    return cfg


def _emit(cfg: RunConfig, files: dict[str, str], summary: dict, stdout) -> None:
    text = json_text(summary)
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        for name, body in files.items():
            with open(cfg.out / name, "w", newline="") as fh:
                fh.write(body)
        with open(cfg.out / "summary.json", "w", newline="") as fh:
            fh.write(text)
    stdout.write(text)


def run_model1(cfg: RunConfig, stdout) -> int:
    p = cfg.params
    det = model1.det_solution(p)
    dp = model1.dp_trajectory(p, det.times)
    body = csv_text(["t", "X_det", "theta_det", "X_dp", "theta_dp", "c"],
                    [det.times, det.inventory, det.rate, dp.inventory, dp.rate, dp.value_coeff])
    summary = {
        "terminal_inventory": dp.terminal_inventory,
        "sup_gap_theta": float(np.max(np.abs(dp.rate - det.rate))),
        "sup_gap_X": float(np.max(np.abs(dp.inventory - det.inventory))),
        "condition13": check_condition_13(p),
    }
    _emit(cfg, {"model1.csv": body}, summary, stdout)
    return 0


def _model2_pair(cfg: RunConfig):
    p, h = cfg.params, cfg.hazard
    if h.kind == "constant":
        t = np.linspace(0.0, p.T, 1001)
        return model2.det_solution_const_hazard(p, h.lam, t), model2.dp_trajectory_m2(p, h.lam, t)
    return model2.det_bvp_solve(p, h, 1001), model2.dp_trajectory_hazard(p, h, 1000)


def run_model2(cfg: RunConfig, stdout) -> int:
    p, h = cfg.params, cfg.hazard
    det, dp = _model2_pair(cfg)
    surv = model2.survival_probability(h, det.times)
    body = csv_text(["t", "X_det", "theta_det", "X_dp", "theta_dp", "c_tilde", "survival"],
                    [det.times, det.inventory, det.rate, dp.inventory, dp.rate, dp.value_coeff, surv])
    summary = {
        "lambda": h.lam if h.kind == "constant" else None,
        "hazard_file": cfg.hazard_file,
        "terminal_inventory": dp.terminal_inventory,
        "c_tilde_0": float(dp.value_coeff[0]),
        "horizon_point_mass": model2.horizon_point_mass(h, p.T),
        "condition13": check_condition_13(p),
    }
    _emit(cfg, {"model2.csv": body}, summary, stdout)
    return 0


def run_model3(cfg: RunConfig, args, stdout) -> int:
    p, fv, grid = cfg.params, cfg.firm, cfg.grid
    vs = model3.solve_value_surface(p, fv, grid, force=args.force, picard_iters=args.picard_iters)
    res = model3.simulate_batch_m3(vs, fv, p, seed=cfg.seed, n_paths=1)
    k = int(res.term_idx[0])
    tt, xx = np.meshgrid(vs.tau, vs.x, indexing="ij")
    surface = csv_text(["tau", "x", "h_tilde"], [tt.ravel(), xx.ravel(), vs.values.ravel()])
    traj = csv_text(["t", "logY", "X", "theta", "V"],
                    [res.times[: k + 1], res.log_ratio[0, : k + 1], res.inventory[0, : k + 1],
                     res.rate[0, : k + 1], res.book_value[0, : k + 1]])
    summary = {
        "termination_kind": str(res.term_kind[0]),
        "termination_time": float(res.times[k]),
        "realized_pnl": float(res.realized_gain[0]),
        "stability_ok": grid.stability_ok,
        "r": grid.r,
        "u": grid.u,
        "v": grid.v,
    }
    _emit(cfg, {"surface.csv": surface, "trajectory.csv": traj}, summary, stdout)
    return 0


def _feedback(coeff_fn, p):
    def rule(t, x, lr, i):
        return np.maximum(-(2.0 * coeff_fn(i) + p.eta) * x / (2.0 * p.nu), 0.0)
    return rule


def run_simulate(cfg: RunConfig, stdout) -> int:
    p = cfg.params
    n_paths = cfg.extra.get("paths", 1000)
    n_steps = cfg.extra.get("nsteps", 1000)
    if cfg.model == "3":
        vs = model3.solve_value_surface(p, cfg.firm, cfg.grid)
        res = model3.simulate_batch_m3(vs, cfg.firm, p, seed=cfg.seed, n_paths=n_paths)
    else:
        paths = sim_engine.generate_paths(p, None, seed=cfg.seed, n_steps=n_steps, n_paths=n_paths)
        if cfg.model == "1":
            c = model1.dp_coefficient_c(p, paths.times)
            res = sim_engine.replay_strategy(paths, _feedback(lambda i: c[i], p), p)
        else:
            h = cfg.hazard
            if h.kind == "constant":
                c = model2.tilde_c_const_hazard(p, h.lam, paths.times)
            else:
                c = model2.riccati_solve(p, h, n_steps).c_tilde
            res = sim_engine.replay_strategy(paths, _feedback(lambda i: c[i], p), p, hazard=h)
    idx = np.arange(res.n_paths)
    body = csv_text(
        ["path", "objective", "realized_gain", "quadratic_variation", "terminal_penalty",
         "terminal_inventory", "termination_kind", "termination_time", "clamped"],
        [idx, res.objective, res.realized_gain, res.quadratic_variation, res.penalty,
         res.terminal_inventory, [str(k) for k in res.term_kind], res.termination_time,
         [int(c) for c in res.clamped]],
    )
    _emit(cfg, {"paths.csv": body}, res.summary(), stdout)
    return 0


def _parse_tol(items) -> dict:
    out: dict[int, dict] = {}
    for item in items:
        try:
            num, kv = item.split(":", 1)
            key, val = kv.split("=", 1)
            out.setdefault(int(num), {})[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"bad --tol value {item!r}; expected N:KEY=VALUE") from None
    return out


def run_validate(args, stdout) -> int:
    only = None
    if args.only:
        try:
            only = [int(s) for s in args.only.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"bad --only value {args.only!r}") from None
    results = validation.run_validation_suite(only=only, overrides=_parse_tol(args.tol))
    stdout.write(validation.format_report(results) + "\n")
    out = getattr(args, "out", None)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        rows = [{"criterion": r.number, "name": r.name, "passed": r.passed,
                 "measured": {k: v for k, v in r.measured.items()}, "tolerance": r.tolerance,
                 "runtime": r.runtime} for r in results]
        (d / "validation.json").write_text(json.dumps(rows, indent=2, default=float) + "\n")
    return 0 if all(r.passed for r in results) else 1


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "validate":
            return run_validate(args, stdout)
        cfg = parse_config(args)
        if args.command == "model1":
            return run_model1(cfg, stdout)
        if args.command == "model2":
            return run_model2(cfg, stdout)
        if args.command == "model3":
            return run_model3(cfg, args, stdout)
        return run_simulate(cfg, stdout)
    except NumericalError as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return 3
    except (ValueError, OSError) as exc:
        stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
