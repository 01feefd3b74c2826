"""Command-line front end: ``hhinverse {forward,perturb,invert,table}``.

Exit codes: 0 success, 2 configuration error, 3 divergence, 4 zero gradient.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, artifacts, plots
from .config import config_from_dict, load_config
from .data import NoiseSpec, Observation, add_noise
from .errors import ConfigError, DivergenceError, HHError, ZeroGradientError
from .landweber import StoppingRule, run_inversion
from .model import solve_forward

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_ZERO_GRADIENT = 4

TABLE_KIND = {2: "conductances", 3: "exponents"}
TABLE_PRESET = {2: "conductances", 3: "exponents"}

log = logging.getLogger("hhinverse")


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _out_dir(args, cfg):
    path = Path(args.out if args.out else cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _apply_overrides(cfg, args):
    changes = {}
    if getattr(args, "tau", None) is not None:
        changes["tau"] = args.tau
    if getattr(args, "max_iter", None) is not None:
        changes["max_iterations"] = args.max_iter
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    return cfg.with_overrides(**changes) if changes else cfg


def _clean_trace(cfg):
    return solve_forward(cfg.consts, cfg.true_conductances, cfg.true_exponents, cfg.grid)


def _observe(cfg, epsilon):
    clean = _clean_trace(cfg)
    return clean, add_noise(clean.v, NoiseSpec(epsilon, cfg.seed), cfg.grid)


def _invert(cfg, observation):
    rule = StoppingRule(cfg.tau, observation.delta, cfg.max_iterations)
    return run_inversion(cfg.consts, cfg.initial_guess, cfg.known, cfg.grid, observation,
                         rule, truth=cfg.truth, safeguard=cfg.safeguard,
                         sufficient_decrease=cfg.sufficient_decrease)


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else x


def _summary(cfg, observation, result, started):
    return {
        "version": __version__,
        "config": cfg.snapshot(),
        "generator": observation.generator,
        "seed": observation.seed,
        "epsilon": _finite_or_none(observation.epsilon),
        "delta": observation.delta,
        "threshold": cfg.tau * observation.delta,
        "started": started,
        "finished": _now(),
        "kind": result.kind,
        "k_star": result.k_star,
        "final_iterate": list(result.final_iterate.values),
        "final_residual": result.final_residual,
        "final_error": result.final_error,
        "stop_reason": result.stop_reason,
    }


def cmd_forward(args):
    cfg = load_config(args.config)
    traj = _clean_trace(cfg)
    out = _out_dir(args, cfg)
    artifacts.write_trajectory_csv(out / "trajectory.csv", traj)
    if not args.no_plots:
        plots.plot_trajectory(traj, out / "trajectory.png")
    print(out / "trajectory.csv")
    return EXIT_OK


def cmd_perturb(args):
    cfg = _apply_overrides(load_config(args.config), args)
    clean, obs = _observe(cfg, args.epsilon)
    out = _out_dir(args, cfg)
    artifacts.write_observation_csv(out / "observation.csv", clean.times, clean.v, obs)
    if not args.no_plots:
        plots.plot_observation(clean.times, clean.v, obs.v_delta, obs.epsilon,
                               out / "observation.png")
    print(f"delta = {obs.delta:.17g}")
    return EXIT_OK


def _read_observation(path, cfg, delta_override):
    meta, cols = artifacts.read_observation_csv(path)
    times = cols["t"]
    if times.shape != (cfg.grid.n_nodes,) or not np.allclose(times, cfg.grid.times,
                                                             rtol=0, atol=1e-9):
        raise ConfigError(
            f"observation has {times.size} samples that do not match the config grid "
            f"(T={cfg.grid.t_end}, dt={cfg.grid.dt})")
    delta = delta_override if delta_override is not None else meta.get("delta")
    if delta is None:
        raise ConfigError("observation carries no delta; pass --delta")
    return Observation(cfg.grid, cols["V_delta"], float(delta),
                       float(meta.get("epsilon", math.nan)), meta.get("seed"),
                       meta.get("generator", "external"))


def _write_run(out, cfg, obs, result, started, with_plots):
    artifacts.write_trace_csv(out / "trace.csv", result)
    artifacts.write_json(out / "summary.json", _summary(cfg, obs, result, started))
    if with_plots:
        plots.plot_iterates(result, cfg.truth, out / "iterates.png")
        plots.plot_convergence(result, out / "convergence.png")


def cmd_invert(args):
    cfg = _apply_overrides(load_config(args.config), args)
    started = _now()
    if args.observation:
        obs = _read_observation(args.observation, cfg, args.delta)
        clean_v = None
    elif args.epsilon is not None:
        clean, obs = _observe(cfg, args.epsilon)
        clean_v = clean.v
    else:
        raise ConfigError("invert needs either --observation or --epsilon")
    out = _out_dir(args, cfg)
    result = _invert(cfg, obs)
    _write_run(out, cfg, obs, result, started, not args.no_plots)
    if clean_v is not None and not args.no_plots:
        plots.plot_observation(cfg.grid.times, clean_v, obs.v_delta, obs.epsilon,
                               out / "observation.png")
    final = ", ".join(f"{x:.6g}" for x in result.final_iterate.values)
    if result.stop_reason == "zero_gradient":
        print(f"error: zero gradient at iteration {result.k_star}", file=sys.stderr)
        return EXIT_ZERO_GRADIENT
    print(f"k* = {result.k_star}  iterate = ({final})  residual = {result.final_residual:.6g}"
          f"  error = {result.final_error:.4g}%  stop = {result.stop_reason}")
    return EXIT_OK


def table_row(snapshot, epsilon, row_dir=None, with_plots=False):
    """Run one table row; failures are reported in the returned dict."""
    cfg = config_from_dict(snapshot)
    row = {"epsilon": float(epsilon)}
    started = _now()
    try:
        _, obs = _observe(cfg, epsilon)
        row["delta"] = obs.delta
        row["tau_delta"] = cfg.tau * obs.delta
        result = _invert(cfg, obs)
    except HHError as exc:
        row.update(status=f"{type(exc).__name__}: {exc}", stop_reason="error")
        return row
    p1, p2, p3 = result.final_iterate.values
    row.update(k_star=result.k_star, p1=p1, p2=p2, p3=p3, error=result.final_error,
               residual=result.final_residual, stop_reason=result.stop_reason, status="ok")
    if row_dir is not None:
        _write_run(Path(row_dir), cfg, obs, result, started, with_plots)
    return row


def cmd_table(args):
    which = args.which
    cfg = load_config(args.config or TABLE_PRESET[which])
    if cfg.unknown != TABLE_KIND[which]:
        raise ConfigError(
            f"table {which} recovers {TABLE_KIND[which]}, but the config's unknown is {cfg.unknown}")
    cfg = _apply_overrides(cfg, args)
    epsilons = list(args.epsilon) if args.epsilon else list(cfg.epsilons)
    out = _out_dir(args, cfg)
    snapshot = cfg.snapshot()
    jobs = [(snapshot, eps, out / f"eps_{eps:g}", not args.no_plots) for eps in epsilons]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(table_row, *zip(*jobs)))
    else:
        rows = [table_row(*job) for job in jobs]
    path = artifacts.write_table_csv(out / f"table{which}.csv", rows)
    if not args.no_plots:
        plots.plot_table(rows, out / f"table{which}.png")
    for r in rows:
        if r["status"] == "ok":
            print(f"eps={100 * r['epsilon']:g}%  k*={r['k_star']}  "
                  f"({r['p1']:.4f}, {r['p2']:.4f}, {r['p3']:.4f})  "
                  f"error={r['error']:.3g}%  res={r['residual']:.4g}")
        else:
            print(f"eps={100 * r['epsilon']:g}%  failed: {r['status']}")
    print(path)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="hhinverse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="YAML config path or preset name (conductances, exponents)")
        p.add_argument("--out", help="output directory (default: config output_dir)")
        p.add_argument("--no-plots", action="store_true", help="skip PNG figures")

    p = sub.add_parser("forward", help="simulate the true model and write the trajectory")
    common(p)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("perturb", help="write a noisy observation of the true trajectory")
    common(p)
    p.add_argument("--epsilon", type=float, required=True, help="relative noise level")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("invert", help="run the Landweber inversion on one observation")
    common(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--observation", help="observation CSV written by 'perturb'")
    src.add_argument("--epsilon", type=float, help="generate the observation in-process")
    p.add_argument("--delta", type=float, help="noise bound for an external observation")
    p.add_argument("--seed", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--max-iter", type=int)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("table", help="run one inversion per noise level and tabulate")
    common(p, config_required=False)
    p.add_argument("--which", type=int, choices=(2, 3), required=True,
                   help="2: conductances, 3: exponents")
    p.add_argument("--epsilon", type=float, action="append",
                   help="noise level (repeatable; default: config list)")
    p.add_argument("--seed", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--jobs", type=int, default=1, help="rows run in parallel")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"error: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ZeroGradientError as exc:
        print(f"error: zero gradient: {exc}", file=sys.stderr)
        return EXIT_ZERO_GRADIENT
    except HHError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
