"""Command-line interface: solve, query, simulate, slice.

Results are printed as line-oriented ``key=value`` records for easy
scripting.  Exit codes: 0 success, 2 configuration error, 3 numerical
instability, 4 non-convergence, 5 I/O failure, 6 out-of-domain query.

Environment:
    HJPLATOON_BACKEND   numba | numpy | auto (default auto)
    HJPLATOON_WORKERS   worker-count override; 0 or unset auto-detects
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from ._backend import select_backend
from .config import ScenarioConfig, load_config
from .errors import ConfigError, NumericalInstabilityError, OutOfDomainError
from .fieldio import read_field, write_field, write_slice_csv, write_trace_csv
from .safe_set import (
    extract_slice,
    gradient_at,
    is_safe,
    safe_volume_fraction,
    safety_filter,
    value_at,
)
from .sim import run as run_sim
from .sim import trajectory_payoff
from .solver import solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INSTABILITY = 3
EXIT_NONCONVERGENCE = 4
EXIT_IO = 5
EXIT_DOMAIN = 6


def _emit(key, value):
    if isinstance(value, bool):
        value = "true" if value else "false"
    elif isinstance(value, float):
        value = format(value, ".17g")
    print(f"{key}={value}")


def _echo_config(cfg: ScenarioConfig):
    _emit("config_echo", json.dumps(cfg.to_dict(), sort_keys=True,
                                    separators=(",", ":")))


def _parse_state(text: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"--state must be comma-separated floats, got {text!r}") from exc


def _parse_fixes(pairs) -> dict:
    fixed = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--fix expects dim=value, got {item!r}")
        name, _, val = item.partition("=")
        try:
            fixed[name.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"--fix {item!r}: value is not a number") from exc
    return fixed


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    _echo_config(cfg)
    backend = select_backend()
    _emit("backend", backend)
    _emit("grid_nodes", cfg.grid.n_nodes)
    progress_every = max(1, int(args.progress_every))

    def on_iteration(iteration, tau, max_change, values):
        if iteration % progress_every == 0:
            print(
                f"progress iteration={iteration} tau={tau:.4f} "
                f"max_change={max_change:.3e}",
                file=sys.stderr,
            )

    t0 = time.perf_counter()
    result = solve(cfg.grid, cfg.box, cfg.disturbance_model(), cfg.bounds,
                   cfg.solver, on_iteration=on_iteration)
    wall = time.perf_counter() - t0
    field = result.field
    write_field(args.out, field, scenario=cfg.scenario, model=cfg.model_kind,
                converged=result.converged, scenario_hash=cfg.scenario_hash())
    _emit("iterations", field.iterations)
    _emit("tau", field.tau)
    _emit("converged", result.converged)
    _emit("final_change_rate", result.final_change_rate)
    _emit("safe_volume_fraction", safe_volume_fraction(field))
    _emit("field", args.out)
    _emit("wall_time_s", wall)
    return EXIT_OK if result.converged else EXIT_NONCONVERGENCE


def cmd_query(args) -> int:
    field, header = read_field(args.field)
    cfg = load_config(args.config) if args.config else None
    if cfg is not None and cfg.scenario_hash() != header.get("scenario_hash"):
        raise ConfigError(
            "config does not match the field file "
            f"(hash {cfg.scenario_hash()} != {header.get('scenario_hash')})"
        )
    from .config import from_dict

    if cfg is None:
        cfg = from_dict({"scenario": header["scenario"]})
    z = _parse_state(args.state)
    margin = args.margin if args.margin is not None else cfg.filter_cfg.activation_margin
    value = value_at(field, z)
    grad = gradient_at(field, z)
    safe = is_safe(field, z, margin)
    filt_cfg = type(cfg.filter_cfg)(activation_margin=margin)
    filtered = safety_filter(field, z, args.nominal, filt_cfg, cfg.bounds)
    _emit("value", value)
    _emit("gradient", ",".join(format(g, ".17g") for g in grad))
    _emit("safe", safe)
    _emit("filtered_control", filtered)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    _echo_config(cfg)
    field, header = read_field(args.field)
    if header.get("scenario_hash") != cfg.scenario_hash():
        raise ConfigError(
            "config does not match the field file "
            f"(hash {cfg.scenario_hash()} != {header.get('scenario_hash')})"
        )
    z0 = _parse_state(args.state) if args.state else np.array(cfg.sim.initial_state)
    trace = run_sim(z0, cfg.sim.leader, cfg.sim.follower, cfg.nominal, field,
                    cfg.filter_cfg, cfg.idm, cfg.bounds, cfg.box,
                    dt=cfg.sim.dt, horizon=cfg.sim.horizon)
    write_trace_csv(args.out, trace, scenario=cfg.scenario)
    _emit("steps", trace.n_steps)
    _emit("violation", trace.violated)
    if trace.violated:
        _emit("first_violation_time", trace.first_violation_time)
    _emit("trajectory_payoff", trajectory_payoff(trace, cfg.box))
    _emit("truncated", trace.truncated)
    _emit("trace", args.out)
    return EXIT_OK


def cmd_slice(args) -> int:
    field, header = read_field(args.field)
    fixed = _parse_fixes(args.fix)
    try:
        sl = extract_slice(field, fixed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_slice_csv(args.out, sl, tau=field.tau, model=header.get("model", "?"))
    _emit("rows", sl.values.shape[0])
    _emit("cols", sl.values.shape[1])
    _emit("row_dim", sl.row_dim)
    _emit("col_dim", sl.col_dim)
    _emit("out", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hjplatoon",
        description="Reachability safe sets and safety filtering for a "
                    "three-car platoon.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute a value field from a scenario config")
    p.add_argument("--config", required=True, help="scenario JSON path")
    p.add_argument("--out", required=True, help="output value-field path")
    p.add_argument("--progress-every", default=50, type=int,
                   help="progress record stride on stderr")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("query", help="value/gradient/safety at a state")
    p.add_argument("--field", required=True, help="value-field path")
    p.add_argument("--state", required=True, help="comma-separated state")
    p.add_argument("--config", help="scenario JSON (defaults to the scenario's defaults)")
    p.add_argument("--margin", type=float, default=None,
                   help="safety margin (defaults to the filter activation margin)")
    p.add_argument("--nominal", type=float, default=0.0,
                   help="nominal control for the filter output")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("simulate", help="closed-loop run against a value field")
    p.add_argument("--config", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--out", required=True, help="output trace CSV path")
    p.add_argument("--state", help="override the configured initial state")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("slice", help="export a 2D slice of a field as CSV")
    p.add_argument("--field", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fix", action="append", metavar="dim=value",
                   help="fix a dimension (repeatable)")
    p.set_defaults(func=cmd_slice)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutOfDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalInstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
