"""Persistence: value-field files, slice CSVs, trace CSVs.

A value-field file is a single JSON header line followed by the raw node
values as little-endian float64, flattened with the first state dimension
varying fastest.  The header records the producing grid, scenario hash,
horizon and convergence flag; reading verifies the payload length against
the grid.  Round-trips are bit-exact.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError
from .grid import Grid
from .solver import ValueField

FORMAT_NAME = "hjplatoon-field/1"


def write_field(path, field: ValueField, *, scenario: str, model: str,
                converged: bool, scenario_hash: str) -> None:
    header = {
        "format": FORMAT_NAME,
        "scenario": scenario,
        "model": model,
        "grid": {
            "shape": list(field.grid.shape),
            "lo": field.grid.lo.tolist(),
            "hi": field.grid.hi.tolist(),
        },
        "tau": field.tau,
        "iterations": field.iterations,
        "converged": bool(converged),
        "scenario_hash": scenario_hash,
        "dtype": "<f8",
        "order": "first-dim-fastest",
    }
    payload = np.ascontiguousarray(
        field.values.ravel(order="F"), dtype="<f8"
    ).tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def read_field(path) -> tuple[ValueField, dict]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: not a value-field file ({exc})") from exc
    if header.get("format") != FORMAT_NAME:
        raise ConfigError(
            f"{path}: unsupported format {header.get('format')!r}"
        )
    gspec = header["grid"]
    grid = Grid(lo=gspec["lo"], hi=gspec["hi"], shape=tuple(gspec["shape"]))
    expected = grid.n_nodes * 8
    if len(payload) != expected:
        raise ConfigError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected}"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    values = flat.reshape(grid.shape, order="F").astype(float)
    field = ValueField(grid, values, tau=float(header["tau"]),
                       iterations=int(header["iterations"]))
    field.validate_finite()
    return field, header


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_slice_csv(path, sl, *, tau: float, model: str) -> None:
    """Slice CSV: a metadata comment, a header row naming both axes with the
    column coordinates, then one row per row-coordinate."""
    fixed_txt = "; ".join(f"{k}={_fmt(v)}" for k, v in sl.fixed.items()) or "none"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"# hjplatoon slice; fixed: {fixed_txt}; tau={_fmt(tau)}; model={model}\n"
        )
        fh.write(sl.row_dim + "\\" + sl.col_dim + ","
                 + ",".join(_fmt(c) for c in sl.col_coords) + "\n")
        for r, coord in enumerate(sl.row_coords):
            fh.write(_fmt(coord) + ","
                     + ",".join(_fmt(v) for v in sl.values[r]) + "\n")


def write_trace_csv(path, trace, *, scenario: str) -> None:
    dim = trace.states.shape[1]
    if dim == 4:
        state_cols = ["x_g1", "v_g1", "x_g2", "v_g2"]
        input_cols = ["u1", "u2", "u3"]
    else:
        state_cols = ["x_g1", "v_g1"]
        input_cols = ["u1", "u2"]
    fv = trace.first_violation_time
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"# hjplatoon trace; scenario={scenario}; "
            f"violation={'true' if trace.violated else 'false'}; "
            f"first_violation_time={_fmt(fv) if fv is not None else 'none'}; "
            f"truncated={'true' if trace.truncated else 'false'}\n"
        )
        fh.write("t," + ",".join(state_cols + input_cols) + ",value,margin,violation\n")
        for k in range(trace.t.size):
            row = [_fmt(trace.t[k])]
            row += [_fmt(x) for x in trace.states[k]]
            row += ["" if np.isnan(u) else _fmt(u) for u in trace.inputs[k]]
            row.append("" if np.isnan(trace.values[k]) else _fmt(trace.values[k]))
            row.append(_fmt(trace.margins[k]))
            row.append("1" if trace.violations[k] else "0")
            fh.write(",".join(row) + "\n")
