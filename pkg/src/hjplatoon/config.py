"""Declarative scenario configuration.

A scenario is a JSON object; ``scenario`` is the only required key and every
other field falls back to a documented default.  Unknown keys anywhere are
rejected with a path-qualified message, and parsing a serialized normalized
config reproduces it exactly (round-trip identity).

The gap upper bound of the constraint box may be ``null`` (unbounded): only
closing gaps are dangerous, large gaps are not.  Relative-speed bounds must
be finite so the constraint set is representable on the grid.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .dynamics import ActuationBounds, ConstraintBox
from .errors import ConfigError
from .grid import Grid
from .hamiltonian import DisturbanceModel
from .idm import IdmParams
from .safe_set import SafetyFilterConfig
from .sim import (
    AdversarialFollowerExtreme,
    AdversarialFollowerReaction,
    AdversarialLeader,
    ConstantAccel,
    IdmFixedT,
    NominalConstant,
    NominalIdmLeader,
    ScriptedBrake,
)
from .solver import SolverSettings

TWO_CAR = "two_car"
THREE_CAR = "three_car"

_GRID_DEFAULTS = {
    TWO_CAR: {"shape": [161, 161], "lo": [-4.0, -12.0], "hi": [44.0, 12.0]},
    THREE_CAR: {
        "shape": [41, 41, 41, 41],
        "lo": [-4.0, -12.0, -4.0, -12.0],
        "hi": [44.0, 12.0, 44.0, 12.0],
    },
}

_INITIAL_DEFAULTS = {TWO_CAR: [20.0, 0.0], THREE_CAR: [20.0, 0.0, 20.0, 0.0]}


def _require_mapping(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(d, allowed, path):
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(
            f"{path}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return int(value)


def _pair(value, path):
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"{path}: expected a [lo, hi] pair, got {value!r}")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _numbers(value, path, n=None):
    if not isinstance(value, list):
        raise ConfigError(f"{path}: expected a list, got {value!r}")
    if n is not None and len(value) != n:
        raise ConfigError(f"{path}: expected {n} entries, got {len(value)}")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _build(cls, kwargs, path):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class SimDefaults:
    dt: float = 0.05
    horizon: float = 10.0
    initial_state: tuple = ()
    leader: object = ConstantAccel(0.0)
    follower: object | None = None

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.horizon <= 0.0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")


@dataclass(eq=False)
class ScenarioConfig:
    scenario: str
    model_kind: str
    bounds: ActuationBounds
    box: ConstraintBox
    grid: Grid
    solver: SolverSettings
    idm: IdmParams
    filter_cfg: SafetyFilterConfig
    nominal: object
    sim: SimDefaults

    @property
    def dim(self) -> int:
        return 2 if self.scenario == TWO_CAR else 4

    def disturbance_model(self) -> DisturbanceModel:
        if self.model_kind == "extreme":
            return DisturbanceModel.extreme()
        return DisturbanceModel.reaction_time(self.idm)

    def to_dict(self) -> dict:
        """Normalized form: every default materialized."""
        x_hi = None if math.isinf(self.box.x_hi) else self.box.x_hi
        out = {
            "scenario": self.scenario,
            "disturbance_model": self.model_kind,
            "bounds": {
                "control": [self.bounds.control_lo, self.bounds.control_hi],
                "disturbance": [self.bounds.dist_lo, self.bounds.dist_hi],
            },
            "constraint_box": {
                "gap": [self.box.x_lo, x_hi],
                "rel_speed": [self.box.v_lo, self.box.v_hi],
            },
            "grid": {
                "shape": list(self.grid.shape),
                "lo": self.grid.lo.tolist(),
                "hi": self.grid.hi.tolist(),
            },
            "solver": {
                "cfl": self.solver.cfl,
                "eps_conv": self.solver.eps_conv,
                "tau_max": self.solver.tau_max,
                "boundary_mode": self.solver.boundary_mode,
                "integrator": self.solver.integrator,
                "conv_band_cells": self.solver.conv_band_cells,
                "conv_consecutive": self.solver.conv_consecutive,
            },
            "idm": {
                "a": self.idm.a,
                "b": self.idm.b,
                "delta": self.idm.delta,
                "v0": self.idm.v0,
                "s0": self.idm.s0,
                "t_min": self.idm.t_min,
                "t_max": self.idm.t_max,
                "v_ego_nominal": self.idm.v_ego_nominal,
            },
            "filter": {
                "activation_margin": self.filter_cfg.activation_margin,
                "nominal": _nominal_to_dict(self.nominal),
            },
            "simulation": {
                "dt": self.sim.dt,
                "horizon": self.sim.horizon,
                "initial_state": list(self.sim.initial_state),
                "leader": _leader_to_dict(self.sim.leader),
            },
        }
        if self.scenario == THREE_CAR:
            out["simulation"]["follower"] = _follower_to_dict(self.sim.follower)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def scenario_hash(self) -> str:
        """Hash of the solve-relevant configuration (simulation and filter
        settings excluded: they do not affect the produced field)."""
        d = self.to_dict()
        solve_part = {
            k: d[k]
            for k in (
                "scenario",
                "disturbance_model",
                "bounds",
                "constraint_box",
                "grid",
                "solver",
                "idm",
            )
        }
        blob = json.dumps(solve_part, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _leader_to_dict(b) -> dict:
    if isinstance(b, ConstantAccel):
        return {"kind": "constant", "accel": b.accel}
    if isinstance(b, ScriptedBrake):
        return {"kind": "scripted_brake", "t_start": b.t_start, "accel": b.accel}
    if isinstance(b, AdversarialLeader):
        return {"kind": "adversarial"}
    raise TypeError(f"unknown leader behavior {b!r}")


def _follower_to_dict(b) -> dict:
    if isinstance(b, IdmFixedT):
        return {"kind": "idm_fixed_t", "reaction_time": b.reaction_time}
    if isinstance(b, ConstantAccel):
        return {"kind": "constant", "accel": b.accel}
    if isinstance(b, AdversarialFollowerExtreme):
        return {"kind": "adversarial_extreme"}
    if isinstance(b, AdversarialFollowerReaction):
        return {"kind": "adversarial_reaction"}
    raise TypeError(f"unknown follower behavior {b!r}")


def _nominal_to_dict(n) -> dict:
    if isinstance(n, NominalConstant):
        return {"kind": "constant", "accel": n.accel}
    if isinstance(n, NominalIdmLeader):
        return {"kind": "idm_leader", "reaction_time": n.reaction_time}
    raise TypeError(f"unknown nominal policy {n!r}")


def _parse_leader(d, bounds: ActuationBounds, path):
    d = _require_mapping(d, path)
    kind = d.get("kind")
    if kind == "constant":
        _check_keys(d, {"kind", "accel"}, path)
        accel = _number(d.get("accel", 0.0), f"{path}.accel")
        if not (bounds.dist_lo <= accel <= bounds.dist_hi):
            raise ConfigError(
                f"{path}.accel: {accel} outside disturbance bounds "
                f"[{bounds.dist_lo}, {bounds.dist_hi}]"
            )
        return ConstantAccel(accel)
    if kind == "scripted_brake":
        _check_keys(d, {"kind", "t_start", "accel"}, path)
        t_start = _number(d.get("t_start", 0.0), f"{path}.t_start")
        accel = _number(d.get("accel", bounds.dist_lo), f"{path}.accel")
        if t_start < 0.0:
            raise ConfigError(f"{path}.t_start: must be >= 0, got {t_start}")
        if not (bounds.dist_lo <= accel <= bounds.dist_hi):
            raise ConfigError(
                f"{path}.accel: {accel} outside disturbance bounds "
                f"[{bounds.dist_lo}, {bounds.dist_hi}]"
            )
        return ScriptedBrake(t_start, accel)
    if kind == "adversarial":
        _check_keys(d, {"kind"}, path)
        return AdversarialLeader()
    raise ConfigError(
        f"{path}.kind: expected constant | scripted_brake | adversarial, got {kind!r}"
    )


def _parse_follower(d, bounds: ActuationBounds, idm: IdmParams, path):
    d = _require_mapping(d, path)
    kind = d.get("kind")
    if kind == "idm_fixed_t":
        _check_keys(d, {"kind", "reaction_time"}, path)
        t = _number(d.get("reaction_time", 1.0), f"{path}.reaction_time")
        if not (idm.t_min <= t <= idm.t_max):
            raise ConfigError(
                f"{path}.reaction_time: {t} outside [{idm.t_min}, {idm.t_max}]"
            )
        return IdmFixedT(t)
    if kind == "constant":
        _check_keys(d, {"kind", "accel"}, path)
        accel = _number(d.get("accel", 0.0), f"{path}.accel")
        if not (bounds.dist_lo <= accel <= bounds.dist_hi):
            raise ConfigError(
                f"{path}.accel: {accel} outside disturbance bounds "
                f"[{bounds.dist_lo}, {bounds.dist_hi}]"
            )
        return ConstantAccel(accel)
    if kind == "adversarial_extreme":
        _check_keys(d, {"kind"}, path)
        return AdversarialFollowerExtreme()
    if kind == "adversarial_reaction":
        _check_keys(d, {"kind"}, path)
        return AdversarialFollowerReaction()
    raise ConfigError(
        f"{path}.kind: expected idm_fixed_t | constant | adversarial_extreme | "
        f"adversarial_reaction, got {kind!r}"
    )


def _parse_nominal(d, bounds: ActuationBounds, idm: IdmParams, path):
    d = _require_mapping(d, path)
    kind = d.get("kind")
    if kind == "constant":
        _check_keys(d, {"kind", "accel"}, path)
        accel = _number(d.get("accel", 0.0), f"{path}.accel")
        if not (bounds.control_lo <= accel <= bounds.control_hi):
            raise ConfigError(
                f"{path}.accel: {accel} outside control bounds "
                f"[{bounds.control_lo}, {bounds.control_hi}]"
            )
        return NominalConstant(accel)
    if kind == "idm_leader":
        _check_keys(d, {"kind", "reaction_time"}, path)
        t = _number(d.get("reaction_time", 1.0), f"{path}.reaction_time")
        if t < 0.0:
            raise ConfigError(f"{path}.reaction_time: must be >= 0, got {t}")
        return NominalIdmLeader(t)
    raise ConfigError(f"{path}.kind: expected constant | idm_leader, got {kind!r}")


def from_dict(raw: dict) -> ScenarioConfig:
    raw = _require_mapping(raw, "config")
    _check_keys(
        raw,
        {
            "scenario",
            "disturbance_model",
            "bounds",
            "constraint_box",
            "grid",
            "solver",
            "idm",
            "filter",
            "simulation",
        },
        "config",
    )
    scenario = raw.get("scenario")
    if scenario not in (TWO_CAR, THREE_CAR):
        raise ConfigError(
            f"config.scenario: expected {TWO_CAR!r} or {THREE_CAR!r}, got {scenario!r}"
        )
    dim = 2 if scenario == TWO_CAR else 4

    model_kind = raw.get("disturbance_model", "extreme")
    if model_kind not in ("extreme", "reaction_time"):
        raise ConfigError(
            "config.disturbance_model: expected 'extreme' or 'reaction_time', "
            f"got {model_kind!r}"
        )

    b = _require_mapping(raw.get("bounds", {}), "config.bounds")
    _check_keys(b, {"control", "disturbance"}, "config.bounds")
    control = _pair(b["control"], "config.bounds.control") if "control" in b else [-2.0, 2.0]
    dist = (
        _pair(b["disturbance"], "config.bounds.disturbance")
        if "disturbance" in b
        else [-1.5, 1.5]
    )
    bounds = _build(
        ActuationBounds,
        dict(control_lo=control[0], control_hi=control[1],
             dist_lo=dist[0], dist_hi=dist[1]),
        "config.bounds",
    )

    cb = _require_mapping(raw.get("constraint_box", {}), "config.constraint_box")
    _check_keys(cb, {"gap", "rel_speed"}, "config.constraint_box")
    gap = cb.get("gap", [0.0, None])
    if not isinstance(gap, list) or len(gap) != 2:
        raise ConfigError("config.constraint_box.gap: expected [lo, hi|null]")
    x_lo = _number(gap[0], "config.constraint_box.gap[0]")
    x_hi = math.inf if gap[1] is None else _number(gap[1], "config.constraint_box.gap[1]")
    rs = _pair(cb["rel_speed"], "config.constraint_box.rel_speed") if "rel_speed" in cb else [-10.0, 10.0]
    box = _build(
        ConstraintBox,
        dict(x_lo=x_lo, x_hi=x_hi, v_lo=rs[0], v_hi=rs[1]),
        "config.constraint_box",
    )

    g = _require_mapping(raw.get("grid", {}), "config.grid")
    _check_keys(g, {"shape", "lo", "hi"}, "config.grid")
    gd = _GRID_DEFAULTS[scenario]
    shape = g.get("shape", gd["shape"])
    if not isinstance(shape, list) or not all(
        isinstance(n, int) and not isinstance(n, bool) for n in shape
    ):
        raise ConfigError("config.grid.shape: expected a list of integers")
    lo = _numbers(g.get("lo", gd["lo"]), "config.grid.lo")
    hi = _numbers(g.get("hi", gd["hi"]), "config.grid.hi")
    if len(shape) != dim or len(lo) != dim or len(hi) != dim:
        raise ConfigError(
            f"config.grid: scenario {scenario} needs {dim} dimensions, "
            f"got shape/lo/hi of lengths {len(shape)}/{len(lo)}/{len(hi)}"
        )
    grid = _build(Grid, dict(lo=lo, hi=hi, shape=tuple(shape)), "config.grid")

    s = _require_mapping(raw.get("solver", {}), "config.solver")
    _check_keys(
        s,
        {"cfl", "eps_conv", "tau_max", "boundary_mode", "integrator",
         "conv_band_cells", "conv_consecutive"},
        "config.solver",
    )
    solver = _build(
        SolverSettings,
        dict(
            cfl=_number(s.get("cfl", 0.9), "config.solver.cfl"),
            eps_conv=_number(s.get("eps_conv", 1e-4), "config.solver.eps_conv"),
            tau_max=_number(s.get("tau_max", 150.0), "config.solver.tau_max"),
            boundary_mode=s.get("boundary_mode", "linear"),
            integrator=s.get("integrator", "euler"),
            conv_band_cells=_number(
                s.get("conv_band_cells", 2.0), "config.solver.conv_band_cells"
            ),
            conv_consecutive=_int(
                s.get("conv_consecutive", 10), "config.solver.conv_consecutive"
            ),
        ),
        "config.solver",
    )

    i = _require_mapping(raw.get("idm", {}), "config.idm")
    _check_keys(
        i, {"a", "b", "delta", "v0", "s0", "t_min", "t_max", "v_ego_nominal"},
        "config.idm",
    )
    idm = _build(
        IdmParams,
        dict(
            a=_number(i.get("a", 1.5), "config.idm.a"),
            b=_number(i.get("b", 1.5), "config.idm.b"),
            delta=_number(i.get("delta", 4.0), "config.idm.delta"),
            v0=_number(i.get("v0", 30.0), "config.idm.v0"),
            s0=_number(i.get("s0", 2.0), "config.idm.s0"),
            t_min=_number(i.get("t_min", 0.0), "config.idm.t_min"),
            t_max=_number(i.get("t_max", 2.0), "config.idm.t_max"),
            v_ego_nominal=_number(
                i.get("v_ego_nominal", 10.0), "config.idm.v_ego_nominal"
            ),
        ),
        "config.idm",
    )

    f = _require_mapping(raw.get("filter", {}), "config.filter")
    _check_keys(f, {"activation_margin", "nominal"}, "config.filter")
    filter_cfg = _build(
        SafetyFilterConfig,
        dict(
            activation_margin=_number(
                f.get("activation_margin", 0.0), "config.filter.activation_margin"
            )
        ),
        "config.filter",
    )
    nominal = _parse_nominal(
        f.get("nominal", {"kind": "constant", "accel": 0.0}),
        bounds, idm, "config.filter.nominal",
    )

    sm = _require_mapping(raw.get("simulation", {}), "config.simulation")
    _check_keys(
        sm, {"dt", "horizon", "initial_state", "leader", "follower"},
        "config.simulation",
    )
    if scenario == TWO_CAR and "follower" in sm:
        raise ConfigError(
            "config.simulation.follower: not applicable to the two_car scenario"
        )
    initial = _numbers(
        sm.get("initial_state", _INITIAL_DEFAULTS[scenario]),
        "config.simulation.initial_state",
        n=dim,
    )
    leader = _parse_leader(
        sm.get("leader", {"kind": "constant", "accel": 0.0}),
        bounds, "config.simulation.leader",
    )
    follower = None
    if scenario == THREE_CAR:
        follower = _parse_follower(
            sm.get("follower", {"kind": "idm_fixed_t", "reaction_time": 1.0}),
            bounds, idm, "config.simulation.follower",
        )
    sim = _build(
        SimDefaults,
        dict(
            dt=_number(sm.get("dt", 0.05), "config.simulation.dt"),
            horizon=_number(sm.get("horizon", 10.0), "config.simulation.horizon"),
            initial_state=tuple(initial),
            leader=leader,
            follower=follower,
        ),
        "config.simulation",
    )

    return ScenarioConfig(
        scenario=scenario,
        model_kind=model_kind,
        bounds=bounds,
        box=box,
        grid=grid,
        solver=solver,
        idm=idm,
        filter_cfg=filter_cfg,
        nominal=nominal,
        sim=sim,
    )


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a JSON scenario configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    return from_dict(raw)


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
