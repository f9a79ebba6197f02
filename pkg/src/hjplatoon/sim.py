"""Closed-loop simulation of the platoon scenarios.

The ego runs behind the least-restrictive safety filter; the human cars run
scripted, car-following, or adversarial (value-gradient) behaviors.  Inputs
are held constant over each step (zero-order hold) and the state advances by
a classical 4th-order one-step integration of the relative dynamics, which
is exact to rounding here because the dynamics are linear with nilpotent
state coupling.

Adversarial behaviors read the converged field's gradient.  Where the
gradient is unavailable (outside the domain or within a cell of its edge)
they fall back to scripted extremes: the leader brakes fully, the
extreme-model follower accelerates fully, and the reaction-model follower
uses its minimum reaction time.  The ego filter evaluates value and gradient
at the state clamped into the valid query region, so a single step never
fails; a run stops recording once the state leaves the grid domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    ActuationBounds,
    ConstraintBox,
    V_G1,
    X_G1,
    X_G2,
    constraint_margin,
    flow2,
    flow4,
)
from .errors import NumericalInstabilityError, OutOfDomainError
from .hamiltonian import optimal_control, optimal_d1, optimal_d2_baseline, optimal_d2_reaction
from .idm import IdmParams, idm_accel
from .safe_set import SafetyFilterConfig, gradient_at, safety_filter, value_at
from .solver import ValueField


@dataclass(frozen=True)
class ConstantAccel:
    accel: float = 0.0


@dataclass(frozen=True)
class ScriptedBrake:
    t_start: float = 0.0
    accel: float = -1.5


@dataclass(frozen=True)
class AdversarialLeader:
    """Leader plays the game-optimal disturbance from the field gradient."""


@dataclass(frozen=True)
class IdmFixedT:
    reaction_time: float = 1.0


@dataclass(frozen=True)
class AdversarialFollowerExtreme:
    """Follower plays the extreme-action optimal disturbance."""


@dataclass(frozen=True)
class AdversarialFollowerReaction:
    """Follower plays the optimal reaction time through the car-following law."""


@dataclass(frozen=True)
class NominalConstant:
    accel: float = 0.0


@dataclass(frozen=True)
class NominalIdmLeader:
    """Ego default: follow the leader with the car-following law."""

    reaction_time: float = 1.0


@dataclass(eq=False)
class Trace:
    """Closed-loop record; sample k holds the inputs applied over [t_k, t_k+dt).

    The final sample's input row is NaN (nothing is applied after it).
    ``truncated`` marks a run stopped early by leaving the grid domain.
    """

    t: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    values: np.ndarray
    margins: np.ndarray
    violations: np.ndarray
    first_violation_time: float | None
    truncated: bool

    @property
    def n_steps(self) -> int:
        return self.t.size - 1

    @property
    def violated(self) -> bool:
        return self.first_violation_time is not None


def ego_idm_accel(z, t_react: float, params: IdmParams,
                  bounds: ActuationBounds) -> float:
    """Car-following acceleration for the ego toward the leader, clamped to
    the control bounds.  The ego speed is closed from v_ego_nominal; the
    approach rate to the leader is -v_g1."""
    z = np.asarray(z, dtype=float)
    v_ego = params.v_ego_nominal
    x_g1 = z[X_G1]
    if x_g1 <= 0.0:
        return bounds.control_lo
    raw = v_ego * t_react + v_ego * (-z[V_G1]) / params.accel_scale
    s_star = params.s0 + max(0.0, raw)
    g = params.a * (1.0 - (v_ego / params.v0) ** params.delta - (s_star / x_g1) ** 2)
    return min(bounds.control_hi, max(bounds.control_lo, g))


def integrate_zoh(z, inputs, dt: float) -> np.ndarray:
    """Advance the relative state by dt with inputs held constant (RK4)."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] == 4:
        f = lambda y: flow4(y, *inputs)  # noqa: E731
    else:
        f = lambda y: flow2(y, *inputs)  # noqa: E731
    k1 = f(z)
    k2 = f(z + 0.5 * dt * k1)
    k3 = f(z + 0.5 * dt * k2)
    k4 = f(z + dt * k3)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _gradient_or_none(field: ValueField, z):
    try:
        return gradient_at(field, z)
    except OutOfDomainError:
        return None


def _clamp_into_gradient_domain(field: ValueField, z):
    grid = field.grid
    return np.clip(z, grid.lo + grid.spacing, grid.hi - grid.spacing)


def resolve_leader(behavior, t: float, z, field: ValueField,
                   bounds: ActuationBounds) -> float:
    if isinstance(behavior, ConstantAccel):
        return float(behavior.accel)
    if isinstance(behavior, ScriptedBrake):
        return float(behavior.accel) if t >= behavior.t_start else 0.0
    if isinstance(behavior, AdversarialLeader):
        grad = _gradient_or_none(field, z)
        if grad is None:
            return bounds.dist_lo
        return optimal_d1(grad, bounds)
    raise TypeError(f"unknown leader behavior {behavior!r}")


def resolve_follower(behavior, z, field: ValueField, params: IdmParams,
                     bounds: ActuationBounds) -> float:
    if isinstance(behavior, ConstantAccel):
        return float(behavior.accel)
    if isinstance(behavior, IdmFixedT):
        return float(idm_accel(z, behavior.reaction_time, params, bounds))
    if isinstance(behavior, AdversarialFollowerExtreme):
        grad = _gradient_or_none(field, z)
        if grad is None:
            return bounds.dist_hi
        return optimal_d2_baseline(grad, bounds)
    if isinstance(behavior, AdversarialFollowerReaction):
        grad = _gradient_or_none(field, z)
        if grad is None:
            t_star = params.t_min
        else:
            t_star = optimal_d2_reaction(z, grad, params)
        return float(idm_accel(z, t_star, params, bounds))
    raise TypeError(f"unknown follower behavior {behavior!r}")


def resolve_ego(nominal, z, field: ValueField, cfg: SafetyFilterConfig,
                params: IdmParams, bounds: ActuationBounds) -> float:
    if isinstance(nominal, NominalConstant):
        u_nom = float(nominal.accel)
    elif isinstance(nominal, NominalIdmLeader):
        u_nom = ego_idm_accel(z, nominal.reaction_time, params, bounds)
    else:
        raise TypeError(f"unknown nominal policy {nominal!r}")
    try:
        return safety_filter(field, z, u_nom, cfg, bounds)
    except OutOfDomainError:
        zc = _clamp_into_gradient_domain(field, np.asarray(z, dtype=float))
        if value_at(field, zc) > cfg.activation_margin:
            return u_nom
        return optimal_control(gradient_at(field, zc), bounds)


def step_sim(z, t: float, leader, follower, nominal, field: ValueField,
             cfg: SafetyFilterConfig, params: IdmParams,
             bounds: ActuationBounds, dt: float):
    """Resolve all inputs at (t, z) and advance one step.

    Returns (z_next, inputs) where inputs is (u1, u2) in 2D and
    (u1, u2, u3) in 4D.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    z = np.asarray(z, dtype=float)
    u1 = resolve_leader(leader, t, z, field, bounds)
    u2 = resolve_ego(nominal, z, field, cfg, params, bounds)
    if z.shape[-1] == 4:
        u3 = resolve_follower(follower, z, field, params, bounds)
        inputs = (u1, u2, u3)
    else:
        inputs = (u1, u2)
    z_next = integrate_zoh(z, inputs, dt)
    if not np.isfinite(z_next).all():
        raise NumericalInstabilityError(f"non-finite state after step at t={t}")
    return z_next, inputs


def run(z0, leader, follower, nominal, field: ValueField,
        cfg: SafetyFilterConfig, params: IdmParams, bounds: ActuationBounds,
        box: ConstraintBox, dt: float = 0.05, horizon: float = 10.0) -> Trace:
    """Simulate for ceil(horizon/dt) steps, recording state, inputs, value
    and margin; flags the first instant with a non-positive gap or a negative
    margin.  Recording stops early only if the state leaves the grid domain.
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    z = np.asarray(z0, dtype=float)
    dim = z.shape[-1]
    n_inputs = 3 if dim == 4 else 2
    n_steps = math.ceil(horizon / dt)
    t_grid = np.arange(n_steps + 1) * dt
    states = np.full((n_steps + 1, dim), np.nan)
    inputs = np.full((n_steps + 1, n_inputs), np.nan)
    values = np.full(n_steps + 1, np.nan)
    margins = np.full(n_steps + 1, np.nan)
    violations = np.zeros(n_steps + 1, dtype=bool)
    first_violation = None
    truncated = False
    n_recorded = n_steps + 1
    for k in range(n_steps + 1):
        states[k] = z
        margin = constraint_margin(z, box)
        margins[k] = margin
        min_gap = z[X_G1] if dim == 2 else min(z[X_G1], z[X_G2])
        violations[k] = bool(margin < 0.0 or min_gap <= 0.0)
        if violations[k] and first_violation is None:
            first_violation = float(t_grid[k])
        in_domain = field.grid.contains(z)
        if in_domain:
            values[k] = value_at(field, z)
        else:
            truncated = True
            n_recorded = k + 1
            break
        if k < n_steps:
            z, applied = step_sim(z, float(t_grid[k]), leader, follower, nominal,
                                  field, cfg, params, bounds, dt)
            inputs[k, :] = applied
    return Trace(
        t=t_grid[:n_recorded],
        states=states[:n_recorded],
        inputs=inputs[:n_recorded],
        values=values[:n_recorded],
        margins=margins[:n_recorded],
        violations=violations[:n_recorded],
        first_violation_time=first_violation,
        truncated=truncated,
    )


def trajectory_payoff(trace: Trace, box: ConstraintBox) -> float:
    """Lowest constraint margin reached along the trace."""
    if trace.t.size == 0:
        raise ValueError("empty trace")
    return float(np.min(constraint_margin(trace.states, box)))
