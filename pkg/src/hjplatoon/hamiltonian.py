"""Pointwise optimal policies and the game Hamiltonian.

The ego maximizes and both human cars minimize the payoff, so the value
gradient (costate) ``p`` determines every player's bang-bang input:

* ego:       ``u2* = control_hi if (p4 - p2) > 0 else control_lo``
* leader:    ``d1* = dist_hi if p2 < 0 else dist_lo``
* follower, extreme-action model: ``u3* = dist_hi if p4 > 0 else dist_lo``
* follower, reaction-time model: a reaction time ``T*`` chosen from the sign
  of p4, then passed through the car-following law.

Ties at zero fall to the ``else`` branch throughout.  The dynamics are affine
in the inputs and each input multiplies a distinct costate component (u2
multiplies ``p4 - p2``), so optimizing each input pointwise attains the
max-min exactly.

Costates are float arrays of length 2 or 4, ordered like the state
(p1 = dV/dx_g1, p2 = dV/dv_g1, p3 = dV/dx_g2, p4 = dV/dv_g2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ActuationBounds, V_G1, V_G2, X_G1
from .idm import IdmParams, idm_accel

EXTREME = "extreme"
REACTION = "reaction_time"


@dataclass(frozen=True)
class DisturbanceModel:
    """Follower model: raw extreme actions, or reaction-time-driven IDM."""

    kind: str
    idm: IdmParams | None = None

    def __post_init__(self):
        if self.kind not in (EXTREME, REACTION):
            raise ValueError(f"unknown disturbance model {self.kind!r}")
        if self.kind == REACTION and self.idm is None:
            raise ValueError("reaction_time model requires IdmParams")

    @staticmethod
    def extreme() -> "DisturbanceModel":
        return DisturbanceModel(EXTREME)

    @staticmethod
    def reaction_time(idm: IdmParams | None = None) -> "DisturbanceModel":
        return DisturbanceModel(REACTION, idm if idm is not None else IdmParams())


def optimal_control(p, bounds: ActuationBounds) -> float:
    """Ego acceleration maximizing the Hamiltonian; ties brake."""
    p = np.asarray(p, dtype=float)
    p4 = p[3] if p.shape[-1] == 4 else 0.0
    return bounds.control_hi if (p4 - p[1]) > 0.0 else bounds.control_lo


def optimal_d1(p, bounds: ActuationBounds) -> float:
    """Leader acceleration minimizing the Hamiltonian."""
    p = np.asarray(p, dtype=float)
    return bounds.dist_hi if p[1] < 0.0 else bounds.dist_lo


def optimal_d2_baseline(p, bounds: ActuationBounds) -> float:
    """Follower acceleration minimizing the Hamiltonian, extreme-action model."""
    p = np.asarray(p, dtype=float)
    return bounds.dist_hi if p[3] > 0.0 else bounds.dist_lo


def _reaction_branch_times(v_g2: float, params: IdmParams) -> tuple[float, float]:
    """Reaction times of the two policy branches at a given v_g2."""
    w = params.accel_scale
    t_first = min(params.t_max, max(params.t_min, -v_g2 / w))
    hi = abs(w * params.t_max + v_g2)
    lo = abs(w * params.t_min + v_g2)
    t_else = params.t_max if hi >= lo else params.t_min
    return t_first, t_else


def optimal_d2_reaction(z, p, params: IdmParams) -> float:
    """Follower reaction time for the reaction-time model.

    For p4 > 0 the reaction time that zeroes the dynamic part of the desired
    gap, clamped into [t_min, t_max]; otherwise the endpoint maximizing
    ``|2*sqrt(a*b)*T + v_g2|`` (the maximand is convex in T, so an endpoint
    attains the max; ties go to t_max).
    """
    z = np.asarray(z, dtype=float)
    p = np.asarray(p, dtype=float)
    t_first, t_else = _reaction_branch_times(float(z[V_G2]), params)
    return t_first if p[3] > 0.0 else t_else


def follower_input(z, p, model: DisturbanceModel, bounds: ActuationBounds) -> float:
    """Follower acceleration under either disturbance model."""
    if model.kind == EXTREME:
        return optimal_d2_baseline(p, bounds)
    t_star = optimal_d2_reaction(z, p, model.idm)
    return float(idm_accel(z, t_star, model.idm, bounds))


def hamiltonian(z, p, model: DisturbanceModel, bounds: ActuationBounds) -> float:
    """Game Hamiltonian max_u2 min_d p . f(z, u2, d) at a single point.

    Accepts 2D states (leader pair only; the follower terms vanish) and 4D
    states under either follower model.
    """
    z = np.asarray(z, dtype=float)
    p = np.asarray(p, dtype=float)
    if z.shape != p.shape or z.shape[-1] not in (2, 4):
        raise ValueError(f"state/costate shape mismatch: {z.shape} vs {p.shape}")
    u2 = optimal_control(p, bounds)
    d1 = optimal_d1(p, bounds)
    h = p[X_G1] * z[V_G1] + p[1] * (d1 - u2)
    if z.shape[-1] == 4:
        u3 = follower_input(z, p, model, bounds)
        h = h + p[2] * z[V_G2]
        h = h + p[3] * (u2 - u3)
    return float(h)


def dissipation_bounds(grid, model: DisturbanceModel, bounds: ActuationBounds) -> np.ndarray:
    """Domain-wide bounds on |dH/dp_i| for the numerical scheme.

    Gap components advect at the relative speed, so their bound is the
    largest speed magnitude in the domain; speed components see the worst
    input difference.  The follower input is clamped into the disturbance
    bounds under both models, so one formula serves both.
    """
    lo = np.asarray(grid.lo, dtype=float)
    hi = np.asarray(grid.hi, dtype=float)
    input_span = max(bounds.dist_hi - bounds.control_lo,
                     bounds.control_hi - bounds.dist_lo)
    alphas = np.empty(lo.shape[0])
    for k in range(lo.shape[0]):
        if k % 2 == 0:
            paired_v = k + 1
            alphas[k] = max(abs(lo[paired_v]), abs(hi[paired_v]))
        else:
            alphas[k] = input_span
    return alphas
