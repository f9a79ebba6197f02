"""Intelligent Driver Model for the following car, driven by a reaction time.

The follower's acceleration is ``g(z, T) = a * (1 - (v3/v0)**delta
- (s_star/x_g2)**2)`` with desired gap ``s_star = s0 + max(0, v3*T
+ v3*(-v_g2) / (2*sqrt(a*b)))``, clamped into the common disturbance bounds.
The reaction time ``T`` is the follower's free input.

The relative state carries no absolute speeds, so the follower speed ``v3``
is closed from a configured nominal ego speed: ``v3 = max(0,
v_ego_nominal - v_g2)``.  All functions broadcast over leading axes of ``z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ActuationBounds, V_G2, X_G2


@dataclass(frozen=True)
class IdmParams:
    """Car-following parameters.

    a / b: maximum acceleration and comfortable deceleration (m/s^2).
    delta: acceleration exponent.
    v0: desired speed (m/s).
    s0: minimum desired headway (m).
    t_min / t_max: bounds of the reaction-time input (s).
    v_ego_nominal: assumed absolute ego speed closing the relative model (m/s).
    """

    a: float = 1.5
    b: float = 1.5
    delta: float = 4.0
    v0: float = 30.0
    s0: float = 2.0
    t_min: float = 0.0
    t_max: float = 2.0
    v_ego_nominal: float = 10.0

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if not self.b > 0.0:
            raise ValueError(f"b must be > 0, got {self.b}")
        if not self.v0 > 0.0:
            raise ValueError(f"v0 must be > 0, got {self.v0}")
        if not self.delta >= 1.0:
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if not self.s0 >= 0.0:
            raise ValueError(f"s0 must be >= 0, got {self.s0}")
        if not (0.0 <= self.t_min < self.t_max):
            raise ValueError(
                f"need 0 <= t_min < t_max, got [{self.t_min}, {self.t_max}]"
            )
        if not self.v_ego_nominal >= 0.0:
            raise ValueError(f"v_ego_nominal must be >= 0, got {self.v_ego_nominal}")

    @property
    def accel_scale(self) -> float:
        """The 2*sqrt(a*b) braking scale of the desired-gap term."""
        return 2.0 * math.sqrt(self.a * self.b)


def follower_speed(z, params: IdmParams):
    """Follower absolute speed, clamped at zero (no reversing)."""
    z = np.asarray(z, dtype=float)
    v3 = np.maximum(0.0, params.v_ego_nominal - z[..., V_G2])
    if v3.ndim == 0:
        return float(v3)
    return v3


def desired_gap(z, t_react, params: IdmParams):
    """Desired headway of the follower for reaction time ``t_react``; >= s0."""
    z = np.asarray(z, dtype=float)
    v3 = np.maximum(0.0, params.v_ego_nominal - z[..., V_G2])
    raw = v3 * t_react + v3 * (-z[..., V_G2]) / params.accel_scale
    s = params.s0 + np.maximum(0.0, raw)
    if s.ndim == 0:
        return float(s)
    return s


def idm_accel(z, t_react, params: IdmParams, bounds: ActuationBounds):
    """Follower acceleration, clamped into [dist_lo, dist_hi].

    A non-positive rear gap is a crash regime; it maps to maximum braking
    rather than evaluating the singular gap ratio, so the function is total.
    """
    z = np.asarray(z, dtype=float)
    v3 = np.maximum(0.0, params.v_ego_nominal - z[..., V_G2])
    raw = v3 * t_react + v3 * (-z[..., V_G2]) / params.accel_scale
    s_star = params.s0 + np.maximum(0.0, raw)
    x_g2 = z[..., X_G2]
    x_safe = np.where(x_g2 > 0.0, x_g2, 1.0)
    g = params.a * (1.0 - (v3 / params.v0) ** params.delta - (s_star / x_safe) ** 2)
    g = np.where(x_g2 > 0.0, g, bounds.dist_lo)
    out = np.minimum(bounds.dist_hi, np.maximum(bounds.dist_lo, g))
    if out.ndim == 0:
        return float(out)
    return out
