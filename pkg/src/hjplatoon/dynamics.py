"""Relative-state dynamics of the two- and three-car platoon.

States are plain float arrays. The 4D (three-car) state is

    z = [x_g1, v_g1, x_g2, v_g2]

where ``x_g1`` is the gap from the ego to the leader, ``v_g1`` the leader
speed minus the ego speed (negative means the ego is closing on the leader),
``x_g2`` the gap from the follower to the ego, and ``v_g2`` the ego speed
minus the follower speed (negative means the follower is closing on the ego).
The 2D (two-car) state carries only ``[x_g1, v_g1]``.

Gaps may be negative: a crash regime is a representable state, and safety is
judged by :func:`constraint_margin`, not by the type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

X_G1, V_G1, X_G2, V_G2 = 0, 1, 2, 3

DIM_NAMES_2D = ("x_g1", "v_g1")
DIM_NAMES_4D = ("x_g1", "v_g1", "x_g2", "v_g2")


def dim_names(dim: int) -> tuple[str, ...]:
    if dim == 2:
        return DIM_NAMES_2D
    if dim == 4:
        return DIM_NAMES_4D
    raise ValueError(f"unsupported state dimension {dim}")


@dataclass(frozen=True)
class ActuationBounds:
    """Acceleration bounds for the ego (control) and the human cars (disturbance)."""

    control_lo: float = -2.0
    control_hi: float = 2.0
    dist_lo: float = -1.5
    dist_hi: float = 1.5

    def __post_init__(self):
        if not (self.control_lo < 0.0 < self.control_hi):
            raise ValueError(
                f"control bounds must straddle zero, got [{self.control_lo}, {self.control_hi}]"
            )
        if not (self.dist_lo < 0.0 < self.dist_hi):
            raise ValueError(
                f"disturbance bounds must straddle zero, got [{self.dist_lo}, {self.dist_hi}]"
            )


@dataclass(frozen=True)
class ConstraintBox:
    """Per-pair box of instantaneously safe gaps and relative speeds.

    The same (gap, relative speed) box applies to the leader pair and, in 4D,
    to the follower pair.  ``x_hi`` may be ``inf``: gaps are then only bounded
    from below, which matches "never collide" without penalizing large gaps.
    """

    x_lo: float = 0.0
    x_hi: float = math.inf
    v_lo: float = -10.0
    v_hi: float = 10.0

    def __post_init__(self):
        if not self.x_lo >= 0.0:
            raise ValueError(f"x_lo must be >= 0, got {self.x_lo}")
        if not self.x_lo < self.x_hi:
            raise ValueError(f"need x_lo < x_hi, got [{self.x_lo}, {self.x_hi}]")
        if not (self.v_lo < self.v_hi):
            raise ValueError(f"need v_lo < v_hi, got [{self.v_lo}, {self.v_hi}]")
        if not (math.isfinite(self.v_lo) and math.isfinite(self.v_hi)):
            raise ValueError("relative-speed bounds must be finite")


def flow4(z, u1: float, u2: float, u3: float) -> np.ndarray:
    """Time derivative of the 4D relative state for accelerations (u1, u2, u3)."""
    z = np.asarray(z, dtype=float)
    return np.array([z[V_G1], u1 - u2, z[V_G2], u2 - u3])


def flow2(z, u1: float, u2: float) -> np.ndarray:
    """Time derivative of the 2D relative state for accelerations (u1, u2)."""
    z = np.asarray(z, dtype=float)
    return np.array([z[V_G1], u1 - u2])


def constraint_margin(z, box: ConstraintBox):
    """Signed margin to the nearest constraint face, positive inside.

    ``z`` may be a single state of length 2 or 4, or an array whose last axis
    is the state dimension; the margin is the minimum over all face distances
    of the box (per gap/relative-speed pair). Exactly zero on a face.
    """
    z = np.asarray(z, dtype=float)
    dim = z.shape[-1]
    if dim not in (2, 4):
        raise ValueError(f"state must have 2 or 4 components, got {dim}")
    m = np.minimum(z[..., X_G1] - box.x_lo, box.v_hi - z[..., V_G1])
    m = np.minimum(m, z[..., V_G1] - box.v_lo)
    if math.isfinite(box.x_hi):
        m = np.minimum(m, box.x_hi - z[..., X_G1])
    if dim == 4:
        m = np.minimum(m, z[..., X_G2] - box.x_lo)
        m = np.minimum(m, z[..., V_G2] - box.v_lo)
        m = np.minimum(m, box.v_hi - z[..., V_G2])
        if math.isfinite(box.x_hi):
            m = np.minimum(m, box.x_hi - z[..., X_G2])
    if m.ndim == 0:
        return float(m)
    return m
