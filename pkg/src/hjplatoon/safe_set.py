"""Queries against a converged value field: membership, interpolation,
gradients, least-restrictive filtering, and slice extraction.

All queries refuse to extrapolate: a state outside the grid raises
:class:`OutOfDomainError`.  Silent extrapolation of safety values would be
the worst possible failure mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ActuationBounds, dim_names
from .errors import OutOfDomainError
from .hamiltonian import optimal_control
from .solver import ValueField


@dataclass(frozen=True)
class SafetyFilterConfig:
    """Least-restrictive filter: pass the nominal input through until the
    value drops to ``activation_margin``, then apply the game-optimal
    control."""

    activation_margin: float = 0.0

    def __post_init__(self):
        if self.activation_margin < 0.0:
            raise ValueError(
                f"activation_margin must be >= 0, got {self.activation_margin}"
            )


def _interpolate(field: ValueField, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation at points of shape (n, dim), all in-domain.

    Cells are located against the actual axis coordinates so that a query
    exactly on a node gets weight exactly 0/1 and returns the stored value.
    """
    grid = field.grid
    base = np.empty(points.shape, dtype=int)
    w = np.empty(points.shape)
    for k in range(grid.dim):
        axis = grid.axes[k]
        idx = np.searchsorted(axis, points[:, k], side="right") - 1
        idx = np.clip(idx, 0, grid.shape[k] - 2)
        base[:, k] = idx
        w[:, k] = (points[:, k] - axis[idx]) / (axis[idx + 1] - axis[idx])
    out = np.zeros(points.shape[0])
    for corner in np.ndindex(*(2,) * grid.dim):
        idx = tuple(base[:, k] + corner[k] for k in range(grid.dim))
        weight = np.ones(points.shape[0])
        for k in range(grid.dim):
            weight = weight * (w[:, k] if corner[k] else 1.0 - w[:, k])
        out += weight * field.values[idx]
    return out


def _require_in_domain(field: ValueField, z: np.ndarray) -> None:
    grid = field.grid
    if z.shape != (grid.dim,):
        raise OutOfDomainError(
            f"state has {z.shape[0] if z.ndim == 1 else '?'} components, "
            f"field is {grid.dim}-dimensional"
        )
    if not ((z >= grid.lo).all() and (z <= grid.hi).all()):
        raise OutOfDomainError(f"state {z.tolist()} outside grid domain")


def value_at(field: ValueField, z) -> float:
    """Interpolated value; exact at nodes; errors outside the domain."""
    z = np.asarray(z, dtype=float)
    _require_in_domain(field, z)
    return float(_interpolate(field, z[None, :])[0])


def gradient_at(field: ValueField, z) -> np.ndarray:
    """Costate estimate by central differences of the interpolant.

    Steps half a cell per dimension, so the state must sit at least one cell
    inside the domain.
    """
    z = np.asarray(z, dtype=float)
    grid = field.grid
    _require_in_domain(field, z)
    spacing = grid.spacing
    if ((z < grid.lo + spacing) | (z > grid.hi - spacing)).any():
        raise OutOfDomainError(
            f"state {z.tolist()} too close to the domain boundary for gradients"
        )
    queries = np.repeat(z[None, :], 2 * grid.dim, axis=0)
    for k in range(grid.dim):
        h = 0.5 * spacing[k]
        queries[2 * k, k] += h
        queries[2 * k + 1, k] -= h
    vals = _interpolate(field, queries)
    grad = np.empty(grid.dim)
    for k in range(grid.dim):
        grad[k] = (vals[2 * k] - vals[2 * k + 1]) / spacing[k]
    return grad


def is_safe(field: ValueField, z, margin: float = 0.0) -> bool:
    """Strict membership in the safe superlevel set {V > margin}."""
    return value_at(field, z) > margin


def safety_filter(field: ValueField, z, u_nominal: float,
                  cfg: SafetyFilterConfig, bounds: ActuationBounds) -> float:
    """Nominal input while safely above the margin, else the optimal control."""
    if not (bounds.control_lo <= u_nominal <= bounds.control_hi):
        raise ValueError(
            f"nominal control {u_nominal} outside [{bounds.control_lo}, {bounds.control_hi}]"
        )
    if value_at(field, z) > cfg.activation_margin:
        return float(u_nominal)
    return optimal_control(gradient_at(field, z), bounds)


@dataclass(frozen=True)
class FieldSlice:
    """2D restriction of a field with the coordinates of its two free axes."""

    values: np.ndarray
    row_dim: str
    col_dim: str
    row_coords: np.ndarray
    col_coords: np.ndarray
    fixed: dict[str, float]


def extract_slice(field: ValueField, fixed: dict) -> FieldSlice:
    """Interpolated 2D slice over the two free dimensions at native resolution.

    ``fixed`` maps dimension names (or indices) to values; exactly two
    dimensions must remain free.  Row/column order follows the state order.
    """
    grid = field.grid
    names = dim_names(grid.dim)
    fixed_idx: dict[int, float] = {}
    for key, val in fixed.items():
        if isinstance(key, str):
            if key not in names:
                raise ValueError(f"unknown dimension {key!r}; expected one of {names}")
            k = names.index(key)
        else:
            k = int(key)
            if not 0 <= k < grid.dim:
                raise ValueError(f"dimension index {k} out of range for {grid.dim}D")
        if k in fixed_idx:
            raise ValueError(f"dimension {names[k]} fixed twice")
        fixed_idx[k] = float(val)
    free = [k for k in range(grid.dim) if k not in fixed_idx]
    if len(free) != 2:
        raise ValueError(
            f"need exactly two free dimensions, got {len(free)} "
            f"(fix {grid.dim - 2} of {names})"
        )
    for k, val in fixed_idx.items():
        if not (grid.lo[k] <= val <= grid.hi[k]):
            raise OutOfDomainError(
                f"fixed value {names[k]}={val} outside [{grid.lo[k]}, {grid.hi[k]}]"
            )
    r, c = free
    rows = grid.axes[r]
    cols = grid.axes[c]
    points = np.empty((rows.size * cols.size, grid.dim))
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    points[:, r] = rr.ravel()
    points[:, c] = cc.ravel()
    for k, val in fixed_idx.items():
        points[:, k] = val
    values = _interpolate(field, points).reshape(rows.size, cols.size)
    return FieldSlice(
        values=values,
        row_dim=names[r],
        col_dim=names[c],
        row_coords=rows.copy(),
        col_coords=cols.copy(),
        fixed={names[k]: v for k, v in sorted(fixed_idx.items())},
    )


def safe_volume_fraction(field: ValueField, margin: float = 0.0) -> float:
    """Fraction of grid nodes strictly above the margin."""
    return float((field.values > margin).sum()) / field.grid.n_nodes
