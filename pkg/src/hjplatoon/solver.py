"""Level-set solver for the minimum-payoff safety game.

The value field starts at the constraint margin and evolves under the frozen
variational inequality

    V <- V + dt * min(0, Hhat(z, DV))

where ``Hhat`` is a Lax-Friedrichs numerical Hamiltonian.  Values never
increase, so the zero superlevel set shrinks monotonically toward the
invariant safe set.  Decreases are floored at the smallest constraint margin
on the grid, which keeps the field bounded and lets the iteration reach a
genuine fixed point.

Convergence is measured on the zero-level band (nodes within a few cells of
V = 0 in value units): interior plateau values keep losing a slow trickle to
the scheme's dissipation long after the safe-set boundary has frozen, so a
global max-norm test would never fire at first order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from ._backend import apply_worker_limit, select_backend
from .dynamics import ActuationBounds, ConstraintBox, constraint_margin
from .errors import NumericalInstabilityError
from .grid import Grid
from .hamiltonian import (
    DisturbanceModel,
    dissipation_bounds,
    follower_input,
    hamiltonian,
    optimal_control,
    optimal_d1,
)

_INTEGRATORS = ("euler", "rk2")


@dataclass(frozen=True)
class SolverSettings:
    """Tunables of the explicit scheme.

    cfl: Courant factor in (0, 1].
    eps_conv: convergence tolerance on max value change per unit time,
        measured over the zero-level band.
    tau_max: backward-horizon cap in seconds.
    boundary_mode: ghost-node rule; only linear extrapolation is supported.
    integrator: "euler" (default) or "rk2" (two-stage strong-stability run
        of the same right-hand side).
    conv_band_cells: half-width of the convergence band, in units of the
        largest grid spacing.
    conv_consecutive: number of consecutive in-tolerance steps required.
    """

    cfl: float = 0.9
    eps_conv: float = 1e-4
    tau_max: float = 150.0
    boundary_mode: str = "linear"
    integrator: str = "euler"
    conv_band_cells: float = 2.0
    conv_consecutive: int = 10

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must be in (0, 1], got {self.cfl}")
        if not self.eps_conv > 0.0:
            raise ValueError(f"eps_conv must be > 0, got {self.eps_conv}")
        if not self.tau_max > 0.0:
            raise ValueError(f"tau_max must be > 0, got {self.tau_max}")
        if self.boundary_mode != "linear":
            raise ValueError(f"unsupported boundary_mode {self.boundary_mode!r}")
        if self.integrator not in _INTEGRATORS:
            raise ValueError(f"integrator must be one of {_INTEGRATORS}")
        if not self.conv_band_cells > 0.0:
            raise ValueError("conv_band_cells must be > 0")
        if self.conv_consecutive < 1:
            raise ValueError("conv_consecutive must be >= 1")


@dataclass(eq=False)
class ValueField:
    """Value function samples on a grid, with the accumulated horizon."""

    grid: Grid
    values: np.ndarray
    tau: float = 0.0
    iterations: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    def validate_finite(self) -> None:
        if not np.isfinite(self.values).all():
            node = tuple(int(i) for i in np.argwhere(~np.isfinite(self.values))[0])
            raise NumericalInstabilityError(
                f"non-finite value at node {node}", node=node
            )


@dataclass(frozen=True)
class SolveResult:
    field: ValueField
    converged: bool
    final_change_rate: float


def initialize(grid: Grid, box: ConstraintBox) -> ValueField:
    """Value field at horizon zero: the constraint margin at every node.

    Broadcasts one axis at a time instead of materializing the full state
    mesh (which would dwarf the field itself in 4D).
    """
    values = np.full(grid.shape, np.inf)
    for k in range(grid.dim):
        shape = [1] * grid.dim
        shape[k] = grid.shape[k]
        c = grid.axes[k].reshape(shape)
        if k % 2 == 0:
            values = np.minimum(values, c - box.x_lo)
            if np.isfinite(box.x_hi):
                values = np.minimum(values, box.x_hi - c)
        else:
            values = np.minimum(values, c - box.v_lo)
            values = np.minimum(values, box.v_hi - c)
    return ValueField(grid, values, tau=0.0, iterations=0)


def value_floor(grid: Grid, box: ConstraintBox) -> float:
    """Smallest constraint margin over the grid (attained at a corner)."""
    best = np.inf
    for corner in itertools.product(*((lo, hi) for lo, hi in zip(grid.lo, grid.hi))):
        best = min(best, constraint_margin(np.array(corner), box))
    return float(best)


def one_sided_gradients(field: ValueField, node) -> tuple[np.ndarray, np.ndarray]:
    """Backward/forward difference pair at a node, per dimension.

    Ghost nodes extrapolate linearly from the outermost two values, which
    makes the boundary one-sided difference equal its interior neighbor.
    """
    grid = field.grid
    v = field.values
    node = tuple(int(i) for i in node)
    spacing = grid.spacing
    p_minus = np.empty(grid.dim)
    p_plus = np.empty(grid.dim)
    vc = v[node]
    for k in range(grid.dim):
        n_k = grid.shape[k]
        lo_idx = list(node)
        hi_idx = list(node)
        lo_idx[k] -= 1
        hi_idx[k] += 1
        inv = 1.0 / spacing[k]
        if node[k] > 0:
            p_minus[k] = (vc - v[tuple(lo_idx)]) * inv
        else:
            p_minus[k] = (v[tuple(hi_idx)] - vc) * inv
        if node[k] < n_k - 1:
            p_plus[k] = (v[tuple(hi_idx)] - vc) * inv
        else:
            p_plus[k] = (vc - v[tuple(lo_idx)]) * inv
    return p_minus, p_plus


def lf_numerical_hamiltonian(z, p_minus, p_plus, alphas, model: DisturbanceModel,
                             bounds: ActuationBounds) -> float:
    """Lax-Friedrichs numerical Hamiltonian with caller-supplied dissipation.

    Consistent: equals the analytic Hamiltonian whenever the one-sided
    gradients agree.  The dissipation term carries the sign that makes the
    forward update ``V + dt*min(0, Hhat)`` monotone, i.e. gradient jumps at
    ridges lower ``Hhat``.
    """
    p_minus = np.asarray(p_minus, dtype=float)
    p_plus = np.asarray(p_plus, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    p_mean = 0.5 * (p_minus + p_plus)
    h = hamiltonian(z, p_mean, model, bounds)
    return float(h + 0.5 * np.dot(alphas, p_plus - p_minus))


def _local_alphas(z, p_minus, p_plus, u2, d1, u3_candidates, alpha_in):
    """Per-node dissipation: exact advection speeds on gap dimensions; on
    speed dimensions the realized input difference wherever the bang-bang
    switch signs (p2, p4, and p4 - p2 at matched one-sided corners) are
    stable across the cell, else the domain-wide input span."""
    dim = len(p_minus)
    alphas = np.empty(dim)
    alphas[0] = abs(z[1])
    pm2, pp2 = p_minus[1], p_plus[1]
    p2_sgn = (pm2 > 0.0 and pp2 > 0.0) or (pm2 < 0.0 and pp2 < 0.0)
    if dim == 2:
        alphas[1] = abs(d1 - u2) if p2_sgn else alpha_in
        return alphas
    alphas[2] = abs(z[3])
    pm4, pp4 = p_minus[3], p_plus[3]
    p4_sgn = (pm4 > 0.0 and pp4 > 0.0) or (pm4 < 0.0 and pp4 < 0.0)
    s24m = pm4 - pm2
    s24p = pp4 - pp2
    sw_sgn = (s24m > 0.0 and s24p > 0.0) or (s24m < 0.0 and s24p < 0.0)
    alphas[1] = abs(d1 - u2) if (p2_sgn and sw_sgn) else alpha_in
    if p4_sgn and sw_sgn:
        alphas[3] = max(abs(u2 - u3) for u3 in u3_candidates)
    else:
        alphas[3] = alpha_in
    return alphas


def time_step(grid: Grid, model: DisturbanceModel, bounds: ActuationBounds,
              settings: SolverSettings) -> float:
    """CFL-respecting explicit time step for the grid and input bounds."""
    alphas = dissipation_bounds(grid, model, bounds)
    return float(settings.cfl / np.sum(alphas / grid.spacing))


def _euler_apply(values, out, grid: Grid, model: DisturbanceModel,
                 bounds: ActuationBounds, dt: float, floor: float, backend: str):
    reaction = model.kind == "reaction_time"
    idm = model.idm
    if idm is None:
        from .idm import IdmParams

        idm = IdmParams()
    alpha_in = max(bounds.dist_hi - bounds.control_lo,
                   bounds.control_hi - bounds.dist_lo)
    inv = 1.0 / grid.spacing
    if backend == "numba":
        from . import _kernels_numba as kern
    else:
        from . import _kernels_numpy as kern
    if grid.dim == 2:
        kern.sweep_2d(values, out, grid.axes[1], inv[0], inv[1], alpha_in,
                      dt, floor, bounds.control_lo, bounds.control_hi,
                      bounds.dist_lo, bounds.dist_hi)
    else:
        kern.sweep_4d(values, out, grid.axes[1], grid.axes[2], grid.axes[3],
                      inv[0], inv[1], inv[2], inv[3], alpha_in, dt, floor,
                      bounds.control_lo, bounds.control_hi,
                      bounds.dist_lo, bounds.dist_hi, reaction,
                      idm.a, idm.b, idm.delta, idm.v0, idm.s0,
                      idm.t_min, idm.t_max, idm.v_ego_nominal)


def step(field: ValueField, settings: SolverSettings, model: DisturbanceModel,
         bounds: ActuationBounds, box: ConstraintBox,
         backend: str | None = None) -> tuple[ValueField, float]:
    """One explicit update of the whole field; returns (new field, max change).

    The update never raises any node and never drops one below the grid's
    smallest constraint margin, so ``min(l) <= V <= l`` holds throughout.
    """
    backend = select_backend(backend)
    grid = field.grid
    dt = time_step(grid, model, bounds, settings)
    floor = value_floor(grid, box)
    v = field.values
    out = np.empty_like(v)
    if settings.integrator == "euler":
        _euler_apply(v, out, grid, model, bounds, dt, floor, backend)
        new = out
    else:
        stage = np.empty_like(v)
        _euler_apply(v, stage, grid, model, bounds, dt, floor, backend)
        _euler_apply(stage, out, grid, model, bounds, dt, floor, backend)
        new = 0.5 * (v + out)
    with np.errstate(invalid="ignore"):
        max_change = float(np.max(np.abs(new - v)))
    if not np.isfinite(max_change):
        bad = ~np.isfinite(new)
        node = tuple(int(i) for i in np.argwhere(bad)[0]) if bad.any() else None
        raise NumericalInstabilityError(
            f"sweep produced a non-finite value at node {node} "
            f"(iteration {field.iterations + 1})",
            node=node,
        )
    new_field = ValueField(grid, new, tau=field.tau + dt,
                           iterations=field.iterations + 1)
    return new_field, max_change


def step_reference(field: ValueField, settings: SolverSettings,
                   model: DisturbanceModel, bounds: ActuationBounds,
                   box: ConstraintBox) -> tuple[ValueField, float]:
    """Slow per-node reference of one Euler update, built from the public
    pointwise operations.  Used to cross-check the vectorized backends."""
    grid = field.grid
    dt = time_step(grid, model, bounds, settings)
    floor = value_floor(grid, box)
    alpha_in = max(bounds.dist_hi - bounds.control_lo,
                   bounds.control_hi - bounds.dist_lo)
    v = field.values
    out = np.empty_like(v)
    for node in np.ndindex(grid.shape):
        z = grid.node_state(node)
        p_minus, p_plus = one_sided_gradients(field, node)
        p_mean = 0.5 * (p_minus + p_plus)
        u2 = optimal_control(p_mean, bounds)
        d1 = optimal_d1(p_mean, bounds)
        if grid.dim == 4:
            u3 = follower_input(z, p_mean, model, bounds)
            if model.kind == "reaction_time":
                from .hamiltonian import _reaction_branch_times
                from .idm import idm_accel

                t_first, t_else = _reaction_branch_times(float(z[3]), model.idm)
                u3_candidates = (
                    float(idm_accel(z, t_first, model.idm, bounds)),
                    float(idm_accel(z, t_else, model.idm, bounds)),
                )
            else:
                u3_candidates = (u3,)
        else:
            u3_candidates = (0.0,)
        alphas = _local_alphas(z, p_minus, p_plus, u2, d1, u3_candidates, alpha_in)
        hhat = lf_numerical_hamiltonian(z, p_minus, p_plus, alphas, model, bounds)
        vn = v[node] + dt * min(0.0, hhat)
        if vn < floor:
            vn = min(v[node], floor)
        out[node] = vn
    max_change = float(np.max(np.abs(out - v)))
    new_field = ValueField(grid, out, tau=field.tau + dt,
                           iterations=field.iterations + 1)
    return new_field, max_change


def solve(grid: Grid, box: ConstraintBox, model: DisturbanceModel,
          bounds: ActuationBounds, settings: SolverSettings | None = None,
          backend: str | None = None, on_iteration=None) -> SolveResult:
    """Iterate the update until the zero-level band settles or tau_max.

    ``on_iteration(iteration, tau, max_change, values)`` is invoked after
    every step with a read-only view of the current values.
    """
    settings = settings if settings is not None else SolverSettings()
    backend = select_backend(backend)
    apply_worker_limit()
    field = initialize(grid, box)
    band = settings.conv_band_cells * float(grid.spacing.max())
    dt = time_step(grid, model, bounds, settings)
    in_tol = 0
    converged = False
    rate = np.inf
    while field.tau < settings.tau_max:
        prev = field.values
        field, max_change = step(field, settings, model, bounds, box, backend)
        diff = np.abs(field.values - prev)
        in_band = np.abs(prev) <= band
        band_change = float(diff[in_band].max()) if in_band.any() else 0.0
        rate = band_change / dt
        if on_iteration is not None:
            on_iteration(field.iterations, field.tau, max_change, field.values)
        if rate < settings.eps_conv:
            in_tol += 1
            if in_tol >= settings.conv_consecutive:
                converged = True
                break
        else:
            in_tol = 0
    return SolveResult(field=field, converged=converged, final_change_rate=rate)
