"""Rectangular uniform grid over the relative state space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class Grid:
    """Uniform tensor grid with 2 or 4 dimensions.

    lo/hi are the node extents per dimension; shape the node counts.  At
    least 3 nodes per dimension are required so one-sided differences have a
    neighbor on each side after ghost extrapolation.
    """

    lo: np.ndarray
    hi: np.ndarray
    shape: tuple[int, ...]
    axes: tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        self.shape = tuple(int(n) for n in self.shape)
        dim = len(self.shape)
        if dim not in (2, 4):
            raise ValueError(f"grid must be 2- or 4-dimensional, got {dim}")
        if self.lo.shape != (dim,) or self.hi.shape != (dim,):
            raise ValueError("lo/hi must match the grid dimension")
        if not (np.isfinite(self.lo).all() and np.isfinite(self.hi).all()):
            raise ValueError("grid extents must be finite")
        if not (self.lo < self.hi).all():
            raise ValueError("grid extents must be strictly ordered (lo < hi)")
        if any(n < 3 for n in self.shape):
            raise ValueError(f"need at least 3 nodes per dimension, got {self.shape}")
        self.axes = tuple(
            np.linspace(self.lo[k], self.hi[k], self.shape[k]) for k in range(dim)
        )

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> np.ndarray:
        return (self.hi - self.lo) / (np.array(self.shape) - 1)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def node_state(self, index) -> np.ndarray:
        """State coordinates of a node given its multi-index."""
        return np.array([self.axes[k][i] for k, i in enumerate(index)])

    def contains(self, z) -> bool:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            return False
        return bool((z >= self.lo).all() and (z <= self.hi).all())

    def same_lattice(self, other: "Grid") -> bool:
        return (
            self.shape == other.shape
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
        )
