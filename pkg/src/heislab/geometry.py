"""Axis-aligned boxes in R^{2n} and regular grids over them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

__all__ = ["Box"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by center and positive half-widths."""

    center: np.ndarray
    half_widths: np.ndarray

    def __post_init__(self):
        c = np.array(self.center, dtype=float, copy=True)
        h = np.array(self.half_widths, dtype=float, copy=True)
        if c.shape != h.shape or c.ndim != 1:
            raise InvalidArgumentError("center and half_widths must be 1-d of equal length")
        if not np.all(h > 0):
            raise InvalidArgumentError("half_widths must be positive")
        c.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_widths", h)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def lo(self) -> np.ndarray:
        return self.center - self.half_widths

    @property
    def hi(self) -> np.ndarray:
        return self.center + self.half_widths

    @property
    def volume(self) -> float:
        return float(np.prod(2.0 * self.half_widths))

    @property
    def inscribed_radius(self) -> float:
        return float(np.min(self.half_widths))

    def contains(self, points: np.ndarray, pad: float = 0.0) -> np.ndarray:
        """Boolean mask of points (..., dim) inside the box (padded by pad)."""
        points = np.asarray(points, dtype=float)
        return np.all(np.abs(points - self.center) <= self.half_widths + pad, axis=-1)

    def corner(self) -> np.ndarray:
        """The low corner; a canonical anchor point on the boundary."""
        return self.lo.copy()

    def axes(self, shape) -> list:
        """Per-axis node coordinates for a regular grid of the given shape."""
        shape = self._grid_shape(shape)
        return [np.linspace(self.lo[i], self.hi[i], shape[i]) for i in range(self.dim)]

    def grid(self, shape) -> np.ndarray:
        """Regular grid of nodes, shape (*shape, dim), spanning the box."""
        axes = self.axes(shape)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def grid_spacing(self, shape) -> np.ndarray:
        shape = self._grid_shape(shape)
        return (self.hi - self.lo) / (np.asarray(shape) - 1)

    def cell_volume(self, shape) -> float:
        """Volume per node when node values stand in for cell averages."""
        shape = self._grid_shape(shape)
        return float(self.volume / np.prod(shape))

    def scaled(self, factor: float) -> "Box":
        return Box(self.center, factor * self.half_widths)

    def _grid_shape(self, shape):
        if np.isscalar(shape):
            shape = (int(shape),) * self.dim
        shape = tuple(int(s) for s in shape)
        if len(shape) != self.dim:
            raise InvalidArgumentError(f"grid shape must have {self.dim} entries")
        if any(s < 2 for s in shape):
            raise InvalidArgumentError("grid needs at least 2 nodes per axis")
        return shape
