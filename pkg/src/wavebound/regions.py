"""Spatial regions on the time-zero slice and wedge vertices in 1+1."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RegionOutsideGrid
from .grid import GridSpec


@dataclass(frozen=True)
class HalfSpace:
    """``{x_axis > cut}`` (``side='>'``) or ``{x_axis < cut}``."""

    axis: int
    cut: float
    side: str = ">"

    def __post_init__(self):
        if self.side not in (">", "<"):
            raise ValueError("side must be '>' or '<'")

    @property
    def half_width(self) -> float:
        return np.inf

    def indicator(self, grid: GridSpec) -> np.ndarray:
        x = grid.mesh()[self.axis]
        mask = x > self.cut if self.side == ">" else x < self.cut
        return np.broadcast_to(mask, grid.shape)


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def half_width(self) -> float:
        return min((b - a) / 2 for a, b in zip(self.lo, self.hi))

    @property
    def narrow_axis(self) -> int:
        return int(np.argmin([b - a for a, b in zip(self.lo, self.hi)]))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.lo) + np.array(self.hi))

    def indicator(self, grid: GridSpec) -> np.ndarray:
        mask = np.ones(grid.shape, dtype=bool)
        for x, a, b in zip(grid.mesh(), self.lo, self.hi):
            mask = mask & (x >= a) & (x <= b)
        return mask

    def translated(self, shift) -> "Box":
        shift = np.atleast_1d(shift)
        return Box(tuple(np.array(self.lo) + shift), tuple(np.array(self.hi) + shift))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center",
                           tuple(float(v) for v in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def half_width(self) -> float:
        return float(self.radius)

    def indicator(self, grid: GridSpec) -> np.ndarray:
        return grid.radius(self.center) <= self.radius

    def translated(self, shift) -> "Ball":
        return Ball(tuple(np.array(self.center) + np.atleast_1d(shift)), self.radius)

    def scaled(self, lam: float) -> "Ball":
        return Ball(tuple(lam * np.array(self.center)), lam * self.radius)


def bounding_box(region) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(region, Ball):
        c = np.array(region.center)
        return c - region.radius, c + region.radius
    if isinstance(region, Box):
        return np.array(region.lo), np.array(region.hi)
    raise TypeError(f"no bounding box for {type(region).__name__}")


def check_inside(region, grid: GridSpec) -> None:
    """Raise unless the region sits in the box with a ``2 dx`` margin."""
    if isinstance(region, HalfSpace):
        if abs(region.cut) > grid.L - 2 * grid.dx:
            raise RegionOutsideGrid(f"cut {region.cut} too close to the box edge")
        return
    lo, hi = bounding_box(region)
    if lo.size != grid.d:
        raise RegionOutsideGrid("region and grid dimensions differ")
    limit = grid.L - 2 * grid.dx
    if np.any(lo < -limit) or np.any(hi > limit):
        raise RegionOutsideGrid("region leaves the grid box (margin 2 dx)")


@dataclass(frozen=True)
class WedgeVertex:
    """Vertex ``(x0, x1)`` of the right wedge ``x + {|t| < s}`` in 1+1."""

    x0: float
    x1: float

    def shifted(self, v) -> "WedgeVertex":
        return WedgeVertex(self.x0 + v[0], self.x1 + v[1])
