"""Seeded random Cauchy data built from compactly supported smooth bumps.

Each field is a sum of ``n`` bumps ``A exp(c / (s^2 - 1) + c)`` with
``s = |x - x0| / w`` (peak value ``A``, support radius ``w``). The
sharpness ``c`` is dimensionless, so the family is dilation covariant.
Parameters are drawn with ``numpy.random.default_rng(seed)``:

========== ==========================================
n          integer in [3, 8]
A          uniform in [-1, 1]
w          uniform in [0.3, 0.6] * R  (R = half-width)
c          uniform in [4, 8] (dimensionless)
x0         uniform, such that the support stays inside
========== ==========================================
"""
from __future__ import annotations

import numpy as np

from .grid import CauchyData, GridSpec
from .regions import Ball, Box

N_BUMPS = (3, 8)
WIDTH_FRACTION = (0.3, 0.6)
SHARPNESS = (4.0, 8.0)
AMPLITUDE = 1.0


def bump(grid: GridSpec, center, width: float, c: float = 1.0, amplitude: float = 1.0,
         out: np.ndarray | None = None) -> np.ndarray:
    """Add one compactly supported bump to ``out`` (allocated if ``None``)."""
    if out is None:
        out = np.zeros(grid.shape)
    center = np.atleast_1d(np.asarray(center, dtype=float))
    ax = grid.axis()
    slices, coords = [], []
    for x0 in center:
        lo = np.searchsorted(ax, x0 - width)
        hi = np.searchsorted(ax, x0 + width, side="right")
        slices.append(slice(lo, hi))
        coords.append(ax[lo:hi] - x0)
    sub = np.meshgrid(*coords, indexing="ij", sparse=True)
    r2 = sum(q**2 for q in sub)
    inside = r2 < width**2
    s2 = np.where(inside, r2 / width**2, 0.0)
    vals = np.where(inside, np.exp(c / (s2 - 1.0) + c), 0.0)
    out[tuple(slices)] += amplitude * vals
    return out


def _draw_center(rng, region, width, d):
    if isinstance(region, Ball):
        room = region.radius - width
        while True:
            v = rng.uniform(-1, 1, size=d)
            if v @ v <= 1:
                return np.array(region.center) + room * v
    lo = np.array(region.lo) + width
    hi = np.array(region.hi) - width
    return rng.uniform(lo, hi)


def random_field(grid: GridSpec, rng: np.random.Generator, region,
                 margin: float = 0.02) -> np.ndarray:
    """Sum of random bumps whose supports lie inside ``region``.

    ``margin`` (relative to the half-width) keeps supports off the boundary.
    """
    R = region.half_width
    shrunk = _shrink(region, margin * R)
    out = np.zeros(grid.shape)
    for _ in range(rng.integers(N_BUMPS[0], N_BUMPS[1] + 1)):
        width = rng.uniform(*WIDTH_FRACTION) * R
        c = rng.uniform(*SHARPNESS)
        amp = rng.uniform(-AMPLITUDE, AMPLITUDE)
        bump(grid, _draw_center(rng, shrunk, width, grid.d), width, c, amp, out)
    return out


def _shrink(region, delta):
    if isinstance(region, Ball):
        return Ball(region.center, region.radius - delta)
    return Box(tuple(np.array(region.lo) + delta), tuple(np.array(region.hi) - delta))


def default_region(grid: GridSpec):
    return Ball((0.0,) * grid.d, 0.5 * grid.L)


def random_cauchy_data(grid: GridSpec, m: float, seed: int, region=None,
                       f_scale: float = 1.0, g_scale: float = 1.0, **kwargs) -> CauchyData:
    """Random localized ``<f, g>``; reproducible from the 64-bit ``seed``."""
    rng = np.random.default_rng(np.uint64(seed))
    region = default_region(grid) if region is None else region
    f = f_scale * random_field(grid, rng, region)
    g = g_scale * random_field(grid, rng, region)
    return CauchyData(f, g, m, grid, **kwargs)


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def plateau(grid: GridSpec, center, inner: float, outer: float) -> np.ndarray:
    """Smooth radial function equal to 1 for ``r <= inner``, 0 for ``r >= outer``."""
    if not 0 < inner < outer:
        raise ValueError("need 0 < inner < outer")
    r = grid.radius(center)
    return smooth_step((outer - r) / (outer - inner))
