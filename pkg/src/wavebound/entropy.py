"""Local entropies of waves: half-spaces, wedges and massless balls.

All functionals are quadratures of the energy density ``T00`` against
geometric weights. Half-space integrals integrate the trigonometric
interpolant exactly against the kinked weight, so cuts need not sit on grid
nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MassNotZero, NotSpacelikeRight
from .field import energy_spectral, evolve, momentum, stress_energy
from .grid import CauchyData
from .quadrature import (ball_integral, halfspace_integral, slice_integral,
                         sphere_integral)
from .regions import Ball, WedgeVertex

TWO_PI = 2.0 * np.pi


def halfspace_entropy(a: CauchyData, axis: int = 0, cut: float = 0.0, side: str = ">",
                      density=None) -> float:
    """``2 pi int_{x_axis > cut} (x_axis - cut) T00`` (mirrored for ``side='<'``).

    ``density`` may pass a precomputed :class:`~wavebound.field.EnergyDensity`
    to avoid recomputing gradients in sweeps.
    """
    dens = stress_energy(a) if density is None else density
    return TWO_PI * halfspace_integral(dens.t00, a.grid, axis, cut, side)


def halfspace_entropy_improved(a: CauchyData, cut: float = 0.0, axis: int = 0,
                               density=None) -> float:
    """Same entropy from the improved density plus a boundary term.

    ``2 pi int (x - cut)_+ T00i + pi D/d int_{x_axis = cut} f^2``; agrees
    with :func:`halfspace_entropy` for every mass.
    """
    dens = stress_energy(a) if density is None else density
    d = a.grid.d
    D = (d - 1) / 2
    bulk = TWO_PI * halfspace_integral(dens.t00i, a.grid, axis, cut, ">")
    return bulk + np.pi * D / d * slice_integral(a.f**2, a.grid, axis, cut)


def wedge_entropy(a: CauchyData, v: WedgeVertex, right: bool = True) -> float:
    """Entropy of the right (or left) wedge with vertex ``v`` in 1+1."""
    if a.grid.d != 1 or a.m <= 0:
        raise ValueError("wedge entropies are defined for d = 1 and m > 0")
    at = evolve(a, v.x0)
    return halfspace_entropy(at, 0, v.x1, ">" if right else "<")


def ball_entropy_massless(a: CauchyData, ball: Ball, method: str = "auto") -> float:
    """Exact entropy of massless data in a ball of radius ``rho``.

    ``pi/rho int_B (rho^2 - r^2) T00 + pi D/rho int_B f^2`` with
    ``D = (d - 1)/2``; the unit-ball formula transported by dilation.
    """
    if a.m != 0:
        raise MassNotZero("the closed-form ball entropy needs m = 0")
    if a.grid.d < 2:
        raise ValueError("massless balls need d >= 2")
    dens = stress_energy(a)
    rho, c = ball.radius, np.array(ball.center)
    D = (a.grid.d - 1) / 2

    def parabola(pts):
        return rho**2 - np.sum((pts - c) ** 2, axis=-1)

    bulk = ball_integral(dens.t00, a.grid, ball, parabola, method)
    mass = ball_integral(a.f**2, a.grid, ball, None, method)
    return np.pi / rho * bulk + np.pi * D / rho * mass


def ball_entropy_improved(a: CauchyData, ball: Ball, method: str = "auto",
                          order: int = 3) -> float:
    """Ball entropy from the improved density plus ``pi D/d int_dB f^2``."""
    dens = stress_energy(a)
    rho, c = ball.radius, np.array(ball.center)
    d = a.grid.d
    D = (d - 1) / 2

    def parabola(pts):
        return rho**2 - np.sum((pts - c) ** 2, axis=-1)

    bulk = ball_integral(dens.t00i, a.grid, ball, parabola, method, order=order)
    surface = sphere_integral(a.f**2, a.grid, ball, order=order)
    return np.pi / rho * bulk + np.pi * D / d * surface


@dataclass(frozen=True)
class QdecRow:
    cut: float
    entropy: float
    slice_integral: float
    second_difference: float

    @property
    def curvature(self) -> float:
        """``2 pi`` times the slice integral, the exact second derivative."""
        return TWO_PI * self.slice_integral


def qdec_profile(a: CauchyData, axis: int = 0, cuts=(), step: float | None = None) -> list[QdecRow]:
    """Half-space entropy, slice integral and central second difference per cut.

    ``step`` defaults to ``2 dx``.
    """
    h = 2 * a.grid.dx if step is None else step
    dens = stress_energy(a)

    def S(c):
        return halfspace_entropy(a, axis, c, ">", dens)

    rows = []
    for c in cuts:
        s0 = S(c)
        d2 = (S(c + h) - 2 * s0 + S(c - h)) / h**2
        rows.append(QdecRow(float(c), s0, slice_integral(dens.t00, a.grid, axis, c), d2))
    return rows


def entropy_balance_terms(a: CauchyData, x: WedgeVertex, y: WedgeVertex) -> tuple[float, float]:
    """Residual of the wedge entropy balance and the sum of its term magnitudes.

    The residual is
    ``[S(x) - S(y)] - [Sbar(x) - Sbar(y)] - 2 pi (y1 - x1) E - 2 pi (y0 - x0) P1``
    with ``E`` the energy and ``P1`` the spatial momentum of the wave.
    """
    if x == y:
        return 0.0, 0.0
    S = {v: wedge_entropy(a, v, True) for v in (x, y)}
    Sbar = {v: wedge_entropy(a, v, False) for v in (x, y)}
    E = energy_spectral(a)
    P1 = momentum(a)
    flux_e = TWO_PI * (y.x1 - x.x1) * E
    flux_p = TWO_PI * (y.x0 - x.x0) * P1
    res = (S[x] - S[y]) - (Sbar[x] - Sbar[y]) - flux_e - flux_p
    scale = sum(abs(v) for v in S.values()) + sum(abs(v) for v in Sbar.values())
    return float(res), float(scale + abs(flux_e) + abs(flux_p))


def entropy_balance_residual(a: CauchyData, x: WedgeVertex, y: WedgeVertex) -> float:
    """Residual of the wedge entropy balance between vertices ``x`` and ``y``."""
    return entropy_balance_terms(a, x, y)[0]


def null_energy(a: CauchyData) -> float:
    """Expectation of the right null-translation generator, ``E + P1``."""
    return energy_spectral(a) + momentum(a)


def _is_spacelike_right(v) -> bool:
    return v[1] > abs(v[0])


def wedge_convexity_check(a: CauchyData, x: WedgeVertex, r, s) -> float:
    """``S(x+r+s) + S(x) - S(x+r) - S(x+s)`` for right-pointing spacelike r, s."""
    r = tuple(float(v) for v in r)
    s = tuple(float(v) for v in s)
    for v in (r, s):
        if v != (0.0, 0.0) and not _is_spacelike_right(v):
            raise NotSpacelikeRight(f"{v} is not spacelike pointing right")
    rs = (r[0] + s[0], r[1] + s[1])
    return (wedge_entropy(a, x.shifted(rs)) + wedge_entropy(a, x)
            - wedge_entropy(a, x.shifted(r)) - wedge_entropy(a, x.shifted(s)))
