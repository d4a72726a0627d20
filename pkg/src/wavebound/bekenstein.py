"""Entropy-energy bounds for waves restricted to a bounded region.

The exact local entropy ``S(Phi|B)`` is computable only for massless data in
a ball. Elsewhere the entropy is bounded above by the entropies of the two
half-spaces bounding the slab of width ``2R`` that contains ``B``; this
upper bound (the smaller of the two) is the *surrogate* used in reports, so
a PASS verdict is always sound.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .entropy import ball_entropy_massless, halfspace_entropy
from .errors import NotLocalized
from .field import stress_energy
from .grid import CauchyData
from .quadrature import ball_integral, box_integral
from .regions import Ball, Box, check_inside

SUPPORT_TOL = 1e-10
REL_TOL = 1e-6


def local_energy(a: CauchyData, region=None, density=None) -> float:
    """``E(Phi|B) = int_B T00``; ``region=None`` means the whole box."""
    dens = stress_energy(a) if density is None else density
    return _region_integral(dens.t00, a, region)


def _region_integral(values, a: CauchyData, region) -> float:
    if region is None:
        return a.grid.integrate(values)
    check_inside(region, a.grid)
    if isinstance(region, Ball):
        return ball_integral(values, a.grid, region)
    if isinstance(region, Box):
        return box_integral(values, a.grid, region)
    raise TypeError(f"unsupported region {type(region).__name__}")


def exterior_fraction(a: CauchyData, region) -> float:
    """Relative mass of ``f^2 + g^2`` on grid points outside ``region``."""
    dens = a.f**2 + a.g**2
    total = float(dens.sum())
    if total == 0.0:
        return 0.0
    return float(dens[~region.indicator(a.grid)].sum()) / total


def require_localized(a: CauchyData, region, tol: float = SUPPORT_TOL) -> None:
    frac = exterior_fraction(a, region)
    if frac > tol:
        raise NotLocalized(f"exterior mass fraction {frac:.3e} exceeds {tol:.1e}")


def slab(region) -> tuple[int, float, float]:
    """``(axis, lo, hi)`` of the thinnest axis-aligned slab containing ``region``."""
    if isinstance(region, Ball):
        c = region.center[0]
        return 0, c - region.radius, c + region.radius
    axis = region.narrow_axis
    return axis, region.lo[axis], region.hi[axis]


def slab_entropies(a: CauchyData, region, density=None) -> tuple[float, float]:
    """Entropies of the two half-spaces whose intersection is the slab."""
    dens = stress_energy(a) if density is None else density
    axis, lo, hi = slab(region)
    return (halfspace_entropy(a, axis, lo, ">", dens),
            halfspace_entropy(a, axis, hi, "<", dens))


def entropy_surrogate(a: CauchyData, region, density=None) -> tuple[float, str]:
    """Best computable upper bound on ``S(Phi|B)`` and its kind."""
    if a.m == 0 and isinstance(region, Ball) and a.grid.d >= 2:
        return ball_entropy_massless(a, region), "ball-exact"
    return min(slab_entropies(a, region, density)), "halfspace-min"


@dataclass
class BoundReport:
    """One evaluation of ``S <= 2 pi R E (+ correction)``."""

    entropy: float
    energy: float
    half_width: float
    correction: float = 0.0
    tol: float = 0.0
    kind: str = ""
    chain: dict = field(default_factory=dict)
    verdict: str = ""

    @property
    def bound(self) -> float:
        return 2 * np.pi * self.half_width * self.energy + self.correction

    @property
    def margin(self) -> float:
        return self.bound - self.entropy

    def as_row(self) -> dict:
        row = {"entropy": self.entropy, "energy": self.energy, "R": self.half_width,
               "correction": self.correction, "bound": self.bound,
               "margin": self.margin, "tol": self.tol, "kind": self.kind,
               "verdict": self.verdict}
        row.update(self.chain)
        return row


def _scale(*values) -> float:
    s = max(abs(v) for v in values)
    return s if s > 0 else 1.0


def check_localized(a: CauchyData, region, rel_tol: float = REL_TOL) -> BoundReport:
    """Bekenstein check for data supported in ``region``.

    Records both slab half-space entropies and their mean, which equals
    ``2 pi R E`` identically because the two weights add up to ``2R`` on the
    slab. For massless data in a ball the exact entropy is used.
    """
    check_inside(region, a.grid)
    require_localized(a, region)
    dens = stress_energy(a)
    E = local_energy(a, region, dens)
    R = region.half_width
    s_lo, s_hi = slab_entropies(a, region, dens)
    S, kind = entropy_surrogate(a, region, dens)
    mean = 0.5 * (s_lo + s_hi)
    rep = BoundReport(S, E, R, kind=kind,
                      chain={"s_lower": s_lo, "s_upper": s_hi, "s_mean": mean})
    rep.tol = rel_tol * _scale(rep.bound, S, mean)
    ok = (min(s_lo, s_hi) >= -rep.tol and S >= -rep.tol
          and rep.margin >= -rep.tol and mean <= rep.bound + rep.tol)
    rep.verdict = "PASS" if ok else "FAIL"
    return rep


def check_nonlocalized(a: CauchyData, region, gamma: float,
                       rel_tol: float = REL_TOL) -> BoundReport:
    """Check ``S <= 2 pi R E(Phi|B) + gamma`` for arbitrary data.

    ``gamma`` is the boundary correction (see :func:`bekenstein_correction`).
    The localized margin (``gamma = 0``) is stored in ``chain``. When only
    the half-space surrogate is available and it exceeds the bound the
    verdict is ``INCONCLUSIVE`` rather than ``FAIL``.
    """
    check_inside(region, a.grid)
    dens = stress_energy(a)
    E = local_energy(a, region, dens)
    S, kind = entropy_surrogate(a, region, dens)
    rep = BoundReport(S, E, region.half_width, correction=gamma, kind=kind)
    local_bound = 2 * np.pi * rep.half_width * E
    rep.chain = {"local_bound": local_bound, "local_margin": local_bound - S}
    rep.tol = rel_tol * _scale(rep.bound, S)
    if rep.margin >= -rep.tol:
        rep.verdict = "PASS"
    else:
        rep.verdict = "FAIL" if kind == "ball-exact" else "INCONCLUSIVE"
    return rep


def bekenstein_correction(a: CauchyData, region: Ball, **solver) -> dict:
    """Boundary correction ``pi/2 (Gamma_lo + Gamma_hi)`` for a ball.

    ``Gamma_lo`` is the exterior minimum energy with weight the distance to
    the lower slab plane, ``Gamma_hi`` the same for the upper plane (the
    mirrored problem). Keyword arguments go to
    :func:`wavebound.gamma.ExteriorProblem.for_ball`. Massless values are
    extrapolated in the truncation radius.
    """
    from .gamma import BoundaryData, ExteriorProblem, gamma

    if a.grid.d not in (1, 2):
        raise ValueError("the exterior problem is implemented for d = 1, 2")
    n_theta = solver.pop("n_theta", None)
    h = BoundaryData.from_field(a.f, a.grid, region, n_theta)
    prob = ExteriorProblem.for_ball(region.radius, a.m, a.grid.d, n_theta=h.size, **solver)
    extrap = a.m == 0
    g_lo = gamma(prob, h.in_slab(region, lower=True), extrapolate=extrap).best
    g_hi = gamma(prob, h.in_slab(region, lower=False), extrapolate=extrap).best
    return {"gamma_lower": g_lo, "gamma_upper": g_hi,
            "correction": 0.5 * np.pi * (g_lo + g_hi)}


def massless_modular_M(r: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Multiplication profile ``M(r) = (1 - r^2) / 2`` on the unit ball.

    Checks ``0 <= M <= R`` with ``R = 1`` on the supplied radii.
    """
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) > radius):
        raise ValueError("radii must lie in the ball")
    M = 0.5 * (1.0 - (r / radius) ** 2)
    if np.any(M < 0) or np.any(M > 1.0):
        raise AssertionError("profile leaves [0, R]")
    return M


def modular_bound_margins(a: CauchyData, region) -> tuple[float, float]:
    """``(pi R int g^2 - S(0,g), pi R int (|grad f|^2 + m^2 f^2) - S(f,0))``."""
    check_inside(region, a.grid)
    require_localized(a, region)
    R = region.half_width
    zero = np.zeros_like(a.f)
    a_g = a.replace(f=zero, decay_tol=None)
    a_f = a.replace(g=zero, decay_tol=None)
    grad2 = sum(c**2 for c in a.gradient())
    g_side = np.pi * R * _region_integral(a.g**2, a, region)
    f_side = np.pi * R * _region_integral(grad2 + a.m**2 * a.f**2, a, region)
    return (g_side - entropy_surrogate(a_g, region)[0],
            f_side - entropy_surrogate(a_f, region)[0])
