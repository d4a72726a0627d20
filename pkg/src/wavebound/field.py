"""One-particle structure of the free scalar field on Cauchy data.

Operations act on :class:`~wavebound.grid.CauchyData`; every spectral
multiplier uses ``mu(p) = sqrt(|p|^2 + m^2)``.
"""
from __future__ import annotations

import numpy as np

from .errors import DecayViolated, SingularMode
from .grid import (ZERO_MODE_TOL, CauchyData, GridSpec, from_spectral,
                   laplacian, momentum_integral, same_setting, to_spectral)


def _mu(grid: GridSpec, m: float) -> np.ndarray:
    return np.sqrt(grid.p_squared() + m**2)


def _check_zero_mode(coeffs: np.ndarray, grid: GridSpec) -> None:
    power = np.abs(coeffs) ** 2
    total = power.sum()
    if total > 0 and power.flat[0] > ZERO_MODE_TOL * total:
        raise SingularMode("p = 0 mode is nonzero and m = 0")


def _inverse_mu(grid: GridSpec, m: float, coeffs: np.ndarray) -> np.ndarray:
    mu = _mu(grid, m)
    if m == 0:
        _check_zero_mode(coeffs, grid)
        mu = mu.copy()
        mu.flat[0] = np.inf
    return 1.0 / mu


def norm_pm(f: np.ndarray, grid: GridSpec, m: float, sign: int = 1) -> float:
    """``int (|p|^2 + m^2)^(+-1/2) |fhat(p)|^2 dp`` by spectral quadrature.

    Parameters
    ----------
    f : ndarray
        Real grid field.
    grid : GridSpec
    m : float
        Mass, ``m >= 0``.
    sign : {+1, -1}
        Selects the ``H_{m,+}`` or ``H_{m,-}`` norm.

    Raises
    ------
    SingularMode
        ``sign = -1``, ``m = 0`` and the zero mode of ``fhat`` is not
        negligible (relative power above ``1e-10``).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    coeffs = to_spectral(f, grid)
    weight = _mu(grid, m) if sign > 0 else _inverse_mu(grid, m, coeffs)
    return momentum_integral(weight * np.abs(coeffs) ** 2, grid)


def inner_product(a: CauchyData, b: CauchyData) -> complex:
    """Complex scalar product of two waves.

    The real part is the ``H_{m,+} + H_{m,-}`` pairing, the imaginary part
    the symplectic form ``(g1, f2) - (f1, g2)``.
    """
    same_setting(a, b)
    grid, m = a.grid, a.m
    fa, fb = to_spectral(a.f, grid), to_spectral(b.f, grid)
    ga, gb = to_spectral(a.g, grid), to_spectral(b.g, grid)
    mu = _mu(grid, m)
    inv = _inverse_mu(grid, m, ga)
    if m == 0:
        _check_zero_mode(gb, grid)
    real = momentum_integral(mu * (np.conj(fa) * fb).real, grid)
    real += momentum_integral(inv * (np.conj(ga) * gb).real, grid)
    imag = grid.integrate(a.g * b.f) - grid.integrate(a.f * b.g)
    return complex(real, imag)


def norm_squared(a: CauchyData) -> float:
    return inner_product(a, a).real


def apply_complex_structure(a: CauchyData) -> CauchyData:
    """``i <f, g> = <mu^-1 g, -mu f>``."""
    grid, m = a.grid, a.m
    fh, gh = to_spectral(a.f, grid), to_spectral(a.g, grid)
    new_f = from_spectral(_inverse_mu(grid, m, gh) * gh, grid)
    new_g = from_spectral(-_mu(grid, m) * fh, grid)
    return a.replace(f=new_f, g=new_g, decay_tol=None)


def evolve(a: CauchyData, t: float, decay_tol="keep") -> CauchyData:
    """Exact free evolution by time ``t``.

    ``sin(mu t) / mu`` is evaluated as ``t sinc(mu t / pi)``, which stays
    regular at ``mu = 0``, so massless data need no zero-mode restriction.
    """
    if t == 0:
        return a
    grid = a.grid
    mu = _mu(grid, a.m)
    fh, gh = to_spectral(a.f, grid), to_spectral(a.g, grid)
    c, s = np.cos(mu * t), np.sin(mu * t)
    sin_over_mu = t * np.sinc(mu * t / np.pi)
    ft = from_spectral(c * fh + sin_over_mu * gh, grid)
    gt = from_spectral(-mu * s * fh + c * gh, grid)
    tol = a.decay_tol if decay_tol == "keep" else decay_tol
    try:
        return a.replace(f=ft, g=gt, decay_tol=tol)
    except DecayViolated as exc:
        raise DecayViolated(f"evolution by t={t} reaches the box boundary: {exc}") from None


class EnergyDensity:
    """Canonical and improved energy densities on the time-zero slice.

    ``t00i`` is computed on first access (two extra transforms).
    """

    def __init__(self, t00: np.ndarray, f: np.ndarray, grid: GridSpec):
        self.t00 = t00
        self.grid = grid
        self._f = f
        self._t00i = None

    @property
    def t00i(self) -> np.ndarray:
        if self._t00i is None:
            d = self.grid.d
            improvement = (d - 1) / (4.0 * d) * laplacian(self._f**2, self.grid)
            self._t00i = self.t00 - improvement
        return self._t00i


def stress_energy(a: CauchyData) -> EnergyDensity:
    grad2 = sum(c**2 for c in a.gradient())
    t00 = 0.5 * (grad2 + a.m**2 * a.f**2 + a.g**2)
    return EnergyDensity(t00, a.f, a.grid)


def total_energy(a: CauchyData) -> float:
    """``(Phi, P Phi) = int T00``."""
    return a.grid.integrate(stress_energy(a).t00)


def energy_spectral(a: CauchyData) -> float:
    """Energy from momentum space, ``1/2 int (mu^2 |fhat|^2 + |ghat|^2) dp``.

    Equals ``Re(Phi, P Phi) / 2`` with ``P = mu`` acting on both components
    under :func:`inner_product`.
    """
    grid = a.grid
    fh, gh = to_spectral(a.f, grid), to_spectral(a.g, grid)
    dens = _mu(grid, a.m) ** 2 * np.abs(fh) ** 2 + np.abs(gh) ** 2
    return 0.5 * momentum_integral(dens, grid)


def momentum(a: CauchyData, axis: int = 0) -> float:
    """Spatial-translation charge ``int g d_axis f``, evaluated spectrally.

    With this sign, ``energy + momentum`` is the right null-translation
    generator: it vanishes on right-moving 1+1 waves.
    """
    grid = a.grid
    fh, gh = to_spectral(a.f, grid), to_spectral(a.g, grid)
    p = grid.momentum_mesh()[axis]
    dens = (np.conj(gh) * 1j * p * fh).real
    return momentum_integral(dens, grid)
