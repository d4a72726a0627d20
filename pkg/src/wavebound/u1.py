"""Chiral U(1) current: one-particle norm, complex structure and entropies.

A profile ``f`` on the line is taken modulo additive constants, so every
functional below depends on ``f'`` only. In this module ``f'`` and the
complex structure are computed spectrally on the periodic box, and the
weighted entropy integrals integrate the trigonometric interpolant of
``f'^2`` exactly. That makes cuts and interval ends independent of the
grid nodes.

Interval entropies for a general interval ``(a, b)`` use the weight
``2 (x - a)(b - x) / (b - a)``, obtained from the ``(-1, 1)`` form by an
affine change of variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from .errors import DecayViolated, ResampleUnderResolved
from .grid import DEFAULT_DECAY_TOL, GridSpec, gradient, shell_fraction, to_spectral
from .quadrature import kink_weights, segment_weights, trig_interpolate

MAX_FLOW = 2.0
RESAMPLE_TAIL_TOL = 1e-8


class CurrentProfile:
    """Real profile ``f`` on a 1D grid, normalized to ``f(-L) = 0``.

    ``decay_tol`` bounds the share of ``f'^2`` in the outer 10% of the box;
    ``None`` skips the check.
    """

    def __init__(self, values, grid: GridSpec, decay_tol: float | None = DEFAULT_DECAY_TOL):
        if grid.d != 1:
            raise ValueError("current profiles live on a 1D grid")
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"profile must have shape {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile must be finite")
        self.values = values - values[0]
        self.values.setflags(write=False)
        self.grid = grid
        self.derivative = gradient(self.values, grid)[0]
        self.derivative.setflags(write=False)
        if decay_tol is not None:
            frac = shell_fraction(self.derivative, grid)
            if frac > decay_tol:
                raise DecayViolated(f"f' boundary fraction {frac:.3e} exceeds {decay_tol:.1e}")

    @classmethod
    def from_function(cls, fn, grid: GridSpec, **kwargs) -> "CurrentProfile":
        return cls(fn(grid.axis()), grid, **kwargs)

    @property
    def coeffs(self) -> np.ndarray:
        """Continuum-normalized Fourier coefficients of the representative."""
        return to_spectral(self.values, self.grid)

    def derivative_at(self, x) -> np.ndarray:
        """Trigonometric interpolant of ``f'`` at arbitrary points."""
        return trig_interpolate(self.derivative, self.grid, x)


def _positive_spectrum(samples: np.ndarray, grid: GridSpec, pad: int = 1):
    """``(p, c)`` on the positive frequencies of zero-padded samples.

    Padding by ``pad`` (a power of two) keeps ``dx`` and refines ``dp`` by
    the same factor. The zero mode and the Nyquist mode are dropped.
    """
    if pad < 1 or pad & (pad - 1):
        raise ValueError("pad must be a power of two")
    if pad > 1:
        big = GridSpec(1, grid.N * pad, grid.L * pad)
        buf = np.zeros(big.N)
        off = (pad - 1) * grid.N // 2
        buf[off:off + grid.N] = samples
        grid, samples = big, buf
    c = to_spectral(samples, grid)
    p = grid.wavenumbers()
    keep = slice(1, grid.N // 2)
    return p[keep], c[keep], grid.dp


def u1_norm(f: CurrentProfile, pad: int = 1) -> float:
    """``||f||^2 = int_0^inf p |fhat(p)|^2 dp`` as a positive-frequency sum.

    ``fhat = fhat' / (i p)`` so only ``f'`` enters. With ``pad > 1`` the
    momentum spacing shrinks by ``pad``. The quadrature error of the sum
    against the line integral is ``O(dp^2)``.
    """
    p, c, dp = _positive_spectrum(f.derivative, f.grid, pad)
    return float(np.sum(np.abs(c) ** 2 / p) * dp)


def u1_complex_structure(f: CurrentProfile) -> CurrentProfile:
    """``iota f``: spectral multiplication by ``-i sign(p)``, so ``iota cos = sin``.

    On the periodic box this is the cotangent-kernel Hilbert transform. The
    result has a slowly decaying tail, so its decay is not checked.
    """
    p = f.grid.wavenumbers()
    mult = -1j * np.sign(p)
    mult[f.grid.N // 2] = 0.0
    out = np.fft.ifft(mult * np.fft.fft(f.values)).real
    return CurrentProfile(out, f.grid, decay_tol=None)


def dual_norm(f: CurrentProfile) -> float:
    """``-1/2 int (iota f) f'`` in real space. Equals :func:`u1_norm` by Parseval."""
    jf = u1_complex_structure(f)
    return float(-0.5 * np.sum(jf.values * f.derivative) * f.grid.dx)


def halfline_entropy(f: CurrentProfile, a: float = 0.0, side: str = ">") -> float:
    """``pi int (x - a)_+ f'^2`` (``(a - x)_+`` for ``side='<'``)."""
    if side not in (">", "<"):
        raise ValueError("side must be '>' or '<'")
    return float(np.pi * kink_weights(f.grid, a, side) @ f.derivative**2)


def _interval_weight(a: float, b: float):
    return lambda x: 2.0 * (x - a) * (b - x) / (b - a)


def interval_entropy(f: CurrentProfile, interval=(-1.0, 1.0)) -> float:
    """``2 pi int_a^b (x - a)(b - x)/(b - a) f'^2``."""
    a, b = map(float, interval)
    if not a < b:
        raise ValueError("need a < b")
    q = segment_weights(f.grid, a, b, _interval_weight(a, b))
    return float(np.pi * q @ f.derivative**2)


def null_energy_spectral(f: CurrentProfile) -> float:
    """``(f, P_+ f) = int_0^inf p^2 |fhat|^2 dp`` from the half-spectrum."""
    _, c, dp = _positive_spectrum(f.derivative, f.grid)
    return float(np.sum(np.abs(c) ** 2) * dp)


def null_energy_real(f: CurrentProfile) -> float:
    """``1/2 int f'^2``, the Plancherel counterpart of :func:`null_energy_spectral`."""
    return 0.5 * f.grid.integrate(f.derivative**2)


def modular_pairing(f: CurrentProfile, interval=(-1.0, 1.0), pad: int = 8) -> float:
    """``Re(f, iota k)`` with ``k = 2 pi W f'`` on the interval, zero outside.

    ``W`` is the interval weight of :func:`interval_entropy`, so for
    ``(-1, 1)`` the vector ``k`` is the modular generator applied to ``f``.
    The Fourier transform of ``k`` is computed by Gauss-Legendre quadrature,
    since ``k`` has kinks at the interval ends. The pairing is then summed
    over the padded positive frequencies.
    """
    a, b = map(float, interval)
    p, cf_prime, dp = _positive_spectrum(f.derivative, f.grid, pad)
    fhat = cf_prime / (1j * p)
    n = int(1.2 * f.grid.N * (b - a) / (2 * f.grid.L)) + 64
    t, w = roots_legendre(n)
    x = 0.5 * (b - a) * t + 0.5 * (a + b)
    v = 0.5 * (b - a) * w
    k = 2 * np.pi * _interval_weight(a, b)(x) * f.derivative_at(x)
    khat = (np.exp(-1j * np.outer(p, x)) @ (v * k)) / np.sqrt(2 * np.pi)
    jk = -1j * khat
    return float(np.sum(p * (np.conj(fhat) * jk).real) * dp)


# --- ant formula -----------------------------------------------------------

@dataclass
class AntReport:
    cut: float
    step: float
    fd_derivative: float
    formula: float
    minimizer_energy: float
    competitor_energies: list = field(default_factory=list)

    @property
    def fd_error(self) -> float:
        return abs(self.fd_derivative - self.formula)

    @property
    def minimizer_attains(self) -> float:
        """``2 pi E(h*) + dS/da``; zero when the infimum is attained."""
        return self.minimizer_energy + self.formula

    @property
    def competitors_dominate(self) -> bool:
        return all(e >= self.minimizer_energy for e in self.competitor_energies)


def _default_competitors(f: CurrentProfile, a: float):
    L = f.grid.L
    center = max(a - 1.0, -0.5 * L)
    width = min(0.5, 0.5 * (a - center) if a > center else 0.5)

    def bump_prime(amp):
        def fn(x):
            s = (x - center) / width
            inside = np.abs(s) < 1
            s_in = np.where(inside, s, 0.0)
            val = np.exp(-1.0 / (1.0 - s_in**2))
            dval = val * (-2.0 * s_in / (1.0 - s_in**2) ** 2) / width
            return np.where(inside, amp * dval, 0.0)
        return fn

    return [bump_prime(0.1), bump_prime(1.0), f.derivative_at]


def ant_check(f: CurrentProfile, a: float = 0.0, step: float = 1e-2,
              competitors=None) -> AntReport:
    """Check ``-dS/da = pi int_a^inf f'^2 = 2 pi inf_{h ~ f} (h, P_+ h)``.

    The minimizer ``h*`` equals ``f`` on ``[a, inf)`` and the constant
    ``f(a)`` to the left, so its null energy is ``1/2 int_a^inf f'^2``.
    ``competitors`` are callables giving ``h'`` on ``x < a`` for profiles
    that agree with ``f`` right of ``a``. Their energies are
    ``2 pi (h, P_+ h)``. The defaults are two bumps added to ``h*`` and
    ``f`` itself.
    """
    S = lambda c: halfline_entropy(f, c, ">")  # noqa: E731
    fd = (S(a + step) - S(a - step)) / (2 * step)
    tail = float(derivative_energy(f, a, f.grid.L))
    formula = -np.pi * tail
    right, _ = quad(lambda x: float(f.derivative_at(x)[0]) ** 2, a, f.grid.L, limit=400)
    e_star = 2 * np.pi * 0.5 * right
    comps = _default_competitors(f, a) if competitors is None else competitors
    energies = []
    for c in comps:
        left, _ = quad(lambda x: float(np.asarray(c(np.array([x])))[0]) ** 2,
                       -f.grid.L, a, limit=400)
        energies.append(2 * np.pi * 0.5 * (left + tail))
    return AntReport(float(a), step, float(fd), float(formula), float(e_star), energies)


def derivative_energy(f: CurrentProfile, a: float, b: float) -> float:
    """``int_a^b f'^2`` of the trigonometric interpolant."""
    a = float(np.clip(a, -f.grid.L, f.grid.L))
    b = float(np.clip(b, -f.grid.L, f.grid.L))
    if b <= a:
        return 0.0
    return float(segment_weights(f.grid, a, b) @ f.derivative**2)


# --- entropy balance -------------------------------------------------------

@dataclass
class BalanceReport:
    residual: float
    scale: float
    null_spectral: float
    null_plancherel: float
    entropies: dict

    @property
    def relative(self) -> float:
        return abs(self.residual) / self.scale if self.scale else abs(self.residual)

    @property
    def plancherel_mismatch(self) -> float:
        ref = max(abs(self.null_plancherel), np.finfo(float).tiny)
        return abs(self.null_spectral - self.null_plancherel) / ref


def balance_check(f: CurrentProfile, a: float, b: float) -> BalanceReport:
    """``[S(a) - S(b)] - [Sbar(a) - Sbar(b)] - 2 pi (b - a)(f, P_+ f)``."""
    if b < a:
        raise ValueError("need a <= b")
    ent = {"S_a": halfline_entropy(f, a, ">"), "S_b": halfline_entropy(f, b, ">"),
           "Sbar_a": halfline_entropy(f, a, "<"), "Sbar_b": halfline_entropy(f, b, "<")}
    P = null_energy_spectral(f)
    P_real = null_energy_real(f)
    if a == b:
        return BalanceReport(0.0, 0.0, P, P_real, ent)
    flux = 2 * np.pi * (b - a) * P
    res = (ent["S_a"] - ent["S_b"]) - (ent["Sbar_a"] - ent["Sbar_b"]) - flux
    scale = sum(abs(v) for v in ent.values()) + abs(flux)
    return BalanceReport(float(res), float(scale), P, P_real, ent)


# --- modular flow of an interval --------------------------------------------

def interval_dilation(s: float, x):
    """Dilation ``delta_B(s)`` of ``B = (-1, 1)``, fixing ``-1`` and ``1``."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-s)
    return (1 + x - e * (1 - x)) / (1 + x + e * (1 - x))


def interval_dilation_derivative(s: float, x):
    x = np.asarray(x, dtype=float)
    e = np.exp(-s)
    return 4 * e / (1 + x + e * (1 - x)) ** 2


def _check_resolvable(f: CurrentProfile, s: float) -> None:
    if abs(s) > MAX_FLOW:
        raise ResampleUnderResolved(f"|s| = {abs(s):g} exceeds {MAX_FLOW:g}")
    c = np.abs(np.fft.rfft(f.derivative))
    peak = float(c.max())
    if peak == 0.0:
        return
    tail = float(c[int(0.375 * f.grid.N):].max())
    if tail > RESAMPLE_TAIL_TOL * peak:
        raise ResampleUnderResolved(
            f"spectral tail {tail / peak:.1e} of f' is too large to resample")


def dilation_flow_check(f: CurrentProfile, s: float, n_quad: int | None = None) -> float:
    """``q_B(f o delta_B(s)^-1) - q_B(f)`` for ``B = (-1, 1)``.

    The transported profile is resampled through the trigonometric
    interpolant of ``f'`` at ``x = delta_B(-s)(y)`` and integrated with
    Gauss-Legendre nodes ``y`` in ``B``.
    """
    _check_resolvable(f, s)
    if s == 0:
        return 0.0
    n = n_quad or max(200, f.grid.N)
    t, w = roots_legendre(n)
    x = interval_dilation(-s, t)
    fs_prime = f.derivative_at(x) * interval_dilation_derivative(-s, t)
    moved = float(np.pi * np.sum(w * (1 - t**2) * fs_prime**2))
    return moved - interval_entropy(f, (-1.0, 1.0))
