"""Periodic box discretization of Cauchy data and its spectral representation.

Fourier convention
------------------
The continuum transform carries a factor ``(2 pi)^(-d/2)``::

    fhat(p) = (2 pi)^(-d/2) \\int f(x) exp(-i p.x) dx

and is approximated on the grid by the (spectrally accurate) trapezoidal
rule. Momentum integrals are sums times ``dp^d`` with ``dp = pi / L``, so that
Parseval holds exactly in discrete form::

    sum |f_n|^2 dx^d == sum |fhat_k|^2 dp^d
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .errors import DecayViolated, GridMismatch

DEFAULT_DECAY_TOL = 1e-8
ZERO_MODE_TOL = 1e-10

_HEADER = struct.Struct("<qqdd")


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L, L)^d`` with ``N`` points per axis."""

    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 16, got {self.N}")
        if not self.L > 0:
            raise ValueError("half-extent L must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dp(self) -> float:
        return np.pi / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    def axis(self) -> np.ndarray:
        """Coordinates ``-L + k dx`` of one axis."""
        return -self.L + self.dx * np.arange(self.N)

    def mesh(self) -> list[np.ndarray]:
        ax = self.axis()
        if self.d == 1:
            return [ax]
        return np.meshgrid(*([ax] * self.d), indexing="ij", sparse=True)

    def radius(self, center=None) -> np.ndarray:
        center = np.zeros(self.d) if center is None else np.atleast_1d(center)
        r2 = sum((x - c) ** 2 for x, c in zip(self.mesh(), center))
        return np.sqrt(r2)

    def wavenumbers(self) -> np.ndarray:
        """Signed wavenumbers ``p_k = pi k / L`` in FFT order."""
        return 2.0 * np.pi * sfft.fftfreq(self.N, d=self.dx)

    def momentum_mesh(self) -> list[np.ndarray]:
        p = self.wavenumbers()
        if self.d == 1:
            return [p]
        return np.meshgrid(*([p] * self.d), indexing="ij", sparse=True)

    def p_squared(self) -> np.ndarray:
        return sum(q**2 for q in self.momentum_mesh())

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoidal rule over the full periodic box."""
        return float(np.sum(values) * self.cell_volume)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.d, self.N * factor, self.L)

    def shell_mask(self, fraction: float = 0.1) -> np.ndarray:
        """Points in the outermost ``fraction`` of the box along any axis."""
        limit = (1.0 - fraction) * self.L
        mask = np.zeros(self.shape, dtype=bool)
        for x in self.mesh():
            mask = mask | (np.abs(x) > limit)
        return mask


def _phase(grid: GridSpec) -> np.ndarray:
    # exp(i p L) for the shift of the first sample to x = -L
    ph = np.exp(1j * grid.wavenumbers() * grid.L)
    if grid.d == 1:
        return ph
    out = 1.0
    for p in np.meshgrid(*([ph] * grid.d), indexing="ij", sparse=True):
        out = out * p
    return out


def to_spectral(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Continuum-normalized Fourier coefficients of a real grid field."""
    scale = grid.cell_volume * (2.0 * np.pi) ** (-grid.d / 2)
    return sfft.fftn(values) * scale * _phase(grid)


def from_spectral(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`to_spectral`; returns the real part."""
    scale = grid.cell_volume * (2.0 * np.pi) ** (-grid.d / 2)
    return sfft.ifftn(coeffs / (scale * _phase(grid))).real


def momentum_integral(density: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(density) * grid.dp**grid.d)


def gradient(values: np.ndarray, grid: GridSpec) -> list[np.ndarray]:
    """Spectral gradient of a real periodic field."""
    coeffs = sfft.rfftn(values)
    p = grid.wavenumbers()
    pr = 2.0 * np.pi * sfft.rfftfreq(grid.N, d=grid.dx)
    out = []
    for axis in range(grid.d):
        q = pr if axis == grid.d - 1 else p
        if grid.N % 2 == 0:
            q = q.copy()
            # drop the Nyquist mode so the derivative stays real
            if axis == grid.d - 1:
                q[-1] = 0.0
            else:
                q[grid.N // 2] = 0.0
        shape = [1] * grid.d
        shape[axis] = q.size
        out.append(sfft.irfftn(1j * q.reshape(shape) * coeffs, s=grid.shape))
    return out


def laplacian(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    coeffs = sfft.rfftn(values)
    p = grid.wavenumbers()
    pr = 2.0 * np.pi * sfft.rfftfreq(grid.N, d=grid.dx)
    p2 = 0.0
    for axis in range(grid.d):
        q = pr if axis == grid.d - 1 else p
        shape = [1] * grid.d
        shape[axis] = q.size
        p2 = p2 + q.reshape(shape) ** 2
    return sfft.irfftn(-p2 * coeffs, s=grid.shape)


def shell_fraction(values: np.ndarray, grid: GridSpec, fraction: float = 0.1) -> float:
    """Fraction of the discrete L2 mass of ``values`` in the outer shell."""
    total = float(np.sum(values**2))
    if total == 0.0:
        return 0.0
    return float(np.sum(values[grid.shell_mask(fraction)] ** 2)) / total


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients on the grid with the dispersion ``mu(p)``."""

    coeffs: np.ndarray
    grid: GridSpec
    m: float = 0.0

    @classmethod
    def from_real(cls, values, grid, m=0.0):
        return cls(to_spectral(values, grid), grid, m)

    def to_real(self) -> np.ndarray:
        return from_spectral(self.coeffs, self.grid)

    def mu(self) -> np.ndarray:
        return np.sqrt(self.grid.p_squared() + self.m**2)

    def power(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2


@dataclass(frozen=True, eq=False)
class CauchyData:
    """Time-zero data ``<f, g>`` of a Klein-Gordon wave of mass ``m``.

    ``decay_tol`` bounds the mass fraction of ``f``, ``g`` and ``|grad f|``
    in the outermost 10% of the box; pass ``None`` to skip the check (e.g.
    for deliberately non-decayed test inputs).
    """

    f: np.ndarray
    g: np.ndarray
    m: float
    grid: GridSpec
    decay_tol: float | None = field(default=DEFAULT_DECAY_TOL, repr=False)

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        if f.shape != self.grid.shape or g.shape != self.grid.shape:
            raise GridMismatch(f"fields must have shape {self.grid.shape}")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise ValueError("Cauchy data must be finite")
        if self.m < 0:
            raise ValueError("mass must be non-negative")
        if self.m == 0 and self.grid.d < 2:
            raise ValueError("massless data require d >= 2")
        self._check_decay()

    def _check_decay(self) -> None:
        if self.decay_tol is not None:
            frac = self.boundary_fraction()
            if frac > self.decay_tol:
                raise DecayViolated(
                    f"boundary mass fraction {frac:.3e} exceeds {self.decay_tol:.1e}")

    def gradient(self) -> list[np.ndarray]:
        """Spectral gradient of ``f``, computed once and cached."""
        cached = self.__dict__.get("_grad")
        if cached is None:
            cached = gradient(self.f, self.grid)
            for c in cached:
                c.setflags(write=False)
            object.__setattr__(self, "_grad", cached)
        return cached

    def boundary_fraction(self) -> float:
        grad2 = sum(c**2 for c in self.gradient())
        return max(shell_fraction(self.f, self.grid),
                   shell_fraction(self.g, self.grid),
                   shell_fraction(np.sqrt(grad2), self.grid))

    def replace(self, f=None, g=None, m=None, decay_tol="keep") -> "CauchyData":
        tol = self.decay_tol if decay_tol == "keep" else decay_tol
        out = CauchyData(self.f if f is None else f,
                         self.g if g is None else g,
                         self.m if m is None else m,
                         self.grid, None)
        if f is None and "_grad" in self.__dict__:
            object.__setattr__(out, "_grad", self.__dict__["_grad"])
        object.__setattr__(out, "decay_tol", tol)
        if f is not None or g is not None or decay_tol != "keep":
            out._check_decay()
        return out

    def scaled(self, alpha: float) -> "CauchyData":
        return self.replace(f=alpha * self.f, g=alpha * self.g)


def same_setting(a: CauchyData, b: CauchyData) -> None:
    if a.grid != b.grid:
        raise GridMismatch("Cauchy data live on different grids")
    if a.m != b.m:
        raise GridMismatch("Cauchy data have different masses")


# --- serialization ---------------------------------------------------------

def save_binary(path, data: CauchyData) -> None:
    """Flat binary layout.

    Header (little endian): int64 d, int64 N, float64 L, float64 m. Payload:
    ``f`` then ``g``, each ``N**d`` float64 values in row-major (C) order.
    """
    grid = data.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(grid.d, grid.N, grid.L, data.m))
        fh.write(np.ascontiguousarray(data.f, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(data.g, dtype="<f8").tobytes())


def load_binary(path, decay_tol=DEFAULT_DECAY_TOL) -> CauchyData:
    raw = Path(path).read_bytes()
    d, N, L, m = _HEADER.unpack_from(raw)
    grid = GridSpec(int(d), int(N), float(L))
    n = N**d
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if payload.size != 2 * n:
        raise ValueError(f"expected {2 * n} payload values, found {payload.size}")
    f = payload[:n].reshape(grid.shape).copy()
    g = payload[n:].reshape(grid.shape).copy()
    return CauchyData(f, g, m, grid, decay_tol)


def save_csv(path, data: CauchyData) -> None:
    """1D data as ``x,f,g`` rows after a ``# d=1 N=.. L=.. m=..`` line."""
    grid = data.grid
    if grid.d != 1:
        raise ValueError("CSV export is only defined for d = 1")
    header = f"d=1 N={grid.N} L={grid.L!r} m={data.m!r}\nx,f,g"
    table = np.column_stack([grid.axis(), data.f, data.g])
    np.savetxt(path, table, delimiter=",", header=header, fmt="%.17g")


def load_csv(path, decay_tol=DEFAULT_DECAY_TOL) -> CauchyData:
    with open(path) as fh:
        meta = fh.readline().lstrip("#").split()
    info = dict(item.split("=") for item in meta)
    grid = GridSpec(1, int(info["N"]), float(info["L"]))
    table = np.loadtxt(path, delimiter=",", comments="#", skiprows=2, ndmin=2)
    return CauchyData(table[:, 1], table[:, 2], float(info["m"]), grid, decay_tol)
