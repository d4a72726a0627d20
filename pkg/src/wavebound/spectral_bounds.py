"""Lowest eigenvalue of the weighted form ``int (1 + r^2) |grad f|^2`` on the unit ball.

The radial quotient

    Q[f] = int_0^1 (1 + r^2) f'(r)^2 r^(d-1) dr / int_0^1 f(r)^2 r^(d-1) dr,
    f(1) = 0,

is bounded below by ``d - 1``. Its minimum is computed on a staggered mesh
``r_i = (i + 1/2) dr`` (``i = 0 .. n-1``, ``r_n = 1`` carries ``f = 0``), with
the weight evaluated at the cell faces, which gives a symmetric tridiagonal
generalized eigenproblem ``K u = lambda M u`` with diagonal ``M``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import roots_legendre

from .errors import EigSolveFailure, ZeroDenominator
from .grid import GridSpec, gradient, laplacian
from .quadrature import ball_integral, sample, sphere_nodes
from .regions import Ball


@dataclass(frozen=True)
class RadialMesh:
    n: int
    d: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        if self.n < 4:
            raise ValueError("need at least 4 nodes")

    @property
    def dr(self) -> float:
        return 1.0 / (self.n + 0.5)

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dr

    @property
    def faces(self) -> np.ndarray:
        """Faces ``r_{i+1/2} = (i + 1) dr`` between node ``i`` and ``i + 1``."""
        return (np.arange(self.n) + 1.0) * self.dr

    def stiffness_bands(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of ``K`` (Dirichlet at ``r = 1``)."""
        rf = self.faces
        w = (1 + rf**2) * rf ** (self.d - 1) / self.dr
        diag = w.copy()
        diag[1:] += w[:-1]
        return diag, -w[:-1]

    def mass(self) -> np.ndarray:
        return self.nodes ** (self.d - 1) * self.dr

    def quotient(self, u: np.ndarray) -> float:
        """Discrete Rayleigh quotient of nodal values ``u``."""
        diag, off = self.stiffness_bands()
        num = diag @ u**2 + 2 * off @ (u[:-1] * u[1:])
        den = self.mass() @ u**2
        if den <= 0:
            raise ZeroDenominator("trial function vanishes")
        return float(num / den)


def rayleigh_quotient(f, d: int, df=None, n_quad: int = 200, tol: float = 1e-10) -> float:
    """``Q[f]`` for a callable radial profile with ``f(1) = 0``.

    Gauss-Legendre quadrature on ``(0, 1)``; ``df`` defaults to a fourth
    order central difference.
    """
    t, w = roots_legendre(n_quad)
    r = 0.5 * (t + 1)
    w = 0.5 * w
    fr = np.asarray(f(r), dtype=float)
    scale = max(float(np.max(np.abs(fr))), np.finfo(float).tiny)
    if abs(float(f(np.array([1.0]))[0])) > tol * scale:
        raise ValueError("trial function must vanish at r = 1")
    if df is None:
        eps = 1e-3
        dfr = (f(r - 2 * eps) - 8 * f(r - eps) + 8 * f(r + eps) - f(r + 2 * eps)) / (12 * eps)
    else:
        dfr = df(r)
    jac = r ** (d - 1)
    den = float(np.sum(w * jac * fr**2))
    if den <= 0 or den < np.finfo(float).tiny:
        raise ZeroDenominator("trial function vanishes")
    return float(np.sum(w * jac * (1 + r**2) * dfr**2)) / den


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    mesh: RadialMesh
    iterations: int
    value_2n: float | None = None

    @property
    def extrapolated(self) -> float | None:
        """Richardson value ``(4 lambda_2n - lambda_n) / 3``."""
        if self.value_2n is None:
            return None
        return (4 * self.value_2n - self.value) / 3


def _inverse_iteration(mesh: RadialMesh, tol: float = 1e-14, maxiter: int = 500):
    diag, off = mesh.stiffness_bands()
    ab = np.zeros((3, mesh.n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    Mv = mesh.mass()
    u = np.cos(0.5 * np.pi * mesh.nodes)
    lam = mesh.quotient(u)
    for it in range(1, maxiter + 1):
        v = solve_banded((1, 1), ab, Mv * u)
        v /= np.sqrt(Mv @ v**2)
        new = mesh.quotient(v)
        if abs(new - lam) <= tol * abs(new) and it > 2:
            return new, v, it
        lam, u = new, v
    raise EigSolveFailure(f"inverse iteration did not converge in {maxiter} steps")


def lambda1(d: int, n: int = 256, extrapolate: bool = True) -> EigenResult:
    """Smallest eigenvalue of ``K u = lambda M u`` by inverse iteration (shift 0).

    With ``extrapolate`` the problem is also solved with ``2n`` nodes and
    :attr:`EigenResult.extrapolated` holds the Richardson value.
    """
    if n < 64:
        raise ValueError("n must be at least 64")
    mesh = RadialMesh(n, d)
    lam, u, it = _inverse_iteration(mesh)
    if u[0] < 0:
        u = -u
    res = EigenResult(lam, u, mesh, it)
    if extrapolate:
        res.value_2n = _inverse_iteration(RadialMesh(2 * n, d))[0]
    return res


def sign_changes(u: np.ndarray) -> int:
    s = np.sign(u[np.abs(u) > 1e-14 * np.max(np.abs(u))])
    return int(np.count_nonzero(s[1:] != s[:-1]))


# --- divergence identities -------------------------------------------------

def divergence_identity_residual(f: np.ndarray, g: np.ndarray, u: np.ndarray,
                                 grid: GridSpec, ball: Ball, order: int = 3) -> float:
    """Relative residual of the weighted Green identity on ``ball``.

    ``int_B f div(u grad g) + int_B grad f . (u grad g) - int_dB f u d_n g``
    divided by the sum of the absolute values of the three terms.
    """
    gf = gradient(f, grid)
    gg = gradient(g, grid)
    flux = [u * c for c in gg]
    div = sum(gradient(c, grid)[i] for i, c in enumerate(flux))
    t1 = ball_integral(f * div, grid, ball, method="polar", order=order)
    t2 = ball_integral(sum(a * b for a, b in zip(gf, flux)), grid, ball,
                       method="polar", order=order)
    pts, wts = sphere_nodes(ball, grid)
    normal = (pts - np.array(ball.center)) / ball.radius
    dn = sum(normal[:, i] * sample(c, grid, pts, order) for i, c in enumerate(flux))
    t3 = float((sample(f, grid, pts, order) * dn) @ wts)
    scale = abs(t1) + abs(t2) + abs(t3)
    return (t1 + t2 - t3) / scale if scale else 0.0


def laplacian_identity_residual(f: np.ndarray, grid: GridSpec, ball: Ball,
                                order: int = 3) -> float:
    """Relative residual of ``int_B (rho^2 - r^2) lap(f^2) = 2 rho int_dB f^2 - 2 d int_B f^2``."""
    rho, c = ball.radius, np.array(ball.center)
    lap = laplacian(f**2, grid)

    def parabola(pts):
        return rho**2 - np.sum((pts - c) ** 2, axis=-1)

    lhs = ball_integral(lap, grid, ball, parabola, method="polar", order=order)
    pts, wts = sphere_nodes(ball, grid)
    surf = float((sample(f**2, grid, pts, order)) @ wts)
    vol = ball_integral(f**2, grid, ball, method="polar", order=order)
    rhs = 2 * rho * surf - 2 * grid.d * vol
    scale = abs(lhs) + 2 * rho * abs(surf) + 2 * grid.d * abs(vol)
    return (lhs - rhs) / scale if scale else 0.0
