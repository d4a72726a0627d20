"""Weighted exterior Dirichlet problem for the boundary correction Gamma.

For a ball ``B`` inside the half-space ``{x1 > 0}`` and boundary data ``h``
on ``dB``, ``Gamma_h`` is the minimum of

    J(u) = int_{x1 > 0, x not in B} x1 (|grad u|^2 + m^2 u^2) dx

over extensions ``u`` with ``u = h`` on ``dB``. The minimizer solves
``div(x1 grad u) = m^2 x1 u``.

Discretization
--------------
Piecewise-linear elements with the weight integrated exactly (clipped to
``x1 >= 0`` on cut triangles).

* ``d = 1``: ``B = (a, b)``, graded meshes on ``(0, a)`` and ``(b, L_out)``.
* ``d = 2``: ``B`` is a disk of radius ``rho`` whose center sits at distance
  ``offset`` from the plane; a polar mesh with geometric radial grading
  covers the annulus ``rho <= r <= L_out`` around the center.

The admissible functions live on the whole space and the weight vanishes on
``{x1 = 0}``, so nothing is imposed there (natural condition). The
alternative ``inner_bc='dirichlet'`` (d = 1 only) pins ``u(eps) = 0``. The
outer circle ``r = L_out`` carries ``u = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bumps import smooth_step
from .errors import SolveFailure, TraceMismatch, TruncationNotConverged
from .grid import GridSpec
from .quadrature import sample, trig_interpolate
from .regions import Ball

DIRECT_LIMIT = 250_000
CG_RTOL = 1e-12


# --- boundary data ---------------------------------------------------------

@dataclass(frozen=True)
class BoundaryData:
    """Samples of ``h`` on ``dB``.

    ``d = 1``: ``(h(a), h(b))``. ``d = 2``: values at ``theta_k = 2 pi k / n``
    measured from the ball center, ``theta = 0`` pointing along ``+x1``.
    """

    values: np.ndarray
    d: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("boundary samples must be finite")
        if self.d == 1 and v.size != 2:
            raise ValueError("d = 1 boundary data are two endpoint values")
        if self.d == 2 and (v.size < 8 or v.size % 4):
            raise ValueError("d = 2 boundary data need a multiple of 4 samples")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.size) / self.size

    @classmethod
    def from_function(cls, func, n_theta: int = 256) -> "BoundaryData":
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        return cls(func(th), 2)

    @classmethod
    def from_field(cls, f: np.ndarray, grid: GridSpec, ball: Ball,
                   n_theta: int | None = None) -> "BoundaryData":
        """Trace of a grid field on the ball boundary (spline interpolation)."""
        c, rho = np.array(ball.center), ball.radius
        if grid.d == 1:
            return cls(trig_interpolate(f, grid, [c[0] - rho, c[0] + rho]), 1)
        if grid.d != 2:
            raise ValueError("boundary traces are implemented for d = 1, 2")
        n = 256 if n_theta is None else n_theta
        th = 2 * np.pi * np.arange(n) / n
        pts = c + rho * np.stack([np.cos(th), np.sin(th)], axis=-1)
        return cls(sample(f, grid, pts), 2)

    def reflected(self) -> "BoundaryData":
        """``h`` mirrored in the plane orthogonal to ``x1`` through the center."""
        if self.d == 1:
            return BoundaryData(self.values[::-1], 1)
        n = self.size
        return BoundaryData(self.values[(n // 2 - np.arange(n)) % n], 2)

    def in_slab(self, ball: Ball, lower: bool = True) -> "BoundaryData":
        """Data for the problem whose plane is the lower (or upper) slab face."""
        return self if lower else self.reflected()

    def __add__(self, other: "BoundaryData") -> "BoundaryData":
        return BoundaryData(self.values + other.values, self.d)

    def __mul__(self, alpha: float) -> "BoundaryData":
        return BoundaryData(alpha * self.values, self.d)

    __rmul__ = __mul__


# --- mesh and assembly -----------------------------------------------------

def _graded_1d(lo: float, hi: float, delta: float, cap: float) -> np.ndarray:
    """Nodes from ``lo > 0`` with spacing ``delta * min(x, cap)``.

    The last node is the first one at or beyond ``hi``, so meshes for a
    larger ``hi`` extend this one.
    """
    xs = [lo]
    x = lo
    while x < hi:
        x = x + delta * min(x, cap)
        xs.append(x)
    return np.array(xs)


def _p1_1d(x: np.ndarray):
    x0, x1 = x[:-1], x[1:]
    h = x1 - x0
    w = 0.5 * (x1**2 - x0**2)
    i = np.arange(x.size - 1)
    rows = np.concatenate([i, i, i + 1, i + 1])
    cols = np.concatenate([i, i + 1, i, i + 1])
    k = w / h**2
    K = np.concatenate([k, -k, -k, k])
    m00 = h * (x0 / 3 + h / 12)
    m01 = h * (x0 / 6 + h / 12)
    m11 = h * (x0 / 3 + h / 4)
    M = np.concatenate([m00, m01, m01, m11])
    n = x.size
    return (sp.coo_matrix((K, (rows, cols)), shape=(n, n)).tocsr(),
            sp.coo_matrix((M, (rows, cols)), shape=(n, n)).tocsr())


def _positive_part_integral(v: np.ndarray, area: np.ndarray) -> np.ndarray:
    """``int_T max(l, 0)`` for the linear ``l`` with vertex values ``v``."""
    out = area * v.mean(axis=1)
    out[np.all(v <= 0, axis=1)] = 0.0
    npos = (v > 0).sum(axis=1)
    for idx in np.nonzero(npos == 1)[0]:
        p = np.argmax(v[idx])
        vp = v[idx, p]
        others = np.delete(v[idx], p)
        frac = vp**2 / ((vp - others[0]) * (vp - others[1]))
        out[idx] = area[idx] * frac * vp / 3
    for idx in np.nonzero(npos == 2)[0]:
        q = np.argmin(v[idx])
        vq = v[idx, q]
        others = np.delete(v[idx], q)
        frac = vq**2 / ((vq - others[0]) * (vq - others[1]))
        out[idx] = area[idx] * v[idx].mean() - area[idx] * frac * vq / 3
    return out


def _p1_2d(nodes: np.ndarray, tri: np.ndarray, weight: np.ndarray):
    p = nodes[tri]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    # barycentric gradients
    g = np.empty((tri.shape[0], 3, 2))
    for i in range(3):
        a, b = p[:, (i + 1) % 3], p[:, (i + 2) % 3]
        g[:, i, 0] = (a[:, 1] - b[:, 1]) / det
        g[:, i, 1] = (b[:, 0] - a[:, 0]) / det
    v = weight[tri]
    wint = _positive_part_integral(v, area)
    Kloc = wint[:, None, None] * np.einsum("tik,tjk->tij", g, g)
    vp = np.maximum(v, 0.0)
    s = vp.sum(axis=1)
    Mloc = np.empty_like(Kloc)
    for i in range(3):
        for j in range(3):
            if i == j:
                Mloc[:, i, i] = area * (vp[:, i] / 10 + (s - vp[:, i]) / 30)
            else:
                k = 3 - i - j
                Mloc[:, i, j] = area * ((vp[:, i] + vp[:, j]) / 30 + vp[:, k] / 60)
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = nodes.shape[0]
    K = sp.coo_matrix((Kloc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Mloc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return K, M


@dataclass(eq=False)
class ExteriorProblem:
    """Assembled exterior problem.

    Attributes
    ----------
    d : int
    m : float
    nodes : ndarray
        ``d = 1``: coordinates ``x1``. ``d = 2``: local coordinates
        ``(x1, x2)`` with the plane at ``x1 = 0``.
    boundary : ndarray
        Node indices on ``dB`` (in the order of the boundary samples).
    fixed_zero : ndarray
        Nodes pinned to zero (outer circle, inner ``eps``, unreferenced).
    K, M : sparse matrices
        Weighted stiffness ``int x1 grad u . grad v`` and mass
        ``int x1 u v``; the system is ``K + m^2 M``.
    """

    d: int
    m: float
    nodes: np.ndarray
    boundary: np.ndarray
    fixed_zero: np.ndarray
    K: sp.csr_matrix
    M: sp.csr_matrix
    geometry: dict = field(default_factory=dict)
    build: dict = field(default_factory=dict)

    # -- constructors ------------------------------------------------------

    @classmethod
    def interval(cls, a: float, b: float, m: float, L_out: float | None = None,
                 delta: float = 2e-3, inner_bc: str = "natural",
                 eps: float = 1e-6) -> "ExteriorProblem":
        """``B = (a, b)`` with ``0 <= a < b`` on the half-line."""
        if not 0 <= a < b:
            raise ValueError("need 0 <= a < b")
        if L_out is None:
            L_out = b + 40.0 / m if m > 0 else 100.0 * b
        if L_out <= b:
            raise ValueError("L_out must exceed b")
        cap = max(b, 1.0 / m) if m > 0 else np.inf
        outer = _graded_1d(b, L_out, delta, cap)
        L_out = float(outer[-1])
        parts, boundary, zero = [], [], []
        if a > 0:
            if inner_bc == "natural":
                inner = np.linspace(0.0, a, int(np.ceil(1 / delta)) + 1)
            elif inner_bc == "dirichlet":
                if not 0 < eps < a:
                    raise ValueError("need 0 < eps < a")
                n = int(np.ceil(np.log(a / eps) / np.log1p(delta))) + 1
                inner = np.geomspace(eps, a, n)
                zero.append(0)
            else:
                raise ValueError(f"unknown inner_bc {inner_bc!r}")
            parts.append(inner)
            boundary.append(inner.size - 1)
        offset = sum(p.size for p in parts)
        parts.append(outer)
        boundary.append(offset)
        zero.append(offset + outer.size - 1)
        nodes = np.concatenate(parts)
        K, M = sp.csr_matrix((nodes.size,) * 2), sp.csr_matrix((nodes.size,) * 2)
        start = 0
        for part in parts:
            k, mm = _p1_1d(part)
            idx = np.arange(start, start + part.size)
            P = sp.csr_matrix((np.ones(part.size), (idx, np.arange(part.size))),
                              shape=(nodes.size, part.size))
            K = K + P @ k @ P.T
            M = M + P @ mm @ P.T
            start += part.size
        if a == 0:
            # no inner segment: h(a) is unused, keep a placeholder slot
            boundary = [-1] + boundary
        geom = {"a": float(a), "b": float(b), "L_out": L_out, "inner_bc": inner_bc,
                "eps": float(eps)}
        build = {"kind": "interval", "delta": delta}
        return cls(1, float(m), nodes, np.array(boundary), np.array(zero), K.tocsr(),
                   M.tocsr(), geom, build)

    @classmethod
    def disk(cls, rho: float, m: float, offset: float | None = None, L_out: float | None = None,
             n_theta: int = 256, aspect: float = 1.0) -> "ExteriorProblem":
        """Exterior of a disk of radius ``rho`` centered at ``(offset, 0)``."""
        offset = rho if offset is None else offset
        if offset < rho:
            raise ValueError("the disk must lie in x1 >= 0")
        if n_theta % 4:
            raise ValueError("n_theta must be a multiple of 4")
        if L_out is None:
            L_out = 64.0 * rho if m == 0 else rho + 20.0 / m
        if L_out <= rho:
            raise ValueError("L_out must exceed the radius")
        # ring ratio close to exp(aspect 2 pi / n_theta), adjusted to hit L_out
        n_r = int(np.ceil(np.log(L_out / rho) * n_theta / (aspect * 2 * np.pi))) + 1
        r = rho * np.exp(np.linspace(0.0, np.log(L_out / rho), n_r))
        L_out = float(L_out)
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        R, TH = np.meshgrid(r, th, indexing="ij")
        nodes = np.stack([offset + R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
        return cls._from_polar(nodes, n_r, n_theta, float(m),
                               {"rho": float(rho), "offset": float(offset), "L_out": L_out},
                               {"kind": "disk", "n_theta": n_theta, "aspect": aspect})

    @classmethod
    def _from_polar(cls, nodes, n_r, n_theta, m, geom, build):
        i, j = np.meshgrid(np.arange(n_r - 1), np.arange(n_theta), indexing="ij")
        i, j = i.ravel(), j.ravel()
        jn = (j + 1) % n_theta
        n0, n1 = i * n_theta + j, (i + 1) * n_theta + j
        n2, n3 = (i + 1) * n_theta + jn, i * n_theta + jn
        tri = np.concatenate([np.stack([n0, n1, n2], 1), np.stack([n0, n2, n3], 1)])
        K, M = _p1_2d(nodes, tri, nodes[:, 0])
        boundary = np.arange(n_theta)
        outer = np.arange((n_r - 1) * n_theta, n_r * n_theta)
        diag = K.diagonal() + M.diagonal()
        dead = np.nonzero(diag <= 0)[0]
        zero = np.union1d(outer, np.setdiff1d(dead, boundary))
        build = dict(build, n_r=n_r)
        return cls(2, m, nodes, boundary, zero, K, M, geom, build)

    @classmethod
    def for_ball(cls, radius: float, m: float, d: int, n_theta: int | None = None,
                 margin: float = 0.0, **kw) -> "ExteriorProblem":
        """``B`` at distance ``margin * radius`` from the plane.

        ``margin = 0`` is the tight placement of the slab argument; the
        boundary flux then converges slowly near the touching point, so flux
        cross-checks use a positive margin.
        """
        gap = margin * radius
        if d == 1:
            return cls.interval(gap, gap + 2 * radius, m, **kw)
        if d == 2:
            return cls.disk(radius, m, radius + gap, n_theta=n_theta or 256, **kw)
        raise ValueError("the exterior problem is implemented for d = 1, 2")

    # -- variants ----------------------------------------------------------

    def with_mass(self, m: float) -> "ExteriorProblem":
        """Same mesh and matrices with another mass."""
        return replace(self, m=float(m))

    def scaled(self, lam: float, m: float | None = None) -> "ExteriorProblem":
        """Mesh dilated by ``lam`` (reassembled); mass unchanged unless given."""
        m = self.m if m is None else m
        geom = {k: (v * lam if isinstance(v, float) else v)
                for k, v in self.geometry.items()}
        if self.d == 1:
            K, M = (lam**0) * self.K, lam**2 * self.M
            # weight x and dx scale by lam, derivatives by 1/lam
            return replace(self, m=float(m), nodes=lam * self.nodes, K=K, M=M, geometry=geom)
        nodes = lam * self.nodes
        out = ExteriorProblem._from_polar(nodes, self.build["n_r"], self.build["n_theta"],
                                          float(m), geom, dict(self.build))
        return out

    def refined(self, L_out: float | None = None, factor: float = 2) -> "ExteriorProblem":
        """Rebuild with finer resolution (``factor``) and/or another ``L_out``.

        ``factor = 0.5`` coarsens; in ``d = 2`` the boundary nodes of the
        coarse mesh are every second node of this one.
        """
        g = self.geometry
        L = g["L_out"] if L_out is None else L_out
        if self.d == 1:
            return ExteriorProblem.interval(g["a"], g["b"], self.m, L,
                                            self.build["delta"] / factor, g["inner_bc"], g["eps"])
        n = int(round(self.build["n_theta"] * factor))
        return ExteriorProblem.disk(g["rho"], self.m, g["offset"], L, n, self.build["aspect"])

    # -- linear algebra ----------------------------------------------------

    @property
    def matrix(self) -> sp.csr_matrix:
        return (self.K + self.m**2 * self.M).tocsr()

    def dirichlet_values(self, h: BoundaryData) -> tuple[np.ndarray, np.ndarray]:
        """Indices and values of all constrained nodes."""
        if h.d != self.d:
            raise ValueError("boundary data dimension mismatch")
        if self.d == 1:
            idx = self.boundary
            keep = idx >= 0
            bidx, bval = idx[keep], h.values[keep]
        else:
            if h.size != self.boundary.size:
                raise ValueError(f"need {self.boundary.size} boundary samples, got {h.size}")
            bidx, bval = self.boundary, h.values
        zero = np.setdiff1d(self.fixed_zero, bidx)
        return (np.concatenate([bidx, zero]),
                np.concatenate([bval, np.zeros(zero.size)]))

    def free_nodes(self, fixed: np.ndarray) -> np.ndarray:
        mask = np.ones(self.nodes.shape[0], dtype=bool)
        mask[fixed] = False
        return np.nonzero(mask)[0]


@dataclass(eq=False)
class Minimizer:
    """Discrete minimizer ``u_h`` (nodal values on ``problem.nodes``)."""

    u: np.ndarray
    problem: ExteriorProblem
    h: BoundaryData
    info: dict = field(default_factory=dict)

    def energy(self) -> float:
        return float(self.u @ (self.problem.matrix @ self.u))


def solve_minimizer(p: ExteriorProblem, h: BoundaryData, method: str = "auto",
                    x0: np.ndarray | None = None) -> Minimizer:
    """Minimize the discrete weighted energy with trace ``h`` on ``dB``.

    ``method``: ``'direct'`` (sparse LU), ``'cg'`` (conjugate gradients with
    Jacobi preconditioning, optional start ``x0`` on the free nodes) or
    ``'auto'`` (direct below ``DIRECT_LIMIT`` unknowns).
    """
    A = p.matrix
    fixed, vals = p.dirichlet_values(h)
    free = p.free_nodes(fixed)
    u = np.zeros(p.nodes.shape[0])
    u[fixed] = vals
    if not np.any(vals):
        return Minimizer(u, p, h, {"method": "trivial"})
    Aff = A[free][:, free].tocsc()
    rhs = -(A[free][:, fixed] @ vals)
    if method == "auto":
        method = "direct" if free.size < DIRECT_LIMIT else "cg"
    if method == "direct":
        try:
            uf = spla.splu(Aff).solve(rhs)
        except RuntimeError as exc:
            raise SolveFailure(f"factorization failed: {exc}") from None
        info = {"method": "direct"}
    elif method == "cg":
        dinv = 1.0 / Aff.diagonal()
        pre = spla.LinearOperator(Aff.shape, matvec=lambda v: dinv * v)
        uf, code = spla.cg(Aff, rhs, x0=x0, rtol=CG_RTOL, atol=0.0, maxiter=20 * free.size,
                           M=pre)
        if code != 0:
            raise SolveFailure(f"conjugate gradients did not converge (code {code})")
        info = {"method": "cg"}
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(uf)):
        raise SolveFailure("non-finite solution")
    u[free] = uf
    return Minimizer(u, p, h, info)


# --- Gamma -----------------------------------------------------------------

@dataclass
class GammaResult:
    value: float
    flux_variational: float
    flux_geometric: float
    L_out: float
    value_2L: float | None = None
    extrapolated: float | None = None
    value_richardson: float | None = None
    flux_richardson: float | None = None
    solution: Minimizer | None = field(default=None, repr=False)

    @property
    def flux_mismatch(self) -> float:
        """Relative volume/flux gap, mesh-extrapolated when available."""
        v, f = self.value, self.flux_geometric
        if self.value_richardson is not None:
            v, f = self.value_richardson, self.flux_richardson
        scale = abs(v) if v else 1.0
        return abs(f - v) / scale

    @property
    def best(self) -> float:
        """Truncation-extrapolated value when available."""
        return self.value if self.extrapolated is None else self.extrapolated


def _one_sided_derivative(r0, r1, r2, u0, u1, u2):
    h1, h2 = r1 - r0, r2 - r1
    return (-(2 * h1 + h2) / (h1 * (h1 + h2)) * u0
            + (h1 + h2) / (h1 * h2) * u1
            - h1 / (h2 * (h1 + h2)) * u2)


def boundary_flux(sol: Minimizer) -> float:
    """``int_dB x1 h d_n u dS`` with one-sided second-order differences.

    ``n`` is the outward normal of the exterior domain (pointing into B).
    """
    p, u, x = sol.problem, sol.u, sol.problem.nodes
    if p.d == 1:
        total = 0.0
        ia, ib = p.boundary
        if ia >= 0:
            d = _one_sided_derivative(x[ia], x[ia - 1], x[ia - 2], u[ia], u[ia - 1], u[ia - 2])
            total += x[ia] * u[ia] * d
        d = _one_sided_derivative(x[ib], x[ib + 1], x[ib + 2], u[ib], u[ib + 1], u[ib + 2])
        total += -x[ib] * u[ib] * d
        return float(total)
    n = p.build["n_theta"]
    rho, offset = p.geometry["rho"], p.geometry["offset"]
    r = np.hypot(x[: 3 * n: n, 0] - offset, x[: 3 * n: n, 1])
    u0, u1, u2 = u[:n], u[n:2 * n], u[2 * n:3 * n]
    du = _one_sided_derivative(r[0], r[1], r[2], u0, u1, u2)
    th = 2 * np.pi * np.arange(n) / n
    w = np.maximum(offset + rho * np.cos(th), 0.0)
    return float(np.sum(w * u0 * (-du)) * rho * 2 * np.pi / n)


def variational_flux(sol: Minimizer) -> float:
    """``sum_b h_b (A u)_b`` over boundary nodes (discrete Green identity)."""
    p = sol.problem
    b = p.boundary[p.boundary >= 0]
    return float(sol.u[b] @ (p.matrix @ sol.u)[b])


def coarsened_data(h: BoundaryData) -> BoundaryData:
    """Boundary data on the mesh coarsened by two (every second sample)."""
    return h if h.d == 1 else BoundaryData(h.values[::2], 2)


def gamma(p: ExteriorProblem, h: BoundaryData, truncation_tol: float | None = None,
          extrapolate: bool = False, richardson: bool = False,
          method: str = "auto") -> GammaResult:
    """``Gamma_h`` with flux cross-checks.

    Parameters
    ----------
    truncation_tol : float, optional
        Re-solve with ``2 L_out`` and raise :class:`TruncationNotConverged`
        when the relative change exceeds this value.
    extrapolate : bool
        Re-solve with ``2 L_out`` and record the Richardson value
        ``2 Gamma(2L) - Gamma(L)`` (first order in ``1/L_out``; used for
        massless disks, where the minimizer decays algebraically).
    richardson : bool
        Re-solve on the mesh coarsened by two and record second-order
        Richardson values of both the volume energy and the geometric flux.
    """
    sol = solve_minimizer(p, h, method)
    value = sol.energy()
    res = GammaResult(value, variational_flux(sol), boundary_flux(sol),
                      p.geometry["L_out"], solution=sol)
    if richardson:
        coarse = solve_minimizer(p.refined(factor=0.5), coarsened_data(h), method)
        res.value_richardson = (4 * value - coarse.energy()) / 3
        res.flux_richardson = (4 * res.flux_geometric - boundary_flux(coarse)) / 3
    if truncation_tol is None and not extrapolate:
        return res
    p2 = p.refined(L_out=2 * p.geometry["L_out"], factor=1)
    v2 = solve_minimizer(p2, h, method).energy()
    res.value_2L = v2
    if extrapolate:
        res.extrapolated = 2 * v2 - value
    if truncation_tol is not None:
        scale = max(abs(value), np.finfo(float).tiny)
        if abs(v2 - value) > truncation_tol * scale:
            raise TruncationNotConverged(
                f"doubling L_out changed Gamma by {abs(v2 - value) / scale:.2e} (relative)")
    return res


# --- properties ------------------------------------------------------------

@dataclass
class GammaPropertiesReport:
    convexity_gap_h: float
    homogeneity_error: float
    masses: tuple
    gammas_m: tuple
    monotone_in_m: bool
    convexity_gaps_m: tuple
    scaling_stated_error: float
    scaling_dilation_error: float
    scale: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def gamma_properties_report(p: ExteriorProblem, h1: BoundaryData, h2: BoundaryData,
                            masses=(0.0, 0.5, 1.0, 2.0), lam: float = 1.5,
                            alpha: float = 2.0) -> GammaPropertiesReport:
    """Evaluate the structural properties of ``Gamma`` on one mesh.

    * ``convexity_gap_h = (G(h1) + G(h2))/2 - G((h1 + h2)/2)`` (>= 0),
    * ``homogeneity_error = |G(alpha h1) / (alpha^2 G(h1)) - 1|``,
    * ``Gamma`` over ``masses`` (expected non-decreasing) and its midpoint
      convexity gaps in ``m`` (reported only),
    * ``scaling_stated_error``: relative defect of
      ``G(h_lam, lam m, lam B) = lam^2 G(h, m, B)``,
    * ``scaling_dilation_error``: relative defect of
      ``G(h_lam, m / lam, lam B) = lam^(d-1) G(h, m, B)``.

    Dilated problems reuse the dilated mesh, so the second law is exact up
    to round-off.
    """
    def G(prob, h):
        return solve_minimizer(prob, h).energy()

    g1, g2 = G(p, h1), G(p, h2)
    gmid = G(p, 0.5 * (h1 + h2))
    scale = max(abs(g1), abs(g2), np.finfo(float).tiny)
    gap_h = 0.5 * (g1 + g2) - gmid
    hom = abs(G(p, alpha * h1) / (alpha**2 * g1) - 1) if g1 else abs(G(p, alpha * h1))
    gm = tuple(G(p.with_mass(m), h1) for m in masses)
    mono = all(b >= a - 1e-12 * scale for a, b in zip(gm, gm[1:]))
    gaps = tuple(0.5 * (gm[i - 1] + gm[i + 1]) - G(p.with_mass(0.5 * (masses[i - 1] + masses[i + 1])), h1)
                 for i in range(1, len(masses) - 1))
    d = p.d
    stated = G(p.scaled(lam, lam * p.m), h1)
    dilated = G(p.scaled(lam, p.m / lam), h1)
    err_stated = abs(stated / (lam**2 * g1) - 1) if g1 else abs(stated)
    err_dil = abs(dilated / (lam ** (d - 1) * g1) - 1) if g1 else abs(dilated)
    return GammaPropertiesReport(gap_h, hom, tuple(masses), gm, mono, gaps,
                                 err_stated, err_dil, scale)


# --- residuals -------------------------------------------------------------

def strong_residual(sol: Minimizer, margin: float = 0.1) -> float:
    """RMS of ``d1 u - x1 (m^2 u - lap u)`` at interior nodes.

    Nodes with ``x1 < margin * rho`` (or ``margin * b``) and the nodes next
    to the mesh boundaries are excluded. Finite differences of the nodal
    values; the residual decays as the mesh is refined.
    """
    p, u, m = sol.problem, sol.u, sol.problem.m
    if p.d == 1:
        ib = p.boundary[1]
        x = p.nodes[ib:]
        v = u[ib:]
        x0, x1, x2 = x[:-2], x[1:-1], x[2:]
        h1, h2 = x1 - x0, x2 - x1
        d1 = (-h2 / (h1 * (h1 + h2)) * v[:-2] + (h2 - h1) / (h1 * h2) * v[1:-1]
              + h1 / (h2 * (h1 + h2)) * v[2:])
        d2 = 2 * (v[:-2] / (h1 * (h1 + h2)) - v[1:-1] / (h1 * h2) + v[2:] / (h2 * (h1 + h2)))
        res = d1 - x1 * (m**2 * v[1:-1] - d2)
        keep = x1 < p.geometry["L_out"] * 0.9
        return float(np.sqrt(np.mean(res[keep] ** 2)))
    n, n_r = p.build["n_theta"], p.build["n_r"]
    rho, offset = p.geometry["rho"], p.geometry["offset"]
    U = u.reshape(n_r, n)
    r = np.hypot(p.nodes[::n, 0] - offset, p.nodes[::n, 1])
    th = 2 * np.pi * np.arange(n) / n
    dth = 2 * np.pi / n
    r0, r1, r2 = r[:-2, None], r[1:-1, None], r[2:, None]
    h1, h2 = r1 - r0, r2 - r1
    Um, U0, Up = U[:-2], U[1:-1], U[2:]
    ur = -h2 / (h1 * (h1 + h2)) * Um + (h2 - h1) / (h1 * h2) * U0 + h1 / (h2 * (h1 + h2)) * Up
    urr = 2 * (Um / (h1 * (h1 + h2)) - U0 / (h1 * h2) + Up / (h2 * (h1 + h2)))
    ut = (np.roll(U0, -1, 1) - np.roll(U0, 1, 1)) / (2 * dth)
    utt = (np.roll(U0, -1, 1) - 2 * U0 + np.roll(U0, 1, 1)) / dth**2
    lap = urr + ur / r1 + utt / r1**2
    x1 = offset + r1 * np.cos(th)
    d1u = np.cos(th) * ur - np.sin(th) / r1 * ut
    res = d1u - x1 * (m**2 * U0 - lap)
    keep = (x1 > margin * rho) & (r1 < 0.5 * p.geometry["L_out"])
    return float(np.sqrt(np.mean(res[keep] ** 2)))


def galerkin_residual(sol: Minimizer) -> float:
    """``max |A u|`` on free nodes relative to ``max |A u|`` on ``dB``."""
    p = sol.problem
    Au = p.matrix @ sol.u
    fixed, _ = p.dirichlet_values(sol.h)
    free = p.free_nodes(fixed)
    b = p.boundary[p.boundary >= 0]
    scale = max(np.max(np.abs(Au[b])), np.finfo(float).tiny)
    return float(np.max(np.abs(Au[free])) / scale) if free.size else 0.0


# --- glued extensions ------------------------------------------------------

def evaluate_minimizer(sol: Minimizer, points: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of ``u_h`` at local points.

    Points with ``x1 < 0`` use the even reflection ``u(-x1, x2)``; points
    outside the truncation are zero. Points inside ``B`` return ``nan``.
    """
    p = sol.problem
    if p.d == 1:
        x = np.abs(np.asarray(points, dtype=float).ravel())
        out = np.zeros_like(x)
        ia, ib = p.boundary
        xb = p.nodes[ib:]
        outer = (x >= xb[0]) & (x <= xb[-1])
        out[outer] = np.interp(x[outer], xb, sol.u[ib:])
        if ia >= 0:
            xa = p.nodes[: ia + 1]
            inner = x <= xa[-1]
            out[inner] = np.interp(x[inner], xa, sol.u[: ia + 1], left=0.0)
        out[(x > p.geometry["a"]) & (x < p.geometry["b"])] = np.nan
        return out
    pts = np.atleast_2d(points).astype(float).copy()
    pts[:, 0] = np.abs(pts[:, 0])
    n, n_r = p.build["n_theta"], p.build["n_r"]
    rho, offset, L_out = p.geometry["rho"], p.geometry["offset"], p.geometry["L_out"]
    dx, dy = pts[:, 0] - offset, pts[:, 1]
    r = np.hypot(dx, dy)
    th = np.mod(np.arctan2(dy, dx), 2 * np.pi)
    out = np.zeros(pts.shape[0])
    inside = r < rho
    ok = (~inside) & (r <= L_out)
    lr = np.log(r[ok] / rho) / np.log(L_out / rho) * (n_r - 1)
    lr = np.clip(lr, 0.0, n_r - 1)
    i = np.minimum(lr.astype(int), n_r - 2)
    s = lr - i
    tt = th[ok] / (2 * np.pi / n)
    j = np.minimum(tt.astype(int), n - 1)
    t = tt - j
    U = sol.u.reshape(n_r, n)
    jn = (j + 1) % n
    u00, u10 = U[i, j], U[i + 1, j]
    u11, u01 = U[i + 1, jn], U[i, jn]
    lower = t <= s
    val = np.where(lower,
                   u00 + s * (u10 - u00) + t * (u11 - u10),
                   u00 + t * (u01 - u00) + s * (u11 - u01))
    out[ok] = val
    out[inside] = np.nan
    return out


@dataclass(eq=False)
class GluedField:
    values: np.ndarray
    grid: GridSpec
    trace_error: float


def _mirror_fill(sol: Minimizer, local: np.ndarray) -> np.ndarray:
    """Values on the mirror image of ``B`` across the plane.

    Neither ``f`` nor ``u`` is prescribed there. The reflected trace is
    continued inward with a smooth radial cutoff (linear between the
    endpoint values in ``d = 1``), so ``h = 0`` gives zero.
    """
    p, h = sol.problem, sol.h.values
    g = p.geometry
    if p.d == 1:
        x = np.abs(local[:, 0])
        return np.interp(x, [g["a"], g["b"]], h)
    dx, dy = np.abs(local[:, 0]) - g["offset"], local[:, 1]
    r = np.hypot(dx, dy) / g["rho"]
    n = h.size
    t = np.mod(np.arctan2(dy, dx), 2 * np.pi) / (2 * np.pi / n)
    j = np.minimum(t.astype(int), n - 1)
    s = t - j
    trace = (1 - s) * h[j] + s * h[(j + 1) % n]
    return trace * smooth_step(2 * r - 1)


def glue_extension(f: np.ndarray, grid: GridSpec, sol: Minimizer, ball: Ball,
                   lower: bool = True, trace_tol: float = 1e-3) -> GluedField:
    """``f`` inside ``ball`` and the minimizer outside, on the field grid.

    The minimizer's local frame has the lower (or upper) slab plane at
    ``x1 = 0``; beyond the plane it is reflected evenly, and the mirror
    image of ``ball`` is filled by :func:`_mirror_fill`. Raises
    :class:`TraceMismatch` when the minimizer's boundary values differ from
    the trace of ``f`` by more than ``trace_tol`` (relative to ``max |f|``).
    """
    p = sol.problem
    c, rho = np.array(ball.center), ball.radius
    trace = BoundaryData.from_field(f, grid, ball, p.boundary.size if p.d == 2 else None)
    trace = trace.in_slab(ball, lower)
    b = p.boundary >= 0
    err = float(np.max(np.abs(trace.values[b] - sol.h.values[b])))
    scale = max(float(np.max(np.abs(f))), np.finfo(float).tiny)
    if err > trace_tol * scale:
        raise TraceMismatch(f"trace mismatch {err:.2e} exceeds {trace_tol:.1e} relative")
    mesh = grid.mesh()
    coords = np.stack(np.broadcast_arrays(*mesh), axis=-1).reshape(-1, grid.d)
    local = coords - c
    if not lower:
        local[:, 0] = -local[:, 0]
    local[:, 0] += p.geometry["offset"] if p.d == 2 else p.geometry["b"] - rho
    u = evaluate_minimizer(sol, local if p.d == 2 else local[:, 0])
    inside = (grid.radius(c) < rho).reshape(-1)
    out = np.where(inside, f.reshape(-1), u)
    mirror = np.isnan(out)
    if np.any(mirror):
        out[mirror] = _mirror_fill(sol, local[mirror])
    return GluedField(out.reshape(grid.shape), grid, err / scale)
