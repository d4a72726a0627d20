import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

import oracles
from wavebound.bumps import bump, plateau
from wavebound.errors import ZeroDenominator
from wavebound.grid import GridSpec
from wavebound.regions import Ball
from wavebound.spectral_bounds import (RadialMesh, divergence_identity_residual,
                                       lambda1, laplacian_identity_residual,
                                       rayleigh_quotient, sign_changes)


def symbolic_quotient(expr, d):
    r = sp.symbols("r", positive=True)
    f = expr(r)
    num = sp.integrate((1 + r**2) * sp.diff(f, r) ** 2 * r ** (d - 1), (r, 0, 1))
    den = sp.integrate(f**2 * r ** (d - 1), (r, 0, 1))
    return num / den


# --- Rayleigh quotient ----------------------------------------------------------

def test_parabola_quotient_symbolic():
    exact = symbolic_quotient(lambda r: 1 - r**2, 2)
    assert exact == 10
    q = rayleigh_quotient(lambda r: 1 - r**2, 2, df=lambda r: -2 * r)
    assert abs(q - 10) < 1e-12
    # default finite-difference derivative
    assert abs(rayleigh_quotient(lambda r: 1 - r**2, 2) - 10) < 1e-10


@pytest.mark.parametrize("d", [1, 2, 3])
def test_polynomial_quotients_symbolic(d):
    expr = lambda r: (1 - r) * (2 + r - 3 * r**3)
    exact = float(symbolic_quotient(expr, d))
    assert abs(rayleigh_quotient(expr, d) - exact) < 1e-9 * exact


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_quotient_bounded_below(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=6)
    k = np.arange(6) + 0.5

    def f(r):
        return np.cos(np.pi * np.outer(np.atleast_1d(r), k)) @ a

    def df(r):
        return -np.pi * np.sin(np.pi * np.outer(np.atleast_1d(r), k)) @ (k * a)

    q = rayleigh_quotient(f, d, df=df)
    assert q >= d - 1
    assert abs(rayleigh_quotient(lambda r: 2 * f(r), d, df=lambda r: 2 * df(r)) - q) <= 1e-12 * q


def test_quotient_errors():
    with pytest.raises(ZeroDenominator):
        rayleigh_quotient(lambda r: 0 * r, 2)
    with pytest.raises(ValueError):
        rayleigh_quotient(lambda r: 1 + 0 * r, 2)
    with pytest.raises(ZeroDenominator):
        RadialMesh(64, 2).quotient(np.zeros(64))


# --- lowest eigenvalue ----------------------------------------------------------

def test_radial_mesh_layout():
    m = RadialMesh(64, 2)
    assert m.nodes[0] == pytest.approx(m.dr / 2)
    assert m.nodes[-1] + m.dr == pytest.approx(1.0)
    with pytest.raises(ValueError):
        RadialMesh(64, 4)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("n", [64, 256, 1024])
def test_lambda1_lower_bound(d, n):
    res = lambda1(d, n)
    assert res.value >= d - 1 - 1e-3
    assert res.extrapolated >= d - 1 - 1e-3


@pytest.mark.parametrize("d", [1, 2, 3])
def test_ground_state_properties(d):
    res = lambda1(d, 256)
    assert abs(res.mesh.quotient(res.vector) - res.value) <= 1e-8 * res.value
    assert sign_changes(res.vector) == 0
    assert res.vector[0] > 0


@pytest.mark.parametrize("d", [2, 3])
def test_extrapolation_stable(d):
    a, b = lambda1(d, 256).extrapolated, lambda1(d, 1024).extrapolated
    assert abs(a - b) <= 1e-4 * b


def test_line_against_dense_oracle():
    res = lambda1(1, 256)
    assert res.value >= 0
    dense = oracles.dense_line_eigenvalue(2000)
    assert abs(res.value - dense) <= 1e-4 * dense
    assert abs(res.extrapolated - dense) <= 1e-4 * dense


def test_lambda1_rejects_small_mesh():
    with pytest.raises(ValueError):
        lambda1(2, 32)


def test_sign_changes_counter():
    assert sign_changes(np.array([1.0, 2.0, -1.0, 0.0, 3.0])) == 2
    assert sign_changes(np.ones(5)) == 0


# --- divergence identities --------------------------------------------------------

BALL = Ball((0.1, -0.05), 1.0)


def _fields(N):
    g = GridSpec(2, N, 6.0)
    x, y = g.mesh()
    gg = np.broadcast_to(np.exp(-(x - 0.2) ** 2 - y**2), g.shape).copy()
    u = np.broadcast_to(1 + 0.3 * x**2 * np.exp(-(x**2 + y**2)), g.shape).copy()
    return g, gg, u


def test_identity_interior_support():
    g, gg, u = _fields(256)
    f = bump(g, (0.1, 0.0), 0.6, c=4.0)
    assert abs(divergence_identity_residual(f, gg, u, g, BALL)) <= 1e-6


def test_identity_crossing_boundary_converges():
    res = []
    for N in (256, 512, 1024):
        g, gg, u = _fields(N)
        res.append(abs(divergence_identity_residual(bump(g, (0.4, 0.2), 1.2, c=3.0), gg, u, g, BALL)))
    assert res[1] <= res[0] / 4 and res[2] <= res[1] / 4
    assert res[2] < 1e-8


def test_laplacian_identity_constant_on_ball():
    g = GridSpec(2, 512, 6.0)
    one = plateau(g, BALL.center, 1.2, 2.2)
    # lap(f^2) = 0 on the ball, and 2 |dB| = 4 pi equals 2 d |B| = 4 pi
    assert abs(laplacian_identity_residual(one, g, BALL)) < 1e-8


def test_laplacian_identity_crossing_boundary():
    g = GridSpec(2, 512, 6.0)
    f = bump(g, (0.4, 0.2), 1.2, c=3.0)
    assert abs(laplacian_identity_residual(f, g, BALL)) < 1e-8
