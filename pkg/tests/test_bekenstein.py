import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from wavebound.bekenstein import (check_localized, check_nonlocalized, entropy_surrogate,
                                  exterior_fraction, local_energy, massless_modular_M,
                                  modular_bound_margins, slab_entropies)
from wavebound.bumps import bump, random_cauchy_data
from wavebound.entropy import ball_entropy_massless
from wavebound.errors import NotLocalized, RegionOutsideGrid
from wavebound.field import stress_energy, total_energy
from wavebound.grid import CauchyData, GridSpec
from wavebound.regions import Ball, Box


def rel(a, b):
    return abs(a - b) / abs(b)


# --- local energy ----------------------------------------------------------------

def test_local_energy_full_box_and_supported():
    g = GridSpec(2, 256, 1.5)
    a = random_cauchy_data(g, 0.5, 1, Ball((0, 0), 1.0))
    E = total_energy(a)
    assert local_energy(a) == E
    assert rel(local_energy(a, Ball((0, 0), 1.0)), E) < 1e-10
    assert rel(local_energy(a, Box((-1, -1), (1, 1))), E) < 1e-10


def _analytic_wave(x, y):
    f = np.exp(-(x**2 + y**2)) * np.cos(x)
    g = x * y * np.exp(-(x**2 + 2 * y**2))
    fx = np.exp(-(x**2 + y**2)) * (-2 * x * np.cos(x) - np.sin(x))
    fy = -2 * y * f
    return f, g, 0.5 * (fx**2 + fy**2 + f**2 + g**2)


def test_local_energy_nonlocalized_against_oracles():
    g = GridSpec(2, 256, 6.0)
    x, y = np.broadcast_arrays(*g.mesh())
    f, gg, t00 = _analytic_wave(x, y)
    a = CauchyData(f, gg, 1.0, g)
    ball = Ball((0.2, -0.1), 1.0)
    E = local_energy(a, ball)
    exact = oracles.ball_cubature(lambda *p: _analytic_wave(*p)[2], ball.center, 1.0, 2)
    assert rel(E, exact) < 1e-6
    qmc = oracles.qmc_ball_integral(t00, g.axis(), ball.center, 1.0, n_log2=22)
    assert rel(E, qmc) < 1e-4


def test_local_energy_region_outside():
    g = GridSpec(2, 64, 1.5)
    z = np.zeros(g.shape)
    with pytest.raises(RegionOutsideGrid):
        local_energy(CauchyData(z, z, 1.0, g), Ball((1.0, 0), 1.0))


# --- localized checks ---------------------------------------------------------------

def test_massless_ball_positive_margin():
    g = GridSpec(2, 256, 1.5)
    a = random_cauchy_data(g, 0.0, 3, Ball((0, 0), 1.0))
    rep = check_localized(a, Ball((0, 0), 1.0))
    assert rep.kind == "ball-exact"
    assert rep.verdict == "PASS" and rep.margin > 0


def test_halfspace_mean_identity():
    g = GridSpec(2, 256, 1.5)
    a = random_cauchy_data(g, 1.0, 4, Box((-0.8, -1.0), (0.8, 1.0)))
    box = Box((-0.8, -1.0), (0.8, 1.0))
    rep = check_localized(a, box)
    # the two slab weights add up to 2R on the slab
    assert rel(rep.chain["s_mean"], 2 * np.pi * rep.half_width * rep.energy) < 1e-10


def test_g_only_interval_bound():
    g = GridSpec(1, 512, 1.5)
    B = Ball((0.0,), 1.0)
    gg = random_cauchy_data(g, 1.0, 9, B).g
    a = CauchyData(np.zeros_like(gg), gg, 1.0, g)
    S, _ = entropy_surrogate(a, B)
    assert S <= np.pi * 1.0 * g.integrate(gg**2) * (1 + 1e-12)
    assert check_localized(a, B).verdict == "PASS"


def test_not_localized():
    g = GridSpec(2, 128, 1.5)
    a = random_cauchy_data(g, 1.0, 5, Ball((0, 0), 1.0))
    with pytest.raises(NotLocalized):
        check_localized(a, Ball((0, 0), 0.5))
    assert exterior_fraction(a, Ball((0, 0), 0.5)) > 1e-10


@given(st.integers(0, 2**32), st.sampled_from([0.0, 0.5, 2.0]), st.sampled_from(["ball", "box"]))
def test_headline_inequality(seed, m, kind):
    g = GridSpec(2, 128, 1.5)
    region = Ball((0, 0), 1.0) if kind == "ball" else Box((-1.0, -0.7), (1.0, 0.7))
    rep = check_localized(random_cauchy_data(g, m, seed, region), region)
    assert rep.verdict == "PASS"
    assert rep.entropy <= rep.bound + rep.tol


# --- covariance and monotonicity --------------------------------------------------

def test_rotation_covariance():
    g = GridSpec(2, 256, 1.5)
    ball = Ball((0, 0), 1.0)
    a = random_cauchy_data(g, 0.0, 6, ball)
    # quarter turn about the grid node at the origin: index k -> N - k (mod N)
    def rot(v):
        return np.roll(np.rot90(v), 1, axis=0)
    b = a.replace(f=rot(a.f), g=rot(a.g))
    r1, r2 = check_localized(a, ball), check_localized(b, ball)
    assert rel(r2.entropy, r1.entropy) < 1e-8
    assert rel(r2.energy, r1.energy) < 1e-8


def test_translation_covariance_box():
    g = GridSpec(2, 256, 1.5)
    box = Box((-0.8, -0.6), (0.6, 0.6))
    a = random_cauchy_data(g, 1.0, 7, box)
    k = (5, -3)
    b = a.replace(f=np.roll(a.f, k, axis=(0, 1)), g=np.roll(a.g, k, axis=(0, 1)))
    r1 = check_localized(a, box)
    r2 = check_localized(b, box.translated(np.array(k) * g.dx))
    for key in ("entropy", "energy", "margin"):
        assert rel(getattr(r2, key), getattr(r1, key)) < 1e-8


def test_massless_ball_entropy_grows_with_radius():
    g = GridSpec(2, 256, 1.5)
    a = random_cauchy_data(g, 0.0, 8, Ball((0, 0), 0.8))
    S = [ball_entropy_massless(a, Ball((0, 0), r)) for r in (0.8, 0.9, 1.0, 1.2)]
    assert np.all(np.diff(S) >= 0)


# --- non-localized check --------------------------------------------------------------

def test_nonlocalized_reduces_to_localized():
    g = GridSpec(2, 256, 1.5)
    ball = Ball((0, 0), 1.0)
    a = random_cauchy_data(g, 0.0, 9, ball)
    loc = check_localized(a, ball)
    rep = check_nonlocalized(a, ball, 0.0)
    assert rep.verdict == "PASS"
    assert rel(rep.margin, loc.margin) < 1e-12


def test_nonlocalized_massive_inconclusive_label():
    g = GridSpec(2, 128, 4.0)
    f = bump(g, (0, 0), 3.0, c=0.2)
    a = CauchyData(f, np.zeros_like(f), 0.5, g, decay_tol=None)
    rep = check_nonlocalized(a, Ball((0, 0), 1.0), 0.0)
    assert rep.kind == "halfspace-min"
    assert rep.verdict in ("PASS", "INCONCLUSIVE")


# --- modular profile ---------------------------------------------------------------

def test_modular_profile_values():
    assert massless_modular_M(np.array([0.0]))[0] == 0.5
    assert np.all(massless_modular_M(np.array([-1.0, 1.0])) == 0)
    M = massless_modular_M(np.linspace(-1, 1, 1001))
    assert M.min() >= 0 and M.max() <= 1
    with pytest.raises(ValueError):
        massless_modular_M(np.array([1.5]))


def test_modular_profile_entropy_consistency():
    g = GridSpec(2, 256, 1.5)
    ball = Ball((0, 0), 1.0)
    gg = random_cauchy_data(g, 0.0, 10, ball).g
    a = CauchyData(np.zeros_like(gg), gg, 0.0, g)
    r = np.minimum(g.radius(), 1.0)
    lhs = np.pi * g.integrate(gg * massless_modular_M(r) * gg)
    assert rel(lhs, ball_entropy_massless(a, ball)) < 1e-6


def test_modular_margins():
    g = GridSpec(2, 128, 1.5)
    z = np.zeros(g.shape)
    assert modular_bound_margins(CauchyData(z, z, 0.0, g), Ball((0, 0), 1.0)) == (0.0, 0.0)

    g = GridSpec(2, 256, 1.5)
    ball = Ball((0, 0), 1.0)
    gg = bump(g, (0.1, 0.2), 0.6, c=4.0)
    a = CauchyData(np.zeros_like(gg), gg, 0.0, g)
    gm, fm = modular_bound_margins(a, ball)
    r2 = g.radius() ** 2
    expect = np.pi * g.integrate(gg**2) - 0.5 * np.pi * g.integrate(np.clip(1 - r2, 0, None) * gg**2)
    assert rel(gm, expect) < 1e-10 and gm > 0
    assert fm == 0.0


def test_modular_margins_massive_interval_sweep():
    g = GridSpec(1, 512, 1.5)
    B = Ball((0.0,), 1.0)
    for seed in range(100):
        gm, fm = modular_bound_margins(random_cauchy_data(g, 1.0, seed, B), B)
        assert gm >= -1e-10 and fm >= -1e-10


def test_slab_entropies_nonnegative():
    g = GridSpec(3, 64, 1.5)
    a = random_cauchy_data(g, 1.0, 2, Ball((0, 0, 0), 1.0), decay_tol=None)
    lo, hi = slab_entropies(a, Ball((0, 0, 0), 1.0))
    assert lo >= 0 and hi >= 0
    assert stress_energy(a).t00.min() >= 0
