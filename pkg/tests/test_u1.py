import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.special import erfc

import oracles
from wavebound.bumps import bump, random_field
from wavebound.errors import DecayViolated, ResampleUnderResolved
from wavebound.grid import GridSpec
from wavebound.regions import Ball
from wavebound.u1 import (CurrentProfile, ant_check, balance_check, dilation_flow_check,
                          dual_norm, halfline_entropy, interval_dilation, interval_entropy,
                          modular_pairing, null_energy_real, null_energy_spectral,
                          u1_complex_structure, u1_norm)


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def gauss():
    return CurrentProfile.from_function(lambda x: np.exp(-x**2), GridSpec(1, 1024, 20.0))


def seeded(seed, N=512, L=8.0):
    g = GridSpec(1, N, L)
    return CurrentProfile(random_field(g, np.random.default_rng(seed), Ball((0.0,), 3.0)), g)


def gaussian_entropy(a, side):
    """``pi int (x - a)_+ f'^2`` for ``f = exp(-x^2)`` in closed form.

    With ``I3(a) = int_a^inf x^3 e^{-2x^2}`` and ``I2(a) = int_a^inf x^2 e^{-2x^2}``
    the right entropy is ``4 pi (I3(a) - a I2(a))``; the left one follows by
    ``x -> -x``.
    """
    def I3(t):
        return np.exp(-2 * t * t) * (2 * t * t + 1) / 8

    def I2(t):
        return t * np.exp(-2 * t * t) / 4 + np.sqrt(2 * np.pi) / 16 * erfc(np.sqrt(2) * t)

    if side == ">":
        return 4 * np.pi * (I3(a) - a * I2(a))
    return 4 * np.pi * (I3(-a) + a * I2(-a))


# --- profile -----------------------------------------------------------------

def test_profile_representative_and_decay():
    g = GridSpec(1, 256, 8.0)
    f = CurrentProfile(np.exp(-g.axis() ** 2) + 3.0, g)
    assert f.values[0] == 0.0
    with pytest.raises(ValueError):
        f.values[1] = 1.0
    with pytest.raises(DecayViolated):
        CurrentProfile(np.sin(g.axis()), g)
    with pytest.raises(ValueError):
        CurrentProfile(np.zeros(10), g)


def test_functionals_invariant_under_constants():
    g = GridSpec(1, 512, 8.0)
    v = random_field(g, np.random.default_rng(3), Ball((0.0,), 3.0))
    f, h = CurrentProfile(v, g), CurrentProfile(v + 1.0, g)
    for fn in (u1_norm, dual_norm, null_energy_spectral,
               lambda p: halfline_entropy(p, 0.3), lambda p: interval_entropy(p, (-1, 2)),
               lambda p: balance_check(p, -0.5, 0.5).residual):
        # the stored representatives differ only by round-off
        assert abs(fn(f) - fn(h)) <= 1e-12 * max(abs(fn(f)), u1_norm(f))


# --- norm and complex structure -------------------------------------------------

def test_constant_has_zero_norm():
    g = GridSpec(1, 128, 4.0)
    f = CurrentProfile(np.full(g.shape, 2.5), g)
    assert u1_norm(f) == 0.0 and halfline_entropy(f) == 0.0


def test_gaussian_norm_against_oracle(gauss):
    exact = oracles.u1_norm_gaussian()
    assert rel(u1_norm(gauss, pad=64), exact) < 1e-6
    # the unpadded sum has an O(dp^2) quadrature error
    e1, e8 = rel(u1_norm(gauss), exact), rel(u1_norm(gauss, pad=8), exact)
    assert e8 < e1 / 30


def test_dual_formula(gauss):
    assert rel(dual_norm(gauss), u1_norm(gauss)) < 1e-8
    f = seeded(4)
    assert rel(dual_norm(f), u1_norm(f)) < 1e-8


def test_norm_refinement_stable():
    vals = []
    for N in (512, 1024):
        g = GridSpec(1, N, 8.0)
        vals.append(u1_norm(CurrentProfile(bump(g, 0.3, 2.0, c=2.0), g), pad=8))
    assert rel(vals[1], vals[0]) < 1e-8


def test_complex_structure_squares_to_minus_one():
    f = seeded(5)
    jjf = u1_complex_structure(u1_complex_structure(f))
    d = jjf.values + f.values
    # equal modulo constants
    assert np.max(np.abs(d - d.mean())) < 1e-10 * np.max(np.abs(f.values))


def test_complex_structure_isometry():
    f = seeded(6)
    assert rel(u1_norm(u1_complex_structure(f)), u1_norm(f)) < 1e-10


def test_complex_structure_hilbert_oracle():
    g = GridSpec(1, 512, 8.0)
    c0, w = 0.2, 1.5

    def fn(y):
        s = (y - c0) / w
        return np.exp(2.0 - 2.0 / (1 - s * s)) if abs(s) < 1 else 0.0

    jf = u1_complex_structure(CurrentProfile(bump(g, c0, w, c=2.0), g))
    x = g.axis()
    # compare modulo constants, relative to an interior reference node
    j = 100
    ref = oracles.periodic_hilbert(fn, x[j], g.L)
    for i in (200, 256, 300, 350, 400):
        oracle = oracles.periodic_hilbert(fn, x[i], g.L) - ref
        assert abs(jf.values[i] - jf.values[j] - oracle) < 1e-6


# --- entropies --------------------------------------------------------------------

def test_gaussian_halfline_entropy(gauss):
    assert rel(halfline_entropy(gauss, 0.0), np.pi / 2) < 1e-12


def test_halfline_support_left_of_cut():
    # resolved well enough that spectral ringing beyond the support is below 1e-14
    g = GridSpec(1, 2048, 8.0)
    f = CurrentProfile(bump(g, -1.0, 0.8, c=3.0), g)
    assert halfline_entropy(f, -2.0) > 0
    assert abs(halfline_entropy(f, 0.0)) < 1e-13 * halfline_entropy(f, -2.0)
    with pytest.raises(ValueError):
        halfline_entropy(f, 0.0, "=")


@given(st.integers(-30, 30), st.floats(-1.0, 1.0))
def test_halfline_translation_covariance(k, a):
    g = GridSpec(1, 1024, 8.0)
    v = random_field(g, np.random.default_rng(7), Ball((0.0,), 3.0))
    f, h = CurrentProfile(v, g), CurrentProfile(np.roll(v, k), g)
    s0 = halfline_entropy(f, a)
    assert abs(halfline_entropy(h, a + k * g.dx) - s0) < 1e-10 * s0


def test_halfline_monotone_convex():
    f = seeded(8)
    cuts = np.linspace(-4, 4, 81)
    S = np.array([halfline_entropy(f, c) for c in cuts])
    scale = S.max()
    # spectral ringing beyond the support is at the 1e-12 level
    assert np.all(S >= -1e-10 * scale)
    assert np.all(np.diff(S) <= 1e-10 * scale)
    assert np.all(np.diff(S, 2) >= -1e-8 * scale)


def test_interval_entropy_unit_interval_quadrature():
    f = seeded(9)
    direct, _ = quad(lambda x: (1 - x * x) * float(f.derivative_at(x)[0]) ** 2, -1, 1,
                     epsabs=0, epsrel=1e-13, limit=200)
    assert rel(interval_entropy(f), np.pi * direct) < 1e-12


def test_interval_entropy_outside_support_and_domination():
    g = GridSpec(1, 2048, 8.0)
    f = CurrentProfile(bump(g, 2.5, 0.8, c=3.0), g)
    assert abs(interval_entropy(f, (-1, 1))) < 1e-15 * interval_entropy(f, (1, 4))
    with pytest.raises(ValueError):
        interval_entropy(f, (1, -1))
    # the interval weight is at most twice the half-line weight (x - a)
    for seed in range(10):
        f = seeded(seed)
        for a, b in ((-1.0, 1.0), (-2.5, 0.3), (0.0, 4.0)):
            assert interval_entropy(f, (a, b)) <= 2 * halfline_entropy(f, a) * (1 + 1e-12)


def test_interval_versus_halfline_weight():
    """Domination by the half-line holds on the right half of the interval only."""
    g = GridSpec(1, 2048, 8.0)
    right = CurrentProfile(bump(g, 0.5, 0.4, c=3.0), g)
    assert interval_entropy(right, (-1, 1)) <= halfline_entropy(right, -1.0)
    left = CurrentProfile(bump(g, -0.5, 0.4, c=3.0), g)
    assert interval_entropy(left, (-1, 1)) > halfline_entropy(left, -1.0)


def test_modular_pairing_equals_interval_entropy():
    for seed in (10, 11):
        f = seeded(seed)
        assert rel(modular_pairing(f), interval_entropy(f)) < 1e-6


# --- ant formula -------------------------------------------------------------------

def test_ant_constant_right_of_cut():
    g = GridSpec(1, 2048, 8.0)
    f = CurrentProfile(bump(g, -2.0, 1.0, c=3.0), g)
    rep = ant_check(f, 0.0)
    scale = halfline_entropy(f, -4.0)
    assert abs(rep.fd_derivative) < 1e-13 * scale and abs(rep.formula) < 1e-13 * scale
    assert rep.minimizer_energy < 1e-13 * scale


def test_ant_gaussian(gauss):
    rep = ant_check(gauss, 0.0, step=1e-2)
    # pi int_0^inf 4 x^2 e^{-2x^2} dx = pi sqrt(pi / 2) / 2
    assert rel(-rep.formula, np.pi * np.sqrt(np.pi / 2) / 2) < 1e-12
    assert rep.fd_error < 1e-4
    assert abs(rep.minimizer_attains) < 1e-8 * rep.minimizer_energy
    assert rep.competitors_dominate
    assert min(rep.competitor_energies) > rep.minimizer_energy


# --- entropy balance ------------------------------------------------------------------

def test_balance_equal_cuts(gauss):
    assert balance_check(gauss, 0.4, 0.4).residual == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_balance_seeded(seed):
    rep = balance_check(seeded(seed), -0.7, 1.1)
    assert rep.relative <= 1e-8
    assert rep.plancherel_mismatch <= 1e-8


def test_balance_gaussian_closed_forms(gauss):
    rep = balance_check(gauss, 0.0, 1.0)
    expect = {"S_a": gaussian_entropy(0.0, ">"), "S_b": gaussian_entropy(1.0, ">"),
              "Sbar_a": gaussian_entropy(0.0, "<"), "Sbar_b": gaussian_entropy(1.0, "<")}
    assert expect["S_a"] == pytest.approx(np.pi / 2, rel=1e-15)
    for k, v in expect.items():
        assert rel(rep.entropies[k], v) < 1e-10
    # 1/2 int f'^2 = sqrt(pi / 2) / 2
    assert rel(null_energy_real(gauss), np.sqrt(np.pi / 2) / 2) < 1e-12
    assert rel(null_energy_spectral(gauss), null_energy_real(gauss)) < 1e-8
    assert rep.relative <= 1e-8


# --- dilation flow ---------------------------------------------------------------------

def test_dilation_map_fixes_endpoints():
    assert interval_dilation(0.7, [-1.0, 1.0]).tolist() == [-1.0, 1.0]
    assert interval_dilation(0.0, 0.3) == pytest.approx(0.3)
    x = np.linspace(-0.9, 0.9, 7)
    assert np.allclose(interval_dilation(-0.4, interval_dilation(0.4, x)), x)


def test_dilation_flow_invariance():
    g = GridSpec(1, 1024, 4.0)
    f = CurrentProfile(bump(g, 0.1, 0.8, c=2.0), g)
    assert dilation_flow_check(f, 0.0) == 0.0
    for s in (0.5, -1.0, 2.0):
        assert abs(dilation_flow_check(f, s)) <= 1e-4 * interval_entropy(f)
    with pytest.raises(ResampleUnderResolved):
        dilation_flow_check(f, 2.5)


def test_dilation_flow_rejects_rough_profile():
    g = GridSpec(1, 512, 4.0)
    f = CurrentProfile(bump(g, 0.1, 0.8, c=2.0), g)
    with pytest.raises(ResampleUnderResolved):
        dilation_flow_check(f, 0.5)


def test_halfline_scaling_invariance():
    g = GridSpec(1, 2048, 24.0)
    s = 0.7
    f = CurrentProfile.from_function(lambda x: np.exp(-x**2), g)
    fs = CurrentProfile.from_function(lambda x: np.exp(-(np.exp(-s) * x) ** 2), g)
    assert rel(halfline_entropy(fs, 0.0), halfline_entropy(f, 0.0)) < 1e-10
