"""Traveling wave: speed, energy balance, spectrum, perturbation decay.

Identity flux has a closed form: w(s) = (1 + exp(-s/sqrt(2)))^(-1) at speed
V = (1 - 2a)/sqrt(2).  The first test verifies that algebra symbolically
(analytic derivatives substituted into the profile equation), which makes
the closed form a legitimate reference for everything downstream.

The finite-difference stencil is validated separately against the exact
eigenvalues of the constant-coefficient tridiagonal Toeplitz matrix.
"""

from types import SimpleNamespace

import numpy as np
import pytest

from normstab import find_speed, saddle_rates, wave_problem
from normstab.errors import BracketInvalid, ConfigError, TailsTooFat
from normstab.wave import (
    _discretize,
    _symmetrize_bands,
    discretize_linearization,
    energy_residual,
    phase_field,
    shoot,
    simulate_perturbation,
    wave_spectrum,
)


def closed_form_w(s):
    return 1.0 / (1.0 + np.exp(-s / np.sqrt(2.0)))


def closed_form_speed(a):
    return (1.0 - 2.0 * a) / np.sqrt(2.0)


@pytest.mark.parametrize("a", [0.1, 0.25, 0.4])
def test_closed_form_satisfies_profile_equation(a):
    # oracle gate: with w' = w(1-w)/sqrt(2) and w'' = (1-2w) w'/sqrt(2),
    # the residual of w'' - V w' + w(1-w)(w-a) collapses algebraically to 0;
    # evaluate it with the analytic derivatives (no numerics of the package)
    wp = wave_problem(a)
    v = closed_form_speed(a)
    s = np.linspace(-25.0, 25.0, 2001)
    w = closed_form_w(s)
    w1 = w * (1.0 - w) / np.sqrt(2.0)
    w2 = (1.0 - 2.0 * w) * w1 / np.sqrt(2.0)
    resid = w2 - v * w1 + wp.f(w)
    assert np.max(np.abs(resid)) <= 1e-15


@pytest.mark.parametrize("a", [0.1, 0.25, 0.4])
def test_find_speed_matches_closed_form(a):
    wp = wave_problem(a)
    v_star, profile = find_speed(wp)
    assert abs(v_star - closed_form_speed(a)) <= 1e-6
    s = np.linspace(-10.0, 10.0, 401)
    assert np.max(np.abs(profile.w(s) - closed_form_w(s))) <= 1e-8
    # w' must match the closed-form kinematics too
    assert np.max(np.abs(profile.z(s) - closed_form_w(s) * (1 - closed_form_w(s)) / np.sqrt(2))) <= 1e-8
    # farther out the connect-ball miss at the shooting endpoint leaks back
    # as a growing mode, so only a looser bound is honest
    s = np.linspace(-15.0, 15.0, 401)
    assert np.max(np.abs(profile.w(s) - closed_form_w(s))) <= 1e-6
    assert np.max(np.abs(profile.z(s) - closed_form_w(s) * (1 - closed_form_w(s)) / np.sqrt(2))) <= 1e-6


def test_profile_normalization_and_rates(identity_wave):
    wp, v_star, profile = identity_wave
    assert profile.w(0.0) == pytest.approx(0.5, abs=1e-9)
    lam_l, lam_r = saddle_rates(wp, v_star)
    assert lam_l == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-6)
    assert lam_r == pytest.approx(-1.0 / np.sqrt(2.0), abs=1e-6)
    assert profile.lam_left == pytest.approx(lam_l)
    assert profile.lam_right == pytest.approx(lam_r)
    # monotone front between the two rest states
    s = np.linspace(-30.0, 30.0, 601)
    w = profile.w(s)
    assert np.all(np.diff(w) > 0)
    assert w[0] < 1e-8 and 1 - w[-1] < 1e-8


def test_shoot_outcomes(identity_wave):
    wp, v_star, _ = identity_wave
    assert shoot(wp, 0.1).outcome == "FellBack"
    assert shoot(wp, 0.9).outcome == "Overshot"
    near = shoot(wp, v_star)
    assert near.outcome in ("Connected", "FellBack", "Overshot")
    assert near.s_end > 0


def test_phase_field_consistent_with_shoot(identity_wave):
    wp, v_star, _ = identity_wave
    fs = phase_field(wp, v_star)
    u = np.array([0.3, 0.1])
    expected = np.array([0.1, v_star * 0.1 - wp.f(0.3)])
    assert np.allclose(fs.eval(u), expected, atol=1e-14)


def test_energy_identity_along_connecting_path(identity_wave):
    wp, v_star, _ = identity_wave
    sr = shoot(wp, v_star)
    rep = energy_residual(sr, wp)
    assert rep.residual_max <= 1e-8
    # total gain of G + F across the heteroclinic equals F(1) = (1-2a)/12
    assert rep.total_increase == pytest.approx((1 - 2 * wp.a) / 12.0, abs=1e-6)
    assert rep.work_integral == pytest.approx(rep.total_increase, abs=1e-6)


def test_energy_conserved_at_zero_speed(identity_wave):
    wp, _, _ = identity_wave
    sr = shoot(wp, 0.0)
    assert sr.outcome == "FellBack"
    rep = energy_residual(sr, wp)
    assert rep.work_integral == 0.0
    assert rep.residual_max <= 1e-8  # G + F exactly conserved when V = 0


def test_kinetic_antiderivative_routes_agree():
    # the tanh flux ships an exact antiderivative; a problem built without
    # one falls back to quadrature, and both must agree
    wp_exact = wave_problem(0.25, sigma_kind="tanh", c=0.3)
    wp_quad = type(wp_exact)(
        a=0.25, sigma=wp_exact.sigma, sigma_prime=wp_exact.sigma_prime
    )
    for z in (-1.5, -0.2, 0.4, 2.0):
        assert wp_quad.g_kinetic(z) == pytest.approx(
            float(wp_exact.g_kinetic(z)), abs=1e-10
        )


def test_wave_problem_validation():
    with pytest.raises(ConfigError):
        wave_problem(0.7)
    with pytest.raises(ConfigError):
        wave_problem(0.0)
    with pytest.raises(ConfigError):
        wave_problem(0.25, sigma_kind="linear", c=-1.0)
    with pytest.raises(ConfigError):
        wave_problem(0.25, sigma_kind="nope")


def test_bracket_must_straddle(identity_wave):
    wp, _, _ = identity_wave
    with pytest.raises(BracketInvalid):
        find_speed(wp, bracket=(1.0, 2.0))  # lower end already overshoots


def _const_profile(w0):
    # duck-typed stand-in: flat profile, zero slope, zero speed
    return SimpleNamespace(
        w=lambda s: np.full_like(np.asarray(s, dtype=float), w0),
        z=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        v_speed=0.0,
    )


def test_stencil_constant_coefficient_eigenvalues():
    # sigma = id, V = 0, frozen w = 0: the matrix is the Dirichlet Laplacian
    # plus a I, whose eigenvalues are (2/h^2)(1 - cos(k pi/(N+1))) + a exactly
    wp = wave_problem(0.25)
    half, n = 10.0, 40
    disc = _discretize(_const_profile(0.0), wp, half, n)
    h = 2.0 * half / (n + 1)
    assert disc.h == pytest.approx(h)
    k = np.arange(1, n + 1)
    expected = np.sort(2.0 / h**2 * (1.0 - np.cos(k * np.pi / (n + 1))) + wp.a)
    got = np.sort(np.linalg.eigvalsh(disc.matrix()))
    assert np.max(np.abs(got - expected)) <= 1e-10 * np.max(np.abs(expected))


def test_stencil_advective_toeplitz_eigenvalues():
    # with constant advection V the matrix is Toeplitz tridiagonal:
    # lambda_k = d + 2 sqrt(sub * sup) cos(k pi/(N+1)) as long as sub*sup > 0
    wp = wave_problem(0.25)
    half, n, v = 10.0, 40, 0.3
    prof = _const_profile(0.0)
    prof.v_speed = v
    disc = _discretize(prof, wp, half, n)
    h = disc.h
    sub, sup = -1.0 / h**2 - v / (2 * h), -1.0 / h**2 + v / (2 * h)
    assert np.allclose(disc.sub, sub) and np.allclose(disc.sup, sup)
    k = np.arange(1, n + 1)
    expected = np.sort(disc.diag[0] + 2.0 * np.sqrt(sub * sup) * np.cos(k * np.pi / (n + 1)))
    got = np.sort(np.linalg.eigvals(disc.matrix()).real)
    assert np.max(np.abs(got - expected)) <= 1e-8


def test_symmetrize_bands_is_a_similarity():
    rng = np.random.default_rng(2)
    n = 50
    diag = rng.uniform(1.0, 2.0, n)
    sub = -rng.uniform(0.5, 1.5, n - 1)
    sup = -rng.uniform(0.5, 1.5, n - 1)
    out = _symmetrize_bands(sub, diag, sup)
    assert out is not None
    off, log_d = out
    sym = np.diag(diag) + np.diag(off, -1) + np.diag(off, 1)
    lam_sym = np.sort(np.linalg.eigvalsh(sym))
    orig = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
    lam_orig = np.sort(np.linalg.eigvals(orig).real)
    assert np.max(np.abs(lam_sym - lam_orig)) <= 1e-9
    # eigenvector transport: if S y = lambda y then A (d y) = lambda (d y)
    w, vecs = np.linalg.eigh(sym)
    d = np.exp(log_d)
    y = d * vecs[:, 0]
    assert np.linalg.norm(orig @ y - w[0] * y) <= 1e-9 * np.linalg.norm(y)
    # sign-indefinite products admit no symmetrization
    assert _symmetrize_bands(-sub, diag, sup) is None


def test_wave_spectrum_tridiagonal_vs_dense(identity_wave):
    wp, _, profile = identity_wave
    rep = wave_spectrum(profile, wp, 30.0, 600)
    assert rep.route == "tridiagonal"
    dense = np.sort(np.linalg.eigvals(
        discretize_linearization(profile, wp, 30.0, 600)).real)
    assert np.max(np.abs(np.sort(rep.eigenvalues.real)[:20] - dense[:20])) <= 1e-6
    assert rep.zero_mode_gap <= 1e-3
    assert rep.zero_mode_correlation >= 0.999
    assert rep.stable_margin > 0
    assert rep.bound_violations == []


def test_wave_spectrum_dense_fallback(identity_wave):
    # a grid so coarse that sub*sup changes sign forces the dense route
    wp, _, profile = identity_wave
    rep = wave_spectrum(profile, wp, 30.0, 9)
    assert rep.route == "dense"
    assert len(rep.eigenvalues) == 9


def test_tails_gate(identity_wave):
    wp, _, profile = identity_wave
    with pytest.raises(TailsTooFat):
        profile.check_tails(5.0)
    with pytest.raises(TailsTooFat):
        discretize_linearization(profile, wp, 5.0, 50)
    vals = profile.check_tails(30.0)
    assert max(vals.values()) <= 1e-8


def test_pure_translate_initial_condition(identity_wave):
    # v0 = w(s + alpha) - w(s) is (discretely) a steady state: the tracker
    # must identify alpha immediately and the residual stays at the
    # discretization floor
    wp, _, profile = identity_wave
    alpha = 0.1
    sim = simulate_perturbation(
        profile, wp, 30.0, 500,
        v0=lambda s: profile.w(s + alpha) - profile.w(s),
        t_max=6.0, n_save=61,
    )
    assert abs(sim.alpha[0] - alpha) <= 5e-3
    assert abs(sim.alpha[-1] - alpha) <= 5e-3
    assert np.max(sim.resid_l2) <= 1e-3
    assert sim.final_resid_l2 <= 1e-3


def test_gaussian_perturbation_decays(identity_wave):
    wp, _, profile = identity_wave
    sim = simulate_perturbation(profile, wp, 30.0, 500, v0=0.01,
                                t_max=12.0, n_save=121)
    assert sim.final_resid_l2 <= 0.2 * np.max(sim.resid_l2)
    assert sim.rate > 0.05
    assert sim.fit_r2 >= 0.9
    assert np.all(np.isfinite(sim.alpha))
