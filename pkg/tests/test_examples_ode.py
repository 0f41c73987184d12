"""The built-in circle problems: fields, polar relations, diagnostics.

Field values are checked against hand-evaluated formulas; the polar
relations are exact first integrals, so their residual along an accurate
trajectory measures integration + relation bookkeeping together.
"""

import numpy as np
import pytest

from normstab import builtin_problem, fd_jacobian, integrate
from normstab.errors import ConfigError, SingularBand
from normstab.examples_ode import (
    BUILTIN_NAMES,
    lyapunov_check,
    polar_history,
    polar_relation_residual,
)


def test_builtin_names_and_unknown():
    assert BUILTIN_NAMES == ("Ex1", "Ex2m1", "Ex2m2", "Hyperbolic3D")
    with pytest.raises(ConfigError):
        builtin_problem("Ex9")


def test_field_values_hand_computed():
    # Ex1 at (0.3, 0.4): r = 0.5, so F = ((x+y) 0.5, (y-x) 0.5)
    f1 = builtin_problem("Ex1").field.eval(np.array([0.3, 0.4]))
    assert np.allclose(f1, [0.35, 0.05], atol=1e-14)
    # Ex2m1 at (0, 1.5): q = 0.5 -> (-y q, -y q^3) = (-0.75, -0.1875)
    f2 = builtin_problem("Ex2m1").field.eval(np.array([0.0, 1.5]))
    assert np.allclose(f2, [-0.75, -0.1875], atol=1e-14)
    # Ex2m2 at (0, 1.5): q^2 = 0.25 -> (-0.375, -0.1875)
    f3 = builtin_problem("Ex2m2").field.eval(np.array([0.0, 1.5]))
    assert np.allclose(f3, [-0.375, -0.1875], atol=1e-14)
    # 3-d problem at (1, 1, 2): q = sqrt(2) - 1 -> (0, 2q, -2)
    q = np.sqrt(2.0) - 1.0
    f4 = builtin_problem("Hyperbolic3D").field.eval(np.array([1.0, 1.0, 2.0]))
    assert np.allclose(f4, [0.0, 2.0 * q, -2.0], atol=1e-14)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_analytic_jacobians_match_fd(name):
    bp = builtin_problem(name)
    rng = np.random.default_rng(1)
    for _ in range(5):
        u = bp.u_star + 0.3 * rng.normal(size=bp.field.n)
        if np.hypot(u[0], u[1]) < 0.3:
            continue  # polar formulas degenerate at the origin
        err = np.max(np.abs(bp.field.jac(u) - fd_jacobian(bp.field.eval, u)))
        assert err <= 1e-6, (name, u)


def test_chart_consistency():
    bp = builtin_problem("Hyperbolic3D")
    zs = np.linspace(-2.0, 2.0, 11)
    pts = bp.chart.psi_batch(zs)
    for z, p in zip(zs, pts):
        assert np.allclose(bp.chart.point([z]), p, atol=1e-14)
        # d_psi is the exact tangent of the arclength parameterization
        h = 1e-6
        fd = (bp.chart.point([z + h]) - bp.chart.point([z - h])) / (2 * h)
        assert np.max(np.abs(bp.chart.tangent([z])[:, 0] - fd)) <= 1e-9
    assert np.allclose(bp.chart.u_star, [0.0, 1.0, 0.0])


def test_ex1_relation_on_trajectories():
    bp = builtin_problem("Ex1")
    for r0 in (0.5, 1.5, 2.0):
        traj = integrate(bp.field, np.array([0.0, r0]), 12.0, tol=1e-12)
        rep = polar_relation_residual(traj, bp.relation)
        assert rep.residual_max <= 1e-3, r0


@pytest.mark.parametrize("name", ["Ex2m1", "Ex2m2"])
@pytest.mark.parametrize("r0", [0.5, 1.5])
def test_ex2_relations_on_trajectories(name, r0):
    bp = builtin_problem(name)
    traj = integrate(bp.field, np.array([0.0, r0]), 400.0, tol=1e-12)
    rep = polar_relation_residual(traj, bp.relation)
    assert rep.residual_max <= 1e-2


def test_relation_band_guard():
    # starting inside the excluded band |r - 1| < 0.02 leaves no usable samples
    bp = builtin_problem("Ex2m1")
    traj = integrate(bp.field, np.array([0.0, 1.005]), 10.0, tol=1e-10)
    with pytest.raises(SingularBand):
        polar_relation_residual(traj, bp.relation)


def test_lyapunov_decreases():
    bp = builtin_problem("Ex2m1")
    traj = integrate(bp.field, np.array([0.0, 1.5]), 400.0, tol=1e-12)
    rep = lyapunov_check(traj)  # default V = (r - 1)^2
    assert rep.max_increase <= 1e-10
    assert rep.initial == pytest.approx(0.25)
    assert rep.final < 2e-3


def test_spiral_while_converging_m1():
    # the angle keeps winding (theta unbounded) while r creeps to 1
    bp = builtin_problem("Ex2m1")
    traj = integrate(bp.field, np.array([0.0, 1.5]), 3e4, tol=1e-12)
    times = np.concatenate([[0.0], np.geomspace(1e-2, 3e4, 300)])
    _, r, theta = polar_history(traj, times=times)
    assert theta.max() - theta.min() >= 4 * np.pi
    assert abs(r[-1] - 1.0) <= 5e-3
    assert np.all(r > 1.0)


def test_spiral_while_converging_m2():
    # slower winding: at t = 1e13 the orbit has still made several turns
    bp = builtin_problem("Ex2m2")
    traj = integrate(bp.field, np.array([0.0, 1.5]), 1e13, tol=1e-12)
    times = np.concatenate([[0.0], np.geomspace(1e-2, 1e13, 400)])
    _, r, theta = polar_history(traj, times=times)
    assert theta.max() - theta.min() >= 4 * np.pi
    assert abs(r[-1] - 1.0) <= 1e-4


def test_polar_history_matches_trajectory():
    bp = builtin_problem("Ex1")
    traj = integrate(bp.field, np.array([0.0, 1.5]), 8.0, tol=1e-12)
    t, r, theta = polar_history(traj, n_samples=200)
    us = traj.sample(t)
    assert np.max(np.abs(r - np.hypot(us[:, 0], us[:, 1]))) <= 1e-12
    # the reconstruction (r cos theta, r sin theta) returns the samples
    assert np.max(np.abs(us[:, 0] - r * np.cos(theta))) <= 1e-9
    assert np.max(np.abs(us[:, 1] - r * np.sin(theta))) <= 1e-9
