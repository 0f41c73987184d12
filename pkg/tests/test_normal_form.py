"""Linearization, classification, graph map and the reduced coordinates.

The unit-circle problems have closed-form decompositions: at the base point
(0, 1) the deviation of psi(zeta) splits over the known eigenvectors, so the
graph map values can be written down exactly and the numerics checked
against them.
"""

import numpy as np
import pytest

from normstab import (
    DEFAULT_TOL,
    ManifoldChart,
    VectorFieldSpec,
    builtin_problem,
    classify,
    eigen_decompose,
    fd_jacobian,
    from_normal_form,
    linearize,
    normal_form_rhs,
    solve_graph_map,
    spectral_projections,
    tangent_kernel_check,
    to_normal_form,
)
from normstab.errors import OutOfChart
from normstab.normal_form import semisimple_zero

A0_EXPECTED = {
    "Ex1": np.array([[0.0, 1.0], [0.0, 1.0]]),
    "Ex2m1": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "Ex2m2": np.zeros((2, 2)),
    "Hyperbolic3D": np.array([[0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]),
}

SEMISIMPLE_EXPECTED = {"Ex1": True, "Ex2m1": False, "Ex2m2": True}


@pytest.mark.parametrize("name", list(A0_EXPECTED))
def test_linearize_frozen_matrices(name):
    bp = builtin_problem(name)
    a0 = linearize(bp.field, bp.u_star)
    assert np.max(np.abs(a0 - A0_EXPECTED[name])) <= 1e-10
    # analytic jacobian against the finite-difference route
    fd = fd_jacobian(bp.field.eval, bp.u_star + 0.01)
    assert np.max(np.abs(fd - bp.field.jac(bp.u_star + 0.01))) <= 1e-6


@pytest.mark.parametrize("name", list(SEMISIMPLE_EXPECTED))
def test_semisimple_flags(name):
    a0 = linearize(builtin_problem(name).field, builtin_problem(name).u_star)
    assert semisimple_zero(a0).semisimple is SEMISIMPLE_EXPECTED[name]


def test_classify_verdicts():
    expected = {
        "Ex1": ("NormallyStable", []),
        "Ex2m1": ("Inconclusive", ["(iii)"]),
        "Ex2m2": ("Inconclusive", ["(ii)"]),
        "Hyperbolic3D": ("NormallyHyperbolic", []),
    }
    for name, (verdict, failed) in expected.items():
        bp = builtin_problem(name)
        cl = classify(bp.field, bp.chart)
        assert cl.verdict == verdict, name
        assert cl.failed == failed, name
    assert classify(
        builtin_problem("Hyperbolic3D").field, builtin_problem("Hyperbolic3D").chart
    ).dims == (1, 1, 1)


def test_classification_report_contents():
    bp = builtin_problem("Ex1")
    cl = classify(bp.field, bp.chart)
    assert cl.dims == (1, 1, 0)
    assert cl.is_conclusive
    assert np.allclose(cl.u_star, [0.0, 1.0])
    assert cl.kernel.kernel_dim == 1
    assert cl.tangent.equal
    assert cl.diagnostics["chart_residual"] <= DEFAULT_TOL.eps_eq * 10


def test_off_manifold_chart_fails_condition_i():
    bp = builtin_problem("Ex1")
    shifted = ManifoldChart(
        m=1,
        psi=lambda z: bp.chart.point(z) + np.array([0.0, 0.05]),
        chart_radius=bp.chart.chart_radius,
        d_psi=bp.chart.d_psi,
    )
    cl = classify(bp.field, shifted)
    assert cl.verdict == "Inconclusive"
    assert "(i)" in cl.failed


def test_tangent_kernel_check_cases():
    bp = builtin_problem("Ex1")
    ker = semisimple_zero(linearize(bp.field, bp.u_star)).basis
    rep = tangent_kernel_check(bp.chart, ker)
    assert rep.contained and rep.equal
    assert rep.tangent_dim == rep.kernel_dim == 1
    assert np.max(rep.angles) <= 1e-8

    # Ex2m2 kernel is all of R^2; the 1-d tangent sits inside it strictly
    bp2 = builtin_problem("Ex2m2")
    ker2 = semisimple_zero(linearize(bp2.field, bp2.u_star)).basis
    rep2 = tangent_kernel_check(bp2.chart, ker2)
    assert rep2.contained and not rep2.equal
    assert (rep2.tangent_dim, rep2.kernel_dim) == (1, 2)


def test_isolated_equilibrium_chart():
    fs = VectorFieldSpec(n=2, f=lambda u: -u, jacobian=lambda u: -np.eye(2))
    chart = ManifoldChart(m=0, psi=lambda z: np.zeros(2), chart_radius=1.0)
    cl = classify(fs, chart)
    assert cl.verdict == "NormallyStable"
    assert cl.dims == (0, 2, 0)


def test_fd_jacobian_accuracy():
    def f(u):
        x, y = u
        return np.array([x**3 - 2 * x * y, y**2 + x])

    def jac(u):
        x, y = u
        return np.array([[3 * x**2 - 2 * y, -2 * x], [1.0, 2 * y]])

    u = np.array([0.7, -0.4])
    assert np.max(np.abs(fd_jacobian(f, u) - jac(u))) <= 1e-7


def _ex1_pieces():
    bp = builtin_problem("Ex1")
    a0 = linearize(bp.field, bp.u_star)
    split = spectral_projections(a0, eigen_decompose(a0))
    gm = solve_graph_map(bp.field, bp.u_star, split)
    return bp, split, gm


def test_graph_map_circle_closed_form():
    # deviation of the circle point: (sin z, cos z - 1) = a (1,0) + b (1,1)
    # with b = cos z - 1, so phi(P_c v) must equal b (1,1)
    bp, split, gm = _ex1_pieces()
    assert gm.rho0 == pytest.approx(0.25)
    assert gm.sup_phi_prime <= 1.0
    for z in np.linspace(-0.2, 0.2, 9):
        v = bp.chart.point([z]) - bp.u_star
        expected = (np.cos(z) - 1.0) * np.array([1.0, 1.0])
        got = gm.phi(split.p_c @ v)
        assert np.max(np.abs(got - expected)) <= 1e-9, z


def test_graph_map_hyperbolic_closed_form():
    # deviation (sin z, cos z - 1, 0) = a (1,0,0) + b (1,-1,0) with
    # b = 1 - cos z; the transverse value is purely in the unstable direction
    bp = builtin_problem("Hyperbolic3D")
    a0 = linearize(bp.field, bp.u_star)
    split = spectral_projections(a0, eigen_decompose(a0))
    gm = solve_graph_map(bp.field, bp.u_star, split)
    for z in np.linspace(-0.2, 0.2, 9):
        v = bp.chart.point([z]) - bp.u_star
        expected = (1.0 - np.cos(z)) * np.array([1.0, -1.0, 0.0])
        x = split.p_c @ v
        assert np.max(np.abs(gm.phi(x) - expected)) <= 1e-9, z
        assert np.linalg.norm(gm.phi_s(x)) <= 1e-9


def test_graph_map_out_of_chart():
    _, split, gm = _ex1_pieces()
    with pytest.raises(OutOfChart):
        gm.phi(0.3 * split.v_c[:, 0])
    with pytest.raises(OutOfChart):
        to_normal_form(np.array([0.4, 0.0]), split, gm)


def test_normal_form_roundtrip_and_rhs():
    bp, split, gm = _ex1_pieces()
    rng = np.random.default_rng(8)
    for _ in range(10):
        v = 0.1 * rng.normal(size=2)
        x, y = to_normal_form(v, split, gm)
        assert np.max(np.abs(from_normal_form(x, y, split, gm) - v)) <= 1e-10
        # y = 0 is invariant: both reduced fields vanish there
        t_val, r_val = normal_form_rhs(x, np.zeros(2), split, gm)
        assert np.linalg.norm(t_val) <= 1e-12
        assert np.linalg.norm(r_val) <= 1e-12


def test_normal_form_three_blocks():
    bp = builtin_problem("Hyperbolic3D")
    a0 = linearize(bp.field, bp.u_star)
    split = spectral_projections(a0, eigen_decompose(a0))
    gm = solve_graph_map(bp.field, bp.u_star, split)
    v = np.array([0.05, -0.02, 0.04])
    x, y, z = to_normal_form(v, split, gm)
    assert np.max(np.abs(split.p_c @ x - x)) <= 1e-12
    assert np.max(np.abs(split.p_s @ y - y)) <= 1e-12
    assert np.max(np.abs(split.p_u @ z - z)) <= 1e-12
    assert np.max(np.abs(from_normal_form(x, y, split, gm, z=z) - v)) <= 1e-10
    t_val, r_s, r_u = normal_form_rhs(x, y, split, gm, z=z)
    for part in (t_val, r_s, r_u):
        assert np.all(np.isfinite(part))


def test_trivial_graph_map_when_all_center():
    # A0 = 0: the center subspace is everything, nothing transverse remains
    bp = builtin_problem("Ex2m2")
    a0 = linearize(bp.field, bp.u_star)
    split = spectral_projections(a0, eigen_decompose(a0))
    assert split.dims == (2, 0, 0)
    gm = solve_graph_map(bp.field, bp.u_star, split)
    assert gm.rho0 == pytest.approx(0.5)
    assert np.allclose(gm.phi(np.array([0.1, 0.2])), np.zeros(2), atol=1e-12)
