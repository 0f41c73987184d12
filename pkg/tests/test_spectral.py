"""Eigenvalue grouping, spectral projections, semisimplicity of 0.

Expected eigenvalues come from an independent route: characteristic
polynomial coefficients via the Faddeev-LeVerrier recursion in extended
precision, rooted with mpmath.  Projections are checked against matrices
whose invariant subspaces are known from their construction.
"""

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normstab import (
    DEFAULT_TOL,
    Tolerances,
    eigen_decompose,
    semisimple_zero,
    spectral_projections,
)
from normstab.errors import IllConditioned


def charpoly_roots(a: np.ndarray) -> np.ndarray:
    """Roots of det(zI - A) via Faddeev-LeVerrier + mpmath polyroots."""
    n = a.shape[0]
    am = mp.matrix(a.tolist())
    m = mp.eye(n)
    coeffs = [mp.mpf(1)]
    for k in range(1, n + 1):
        prod = am * m
        c = -mp.fsum(prod[i, i] for i in range(n)) / k
        coeffs.append(c)
        m = prod + c * mp.eye(n)
    with mp.workdps(60):
        roots = mp.polyroots(coeffs, maxsteps=200, extraprec=120)
    return np.array([complex(r) for r in roots])


def _sorted(vals):
    vals = np.asarray(vals, dtype=complex)
    return vals[np.lexsort((vals.imag, vals.real))]


@pytest.mark.parametrize(
    "a",
    [
        np.array([[0.0, 1.0], [0.0, 1.0]]),
        np.diag([0.0, 2.0, -3.0]),
        np.array([[0.0, -1.0], [1.0, 0.0]]),
        np.random.default_rng(11).normal(size=(5, 5)),
        (lambda b: b + b.T)(np.random.default_rng(5).normal(size=(6, 6))),
    ],
    ids=["jordanish-2x2", "diag", "rotation", "random-5x5", "symmetric-6x6"],
)
def test_eigenvalues_match_charpoly_roots(a):
    expected = _sorted(charpoly_roots(a))
    got = _sorted(eigen_decompose(a).eigenvalues)
    scale = max(1.0, np.max(np.abs(expected)))
    assert np.max(np.abs(got - expected)) <= 1e-8 * scale


def test_grouping_diag():
    rep = eigen_decompose(np.diag([0.0, 2.0, -3.0]))
    assert rep.dims == (1, 1, 1)
    assert rep.is_conclusive
    assert len(rep.center) == 1
    assert abs(rep.eigenvalues[rep.center[0]]) <= 1e-12
    assert rep.eigenvalues[rep.stable[0]].real == pytest.approx(2.0)
    assert rep.eigenvalues[rep.unstable[0]].real == pytest.approx(-3.0)
    assert rep.gap_margin > 0


def test_grouping_thresholds():
    # below tol_zero counts as center, between tol_zero and gap is neither
    assert eigen_decompose(np.diag([1e-12, 1.0])).dims == (1, 1, 0)
    rep = eigen_decompose(np.diag([1e-7, 1.0]))
    assert not rep.is_conclusive
    assert len(rep.inconclusive) == 1
    # decaying side needs Re >= gap only
    assert eigen_decompose(np.diag([1e-5, 1.0])).dims == (0, 2, 0)


def test_rotation_block_is_inconclusive():
    # eigenvalues +-i: zero real part but modulus 1, so no group accepts them
    a = np.array([[0.0, -1.0], [1.0, 0.0]])
    rep = eigen_decompose(a)
    assert not rep.is_conclusive
    assert rep.dims == (0, 0, 0)
    with pytest.raises(IllConditioned):
        spectral_projections(a, rep)


def test_projections_diag_exact():
    split = spectral_projections(np.diag([0.0, 2.0, -3.0]))
    assert np.allclose(split.p_c, np.diag([1.0, 0.0, 0.0]), atol=1e-12)
    assert np.allclose(split.p_s, np.diag([0.0, 1.0, 0.0]), atol=1e-12)
    assert np.allclose(split.p_u, np.diag([0.0, 0.0, 1.0]), atol=1e-12)


def test_projections_frozen_2x2():
    # A = [[0,1],[0,1]]: eigenvectors (1,0) for 0 and (1,1) for 1.  Writing
    # I = P_c + P_s in that basis gives P_c = [[1,-1],[0,0]], P_s = [[0,1],[0,1]].
    a = np.array([[0.0, 1.0], [0.0, 1.0]])
    split = spectral_projections(a)
    assert np.allclose(split.p_c, [[1.0, -1.0], [0.0, 0.0]], atol=1e-10)
    assert np.allclose(split.p_s, [[0.0, 1.0], [0.0, 1.0]], atol=1e-10)
    assert split.p_u.shape == (2, 2) and np.allclose(split.p_u, 0.0)


def test_projection_properties_similarity():
    # orthogonal conjugation of blockdiag(0_2, J_2(2), -3): the invariant
    # subspace dimensions (2, 2, 1) are known by construction
    blocks = np.zeros((5, 5))
    blocks[2, 2] = blocks[3, 3] = 2.0
    blocks[2, 3] = 1.0
    blocks[4, 4] = -3.0
    q, _ = np.linalg.qr(np.random.default_rng(3).normal(size=(5, 5)))
    a = q @ blocks @ q.T
    split = spectral_projections(a)
    assert split.dims == (2, 2, 1)
    eye = np.eye(5)
    for p in (split.p_c, split.p_s, split.p_u):
        assert np.linalg.norm(p @ p - p) <= 1e-8
        assert np.linalg.norm(a @ p - p @ a) <= 1e-8
    assert np.linalg.norm(split.p_c + split.p_s + split.p_u - eye) <= 1e-8
    assert np.linalg.norm(split.p_c @ split.p_s) <= 1e-8
    # restrictions carry the right spectra
    assert np.allclose(_sorted(np.linalg.eigvals(split.a_s)), [2.0, 2.0], atol=1e-6)
    assert np.allclose(np.linalg.eigvals(split.a_u), [-3.0], atol=1e-8)
    assert np.max(np.abs(np.linalg.eigvals(split.a_c))) <= 1e-8


def test_semisimple_frozen_cases():
    rep = semisimple_zero(np.array([[0.0, 1.0], [0.0, 1.0]]))
    assert (rep.kernel_dim, rep.semisimple) == (1, True)
    rep = semisimple_zero(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert (rep.kernel_dim, rep.semisimple) == (1, False)
    assert rep.nullity_sq == 2
    rep = semisimple_zero(np.zeros((2, 2)))
    assert (rep.kernel_dim, rep.semisimple) == (2, True)
    rep = semisimple_zero(np.eye(3))
    assert (rep.kernel_dim, rep.semisimple) == (0, True)


def test_kernel_basis_property():
    a = np.array([[0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    rep = semisimple_zero(a)
    assert rep.kernel_dim == 1
    assert np.allclose(rep.basis.T @ rep.basis, np.eye(rep.kernel_dim), atol=1e-12)
    assert np.linalg.norm(a @ rep.basis) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(
    zero_blocks=st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=3),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_semisimple_detects_constructed_jordan_structure(zero_blocks, seed):
    # build J with prescribed nilpotent blocks for eigenvalue 0 plus a
    # nonzero tail, conjugate by a random orthogonal matrix; the truth is
    # known from the construction: kernel dim = #blocks, semisimple iff
    # every block is trivial
    k = sum(zero_blocks)
    n = k + 2
    j = np.zeros((n, n))
    pos = 0
    for b in zero_blocks:
        for i in range(b - 1):
            j[pos + i, pos + i + 1] = 1.0
        pos += b
    j[k, k] = 2.0
    j[k + 1, k + 1] = -1.5
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(n, n)))
    rep = semisimple_zero(q @ j @ q.T)
    assert rep.kernel_dim == len(zero_blocks)
    assert rep.semisimple == all(b == 1 for b in zero_blocks)


def test_tolerances_replace_and_validation():
    tol = DEFAULT_TOL.replace(gap=1e-4)
    assert tol.gap == 1e-4 and tol.tol_zero == DEFAULT_TOL.tol_zero
    from normstab.errors import ConfigError

    with pytest.raises(ConfigError):
        DEFAULT_TOL.replace(no_such_field=1.0)
    with pytest.raises(ConfigError):
        DEFAULT_TOL.replace(gap=-1.0)
    assert isinstance(Tolerances().as_dict(), dict)
