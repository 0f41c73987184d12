"""Dense spectral analysis of real square operators.

Three operations:

* :func:`eigen_decompose` - eigenvalues grouped as center / stable / unstable
  under the sign convention of the evolution ``v' + A v = G(v)``: the
  semigroup is ``exp(-At)``, so eigenvalues with positive real part are the
  decaying ("stable") part and negative real part is unstable.
* :func:`spectral_projections` - the spectral projections belonging to the
  three groups, built from ordered real Schur forms and a Sylvester solve
  (invariant-subspace sorting; no contour integration).
* :func:`semisimple_zero` - numerical kernel dimension and semisimplicity of
  the zero eigenvalue via rank-revealing SVD of ``A`` and ``A @ A``.

An eigenvalue counts as zero iff ``|lambda| <= tol_zero``; stable/unstable
membership needs ``|Re lambda| >= gap``.  Anything in between is flagged
inconclusive rather than silently assigned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import IllConditioned, NonConvergence
from .tolerances import Tolerances, DEFAULT_TOL

__all__ = [
    "SpectrumReport",
    "SpectralSplit",
    "KernelReport",
    "check_square",
    "eigen_decompose",
    "spectral_projections",
    "semisimple_zero",
]


def check_square(a) -> np.ndarray:
    """Validate and return a dense real square matrix as float64 ndarray."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


@dataclass
class SpectrumReport:
    """Eigenvalues of a real matrix with their group assignment.

    ``eigenvalues`` has length n; repeated entries encode algebraic
    multiplicity.  The index arrays partition ``range(n)`` into the center
    group (|lambda| <= tol_zero), stable group (Re >= gap), unstable group
    (Re <= -gap) and the inconclusive rest.
    """

    eigenvalues: np.ndarray
    center: np.ndarray
    stable: np.ndarray
    unstable: np.ndarray
    inconclusive: np.ndarray
    tol: Tolerances = field(default_factory=Tolerances, repr=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.center), len(self.stable), len(self.unstable)

    @property
    def is_conclusive(self) -> bool:
        return self.inconclusive.size == 0

    @property
    def gap_margin(self) -> float:
        """Smallest |Re lambda| over the non-center eigenvalues (inf if none)."""
        idx = np.concatenate([self.stable, self.unstable, self.inconclusive])
        if idx.size == 0:
            return np.inf
        return float(np.min(np.abs(self.eigenvalues[idx].real)))

    def group_values(self, name: str) -> np.ndarray:
        return self.eigenvalues[getattr(self, name)]


@dataclass
class SpectralSplit:
    """Spectral projections and restrictions for the center/stable/unstable split.

    ``p_*`` are n-by-n (oblique) spectral projections, ``v_*`` orthonormal
    bases of the corresponding invariant subspaces (n-by-m_*), and ``a_*``
    the restriction of A to each subspace expressed on those bases.
    """

    p_c: np.ndarray
    p_s: np.ndarray
    p_u: np.ndarray
    v_c: np.ndarray
    v_s: np.ndarray
    v_u: np.ndarray
    a_c: np.ndarray
    a_s: np.ndarray
    a_u: np.ndarray
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.v_c.shape[1], self.v_s.shape[1], self.v_u.shape[1]

    @property
    def n(self) -> int:
        return self.p_c.shape[0]

    def projector(self, name: str) -> np.ndarray:
        return {"center": self.p_c, "stable": self.p_s, "unstable": self.p_u}[name]


@dataclass
class KernelReport:
    kernel_dim: int
    semisimple: bool
    basis: np.ndarray          # (n, kernel_dim), orthonormal
    margin: float              # smallest retained sigma / sigma_max
    nullity_sq: int            # numerical nullity of A @ A


def eigen_decompose(a, tol: Tolerances = DEFAULT_TOL) -> SpectrumReport:
    """Eigenvalues of a real square matrix, grouped by the center/gap rule.

    Raises NonConvergence if the underlying QR iteration fails.  The output
    order is deterministic: sorted by (Re, Im).
    """
    a = check_square(a)
    n = a.shape[0]
    if n == 0:
        empty = np.array([], dtype=int)
        return SpectrumReport(np.array([], dtype=complex), empty, empty, empty, empty, tol)
    try:
        lam = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare LAPACK failure
        raise NonConvergence(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]

    is_center = np.abs(lam) <= tol.tol_zero
    is_stable = ~is_center & (lam.real >= tol.gap)
    is_unstable = ~is_center & (lam.real <= -tol.gap)
    leftover = ~(is_center | is_stable | is_unstable)
    idx = np.arange(n)
    return SpectrumReport(
        eigenvalues=lam,
        center=idx[is_center],
        stable=idx[is_stable],
        unstable=idx[is_unstable],
        inconclusive=idx[leftover],
        tol=tol,
    )


def _selector(name: str, tol: Tolerances):
    """Predicate f(re, im) matching the grouping rule, for Schur sorting."""
    if name == "center":
        return lambda re, im: np.hypot(re, im) <= tol.tol_zero
    if name == "stable":
        return lambda re, im: (re >= tol.gap) & ~(np.hypot(re, im) <= tol.tol_zero)
    if name == "unstable":
        return lambda re, im: (re <= -tol.gap) & ~(np.hypot(re, im) <= tol.tol_zero)
    raise ValueError(name)


def _group_projector(a: np.ndarray, name: str, m: int, tol: Tolerances):
    """Spectral projector and orthonormal invariant-subspace basis for a group.

    Sorts the group's eigenvalues to the leading Schur block, decouples the
    two blocks with a Sylvester solve and conjugates the block projector back.
    """
    n = a.shape[0]
    if m == 0:
        return np.zeros((n, n)), np.zeros((n, 0))
    if m == n:
        return np.eye(n), np.eye(n)
    try:
        t, q, sdim = sla.schur(a, output="real", sort=_selector(name, tol))
    except sla.LinAlgError as exc:  # pragma: no cover
        raise NonConvergence(f"Schur decomposition failed: {exc}") from exc
    if sdim != m:
        raise IllConditioned(
            f"Schur sort selected {sdim} eigenvalues for group {name!r}, expected {m}; "
            "the grouping is not numerically stable at these tolerances"
        )
    t11 = t[:m, :m]
    t12 = t[:m, m:]
    t22 = t[m:, m:]
    try:
        # decoupling similarity: T11 Y - Y T22 = -T12
        y = sla.solve_sylvester(t11, -t22, -t12)
    except (sla.LinAlgError, ValueError) as exc:
        raise IllConditioned(f"group {name!r} could not be decoupled: {exc}") from exc
    p_t = np.zeros((n, n))
    p_t[:m, :m] = np.eye(m)
    p_t[:m, m:] = -y
    p = q @ p_t @ q.T
    return p, q[:, :m]


def spectral_projections(a, report: SpectrumReport | None = None,
                         tol: Tolerances | None = None) -> SpectralSplit:
    """Spectral projections P_c, P_s, P_u and restrictions of A.

    The three projectors are built independently from ordered real Schur
    forms and then cross-checked: idempotence, pairwise annihilation,
    partition of identity and commutation with A, all within eps_proj
    relative to ||A||.  Violations raise IllConditioned rather than
    returning silently degraded output.
    """
    a = check_square(a)
    if report is None:
        report = eigen_decompose(a, tol or DEFAULT_TOL)
    tol = tol or report.tol
    if not report.is_conclusive:
        raise IllConditioned(
            "spectrum has eigenvalues on the punctured imaginary strip; "
            "no clean center/stable/unstable split exists at these tolerances"
        )
    m_c, m_s, m_u = report.dims

    p_c, v_c = _group_projector(a, "center", m_c, tol)
    p_s, v_s = _group_projector(a, "stable", m_s, tol)
    p_u, v_u = _group_projector(a, "unstable", m_u, tol)

    scale = max(1.0, sla.norm(a, 2)) if a.size else 1.0
    n = a.shape[0]
    checks = {
        "idempotence": max(
            sla.norm(p @ p - p, 2) for p in (p_c, p_s, p_u)
        ) if n else 0.0,
        "partition": sla.norm(p_c + p_s + p_u - np.eye(n), 2) if n else 0.0,
        "annihilation": max(
            sla.norm(p1 @ p2, 2)
            for i, p1 in enumerate((p_c, p_s, p_u))
            for j, p2 in enumerate((p_c, p_s, p_u))
            if i != j
        ) if n else 0.0,
        "commutation": max(
            sla.norm(a @ p - p @ a, 2) / scale for p in (p_c, p_s, p_u)
        ) if n else 0.0,
    }
    worst = max(checks.values()) if checks else 0.0
    if worst > tol.eps_proj:
        raise IllConditioned(
            f"projector diagnostics exceed eps_proj={tol.eps_proj:g}: {checks}"
        )

    split = SpectralSplit(
        p_c=p_c, p_s=p_s, p_u=p_u,
        v_c=v_c, v_s=v_s, v_u=v_u,
        a_c=v_c.T @ a @ v_c, a_s=v_s.T @ a @ v_s, a_u=v_u.T @ a @ v_u,
        diagnostics={"checks": checks, "dims": (m_c, m_s, m_u)},
    )
    return split


def semisimple_zero(a, tol: Tolerances = DEFAULT_TOL) -> KernelReport:
    """Numerical kernel of A and semisimplicity of its zero eigenvalue.

    kernel_dim = nullity(A) from the SVD with threshold tol_zero * sigma_max;
    the zero eigenvalue is semisimple iff nullity(A) == nullity(A @ A)
    (no second-order Jordan growth).
    """
    a = check_square(a)
    n = a.shape[0]
    if n == 0:
        return KernelReport(0, True, np.zeros((0, 0)), np.inf, 0)

    def nullity(mat):
        s = sla.svd(mat, compute_uv=False)
        smax = s[0]
        if smax == 0.0:
            return mat.shape[0], None, np.inf
        thr = tol.tol_zero * smax
        k = int(np.sum(s <= thr))
        margin = (s[mat.shape[0] - k - 1] / smax) if k < mat.shape[0] else np.inf
        return k, thr, margin

    k1, _, margin = nullity(a)
    k2, _, _ = nullity(a @ a)
    if k1 == n:
        basis = np.eye(n)
    elif k1 == 0:
        basis = np.zeros((n, 0))
    else:
        _, _, vh = sla.svd(a)
        basis = vh[n - k1:].T
    return KernelReport(
        kernel_dim=k1,
        semisimple=(k1 == k2),
        basis=basis,
        margin=float(margin),
        nullity_sq=k2,
    )
