"""Classification of equilibria on manifolds and the graph-map reduction.

Setting: an autonomous field ``u' = F(u)`` with a whole manifold E of
equilibria through a base point ``u_*``, described locally by a chart
``zeta -> Psi(zeta)`` with ``Psi(0) = u_*``.  Writing ``v = u - u_*`` the
evolution becomes ``v' + A0 v = G(v)`` with ``A0 = -F'(u_*)`` and
``G(v) = F(u_* + v) + A0 v``, so ``G(0) = 0`` and ``G'(0) = 0``.

:func:`classify` checks the four classification conditions numerically:

(i)   the chart really parameterizes equilibria and has full rank m,
(ii)  the chart tangent space equals the kernel of A0,
(iii) the zero eigenvalue of A0 is semisimple,
(iv)  the remaining spectrum stays off the punctured imaginary strip
      (all decaying for normal stability, mixed signs with a nonempty
      growing part for normal hyperbolicity).

:func:`solve_graph_map` builds the function phi whose graph over the center
subspace carries the equilibria near u_*, by a damped Newton iteration on
``A z = P_t G(x + z)`` over the transverse (stable + unstable) subspace.
:func:`to_normal_form` / :func:`from_normal_form` convert between ambient
deviations and graph-adapted coordinates, and :func:`normal_form_rhs`
evaluates the reduced right-hand sides, which vanish identically on the
graph itself.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import (
    IllConditioned,
    NewtonDiverged,
    NotAnEquilibrium,
    OutOfChart,
    RadiusTooLarge,
    RankDeficientChart,
)
from .spectral import (
    KernelReport,
    SpectralSplit,
    SpectrumReport,
    check_square,
    eigen_decompose,
    semisimple_zero,
    spectral_projections,
)
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "VectorFieldSpec",
    "ManifoldChart",
    "TangentKernelReport",
    "Classification",
    "GraphMap",
    "NORMALLY_STABLE",
    "NORMALLY_HYPERBOLIC",
    "INCONCLUSIVE",
    "fd_jacobian",
    "linearize",
    "tangent_kernel_check",
    "classify",
    "solve_graph_map",
    "to_normal_form",
    "from_normal_form",
    "normal_form_rhs",
]

NORMALLY_STABLE = "NormallyStable"
NORMALLY_HYPERBOLIC = "NormallyHyperbolic"
INCONCLUSIVE = "Inconclusive"

# principal angles below this count as zero when comparing subspaces
ANGLE_TOL = 1e-7


@dataclass
class VectorFieldSpec:
    """An autonomous vector field u' = F(u) on (a subset of) R^n.

    ``jacobian`` is optional; finite differences are used when absent.
    The validated domain is the intersection of a ball of ``domain_radius``
    around ``domain_center`` (when both are set) and the region where the
    continuous guard ``domain_guard(u) > 0`` (when set).  Crossing either
    boundary during integration raises DomainExit.
    """

    n: int
    f: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    domain_radius: float | None = None
    domain_center: np.ndarray | None = None
    domain_guard: Callable[[np.ndarray], float] | None = None
    name: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("field dimension must be >= 1")
        if self.domain_center is not None:
            self.domain_center = np.asarray(self.domain_center, dtype=float)

    def eval(self, u) -> np.ndarray:
        return np.asarray(self.f(np.asarray(u, dtype=float)), dtype=float)

    def jac(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.jacobian is not None:
            return check_square(self.jacobian(u))
        return fd_jacobian(self.f, u)

    def in_domain(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        if self.domain_radius is not None and self.domain_center is not None:
            if np.linalg.norm(u - self.domain_center) > self.domain_radius:
                return False
        if self.domain_guard is not None and self.domain_guard(u) <= 0.0:
            return False
        return True


@dataclass
class ManifoldChart:
    """Local parameterization zeta in R^m -> Psi(zeta) in R^n of the
    equilibria manifold, with Psi(0) = u_star and validated radius
    ``chart_radius`` in zeta.

    ``d_psi`` (optional) returns the n-by-m derivative; finite differences
    otherwise.  ``m = 0`` encodes an isolated equilibrium: ``psi`` is then
    called with an empty array and must return u_star.
    """

    m: int
    psi: Callable[[np.ndarray], np.ndarray]
    chart_radius: float
    d_psi: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("chart dimension must be >= 0")
        if not self.chart_radius > 0:
            raise ValueError("chart_radius must be positive")

    def point(self, zeta) -> np.ndarray:
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        return np.asarray(self.psi(zeta), dtype=float)

    @property
    def u_star(self) -> np.ndarray:
        return self.point(np.zeros(self.m))

    def tangent(self, zeta=None) -> np.ndarray:
        """Chart derivative Psi'(zeta), shape (n, m)."""
        if zeta is None:
            zeta = np.zeros(self.m)
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        if self.d_psi is not None:
            t = np.asarray(self.d_psi(zeta), dtype=float)
            return t.reshape(len(self.u_star), self.m)
        if self.m == 0:
            return np.zeros((len(self.u_star), 0))
        return fd_jacobian(lambda z: self.point(z), zeta)


@dataclass
class TangentKernelReport:
    contained: bool            # tangent space inside the kernel
    equal: bool                # spans coincide
    angles: np.ndarray         # principal angles (radians)
    tangent_dim: int
    kernel_dim: int


@dataclass
class Classification:
    verdict: str                           # NormallyStable | NormallyHyperbolic | Inconclusive
    failed: list[str]                      # failed condition tags, e.g. ["(iii)"]
    dims: tuple[int, int, int]             # (m_c, m_s, m_u)
    a0: np.ndarray = field(repr=False, default=None)
    spectrum: SpectrumReport = field(repr=False, default=None)
    kernel: KernelReport = field(repr=False, default=None)
    tangent: TangentKernelReport = field(repr=False, default=None)
    u_star: np.ndarray = field(repr=False, default=None)
    diagnostics: dict = field(repr=False, default_factory=dict)

    @property
    def is_conclusive(self) -> bool:
        return self.verdict != INCONCLUSIVE


def fd_jacobian(f, u, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian with step h = eps^(1/3) * (1 + ||u||)."""
    u = np.asarray(u, dtype=float)
    if h is None:
        h = np.finfo(float).eps ** (1.0 / 3.0) * (1.0 + np.linalg.norm(u))
    f0 = np.atleast_1d(np.asarray(f(u), dtype=float))
    jac = np.empty((f0.size, u.size))
    for j in range(u.size):
        e = np.zeros_like(u)
        e[j] = h
        jac[:, j] = (np.asarray(f(u + e), float) - np.asarray(f(u - e), float)) / (2.0 * h)
    return jac


def linearize(fs: VectorFieldSpec, u_star, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """A0 = -F'(u_star), the linearization in the ``v' + A0 v = G(v)`` convention.

    Raises NotAnEquilibrium unless ||F(u_star)|| <= eps_eq.
    """
    u_star = np.asarray(u_star, dtype=float)
    resid = np.linalg.norm(fs.eval(u_star))
    if not resid <= tol.eps_eq:
        raise NotAnEquilibrium(
            f"||F(u_star)|| = {resid:.3e} exceeds eps_eq = {tol.eps_eq:g}"
        )
    return -fs.jac(u_star)


def nonlinearity(fs: VectorFieldSpec, u_star, a0=None, tol: Tolerances = DEFAULT_TOL):
    """The collected nonlinearity G(v) = F(u_star + v) + A0 v (G(0)=G'(0)=0)."""
    u_star = np.asarray(u_star, dtype=float)
    if a0 is None:
        a0 = linearize(fs, u_star, tol)

    def g(v):
        v = np.asarray(v, dtype=float)
        return fs.eval(u_star + v) + a0 @ v

    return g, a0


def tangent_kernel_check(chart: ManifoldChart, ker_basis,
                         tol: Tolerances = DEFAULT_TOL) -> TangentKernelReport:
    """Compare the chart tangent space at zeta=0 with a kernel basis.

    contained: every tangent direction lies in the kernel span (all principal
    angles ~ 0 and m <= kernel_dim); equal additionally needs m == kernel_dim.
    """
    ker = np.asarray(ker_basis, dtype=float)
    if ker.ndim == 1:
        ker = ker[:, None]
    t = chart.tangent()
    m = chart.m
    k = ker.shape[1]
    if m > 0:
        sv = sla.svd(t, compute_uv=False)
        if sv[-1] <= max(tol.tol_zero, 1e-12) * max(sv[0], 1.0):
            raise RankDeficientChart(
                f"chart derivative rank < m = {m} (smallest sv {sv[-1]:.3e})"
            )
    if m == 0:
        return TangentKernelReport(True, k == 0, np.array([]), 0, k)
    if k == 0:
        return TangentKernelReport(False, False, np.full(m, np.pi / 2), m, 0)
    angles = sla.subspace_angles(t, ker)
    contained = (m <= k) and bool(np.max(angles) <= ANGLE_TOL)
    return TangentKernelReport(contained, contained and m == k, angles, m, k)


def _chart_residual(fs: VectorFieldSpec, chart: ManifoldChart, n_samples: int = 17) -> float:
    """Max equilibrium residual ||F(Psi(zeta))|| over a mesh in the chart ball."""
    if chart.m == 0:
        return float(np.linalg.norm(fs.eval(chart.u_star)))
    axis = np.linspace(-chart.chart_radius, chart.chart_radius, n_samples)
    if chart.m == 1:
        mesh = axis[:, None]
    else:
        # axis sweeps along each coordinate direction; cheaper than a full grid
        mesh = np.vstack([
            np.stack([axis if j == i else np.zeros_like(axis) for j in range(chart.m)], axis=1)
            for i in range(chart.m)
        ])
    return float(max(np.linalg.norm(fs.eval(chart.point(z))) for z in mesh))


def classify(fs: VectorFieldSpec, chart: ManifoldChart,
             tol: Tolerances = DEFAULT_TOL) -> Classification:
    """Classify the equilibrium at the chart base point.

    NormallyStable: conditions (i)-(iii) hold, the spectrum splits cleanly,
    and there is no unstable part.  NormallyHyperbolic: (i)-(iii) hold, the
    split is clean, and the unstable part is nonempty.  Anything else is
    Inconclusive with the list of failed condition tags.  A chart whose
    points are not equilibria fails (i) and still gets a verdict; the
    NotAnEquilibrium gate lives in linearize(), not here.
    """
    u_star = np.asarray(chart.u_star, dtype=float)
    a0 = -fs.jac(u_star)
    spectrum = eigen_decompose(a0, tol)
    kernel = semisimple_zero(a0, tol)
    tangent = tangent_kernel_check(chart, kernel.basis, tol)

    chart_resid = _chart_residual(fs, chart)
    ok_i = chart_resid <= max(tol.eps_eq, 10 * tol.eps_eq)
    m_c = len(spectrum.center)

    failed: list[str] = []
    if not ok_i:
        failed.append("(i)")
    if not tangent.equal:
        failed.append("(ii)")
    if not (kernel.semisimple and kernel.kernel_dim == m_c):
        failed.append("(iii)")
    if not spectrum.is_conclusive:
        failed.append("(iv)")

    if failed:
        verdict = INCONCLUSIVE
    elif len(spectrum.unstable) == 0:
        verdict = NORMALLY_STABLE
    else:
        verdict = NORMALLY_HYPERBOLIC

    return Classification(
        verdict=verdict,
        failed=failed,
        dims=spectrum.dims,
        a0=a0,
        spectrum=spectrum,
        kernel=kernel,
        tangent=tangent,
        u_star=u_star,
        diagnostics={
            "chart_residual": chart_resid,
            "principal_angles": tangent.angles.tolist(),
            "kernel_margin": kernel.margin,
            "gap_margin": spectrum.gap_margin,
        },
    )


@dataclass
class GraphMap:
    """The transverse graph phi over the center subspace.

    ``phi(x)`` maps a vector x in the center subspace (given as a full-space
    n-vector with P_c x = x) to its transverse graph value, a full-space
    vector in the stable+unstable subspace.  ``rho0`` is the validated
    radius: the contraction bound ||phi'|| <= 1 was checked on a mesh of
    ``|x| <= rho0`` and evaluation beyond it raises OutOfChart.
    """

    rho0: float
    u_star: np.ndarray = field(repr=False)
    a0: np.ndarray = field(repr=False)
    split: SpectralSplit = field(repr=False)
    g: Callable = field(repr=False)
    newton_tol: float = field(repr=False, default=1e-11)
    max_iter: int = field(repr=False, default=50)
    sup_phi_prime: float = 0.0
    diagnostics: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        self._cache: dict[bytes, np.ndarray] = {}
        self._lock = threading.Lock()
        s = self.split
        self._v_t = np.hstack([s.v_s, s.v_u])
        self._p_t = s.p_s + s.p_u
        if self._v_t.shape[1]:
            self._w_t = np.linalg.pinv(self._v_t)
            self._m_t = self._w_t @ self.a0 @ self._v_t
        else:
            self._w_t = np.zeros((0, self.a0.shape[0]))
            self._m_t = np.zeros((0, 0))

    # -- evaluation ------------------------------------------------------

    def phi(self, x) -> np.ndarray:
        """Transverse graph value at center point x (full-space vector)."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        if r > self.rho0 * (1.0 + 1e-9):
            raise OutOfChart(f"|x| = {r:.3e} exceeds validated radius rho0 = {self.rho0:.3e}")
        return self._phi_unchecked(x)

    def phi_s(self, x) -> np.ndarray:
        return self.split.p_s @ self.phi(x)

    def phi_u(self, x) -> np.ndarray:
        return self.split.p_u @ self.phi(x)

    def _phi_unchecked(self, x, _depth: int = 0) -> np.ndarray:
        if self._v_t.shape[1] == 0:
            return np.zeros_like(np.asarray(x, dtype=float))
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit.copy()
        c0 = np.zeros(self._v_t.shape[1])
        try:
            c = self._newton(x, c0)
        except NewtonDiverged:
            if _depth >= 8:
                raise
            # continuation: warm start from the half-radius solution
            z_half = self._phi_unchecked(0.5 * x, _depth + 1)
            c = self._newton(x, self._w_t @ z_half)
        z = self._v_t @ c
        with self._lock:
            self._cache[key] = z.copy()
        return z

    def _newton(self, x, c) -> np.ndarray:
        """Damped Newton for H(c) = M c - W (P_t G(x + V c)) = 0."""
        g, v_t, w_t, p_t, m_t = self.g, self._v_t, self._w_t, self._p_t, self._m_t

        def res(cv):
            return m_t @ cv - w_t @ (p_t @ g(x + v_t @ cv))

        h = res(c)
        norm_h = np.linalg.norm(h)
        for _ in range(self.max_iter):
            if norm_h <= self.newton_tol:
                return c
            gj = fd_jacobian(g, x + v_t @ c)
            jac = m_t - w_t @ p_t @ gj @ v_t
            try:
                step = np.linalg.solve(jac, -h)
            except np.linalg.LinAlgError as exc:
                raise NewtonDiverged(f"singular Newton system at x (|x|={np.linalg.norm(x):.3e})",
                                     x=x) from exc
            lam = 1.0
            while lam > 2 ** -30:
                c_new = c + lam * step
                h_new = res(c_new)
                if np.linalg.norm(h_new) < (1.0 - 0.25 * lam) * norm_h or \
                   np.linalg.norm(h_new) <= self.newton_tol:
                    break
                lam *= 0.5
            else:
                raise NewtonDiverged(
                    f"line search stalled at |x| = {np.linalg.norm(x):.3e}", x=x)
            c, h = c_new, h_new
            norm_h = np.linalg.norm(h)
        if norm_h <= self.newton_tol:
            return c
        raise NewtonDiverged(
            f"no convergence in {self.max_iter} iterations at |x| = {np.linalg.norm(x):.3e} "
            f"(residual {norm_h:.3e})", x=x)

    # -- derivatives -----------------------------------------------------

    def phi_jacobian(self, x) -> np.ndarray:
        """d phi(x) as an (n, m_c) matrix w.r.t. the orthonormal center basis."""
        v_c = self.split.v_c
        m_c = v_c.shape[1]
        n = len(self.u_star)
        if m_c == 0 or self._v_t.shape[1] == 0:
            return np.zeros((n, m_c))
        h = 1e-6 * (1.0 + np.linalg.norm(x))
        jac = np.empty((n, m_c))
        for j in range(m_c):
            d = h * v_c[:, j]
            jac[:, j] = (self._phi_unchecked(x + d) - self._phi_unchecked(x - d)) / (2 * h)
        return jac

    def phi_prime_apply(self, x, t_vec) -> np.ndarray:
        """phi'(x) applied to a center-subspace vector t_vec."""
        coords = self.split.v_c.T @ np.asarray(t_vec, dtype=float)
        return self.phi_jacobian(x) @ coords

    def phi_prime_norm(self, x) -> float:
        jac = self.phi_jacobian(x)
        if jac.size == 0:
            return 0.0
        return float(sla.norm(jac, 2))


def solve_graph_map(fs: VectorFieldSpec, u_star, split: SpectralSplit,
                    rho0: float = 0.5, tol: Tolerances = DEFAULT_TOL,
                    max_iter: int = 50) -> GraphMap:
    """Construct the graph map phi on a validated center ball.

    Starts from the requested radius and halves it until the Newton solves
    succeed and ||phi'|| <= 1 on a direction mesh (contraction regime).
    Raises RadiusTooLarge if no radius above rho0 * 2^-20 qualifies,
    NewtonDiverged if the iteration fails even near 0.
    """
    u_star = np.asarray(u_star, dtype=float)
    if not rho0 > 0:
        raise ValueError("rho0 must be positive")
    g, a0 = nonlinearity(fs, u_star, tol=tol)
    gm = GraphMap(rho0=rho0, u_star=u_star, a0=a0, split=split, g=g,
                  newton_tol=tol.eps_newton, max_iter=max_iter)

    m_c = split.v_c.shape[1]
    m_t = gm._v_t.shape[1]
    if m_t == 0 or m_c == 0:
        # nothing transverse to solve for (or isolated equilibrium): phi = 0
        gm.diagnostics["trivial"] = True
        phi0 = gm.phi(np.zeros(len(u_star)))
        if np.linalg.norm(phi0) > tol.eps_graph:
            raise IllConditioned("trivial graph map fails phi(0) = 0")
        return gm

    # direction mesh in the center subspace
    if m_c == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        rng = np.random.default_rng(7)
        dirs = rng.normal(size=(4 * m_c, m_c))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        dirs = np.vstack([np.eye(m_c), -np.eye(m_c), dirs])

    rho_min = rho0 * 2.0 ** -20
    rho = rho0
    while True:
        gm.rho0 = rho
        ok = True
        sup_d = 0.0
        try:
            for frac in (1.0, 0.5):
                for d in dirs:
                    x = frac * rho * (split.v_c @ d)
                    sup_d = max(sup_d, gm.phi_prime_norm(x))
                    if sup_d > 1.0:
                        ok = False
                        break
                if not ok:
                    break
        except NewtonDiverged:
            ok = False
        if ok:
            break
        gm._cache.clear()
        rho *= 0.5
        if rho < rho_min:
            raise RadiusTooLarge(
                f"no radius in [{rho_min:.3e}, {rho0:.3e}] satisfies the "
                "contraction bound ||phi'|| <= 1")

    gm.sup_phi_prime = sup_d
    z0 = gm.phi(np.zeros(len(u_star)))
    if np.linalg.norm(z0) > tol.eps_graph:
        raise IllConditioned(f"phi(0) = {np.linalg.norm(z0):.3e} exceeds eps_graph")
    d0 = gm.phi_prime_norm(np.zeros(len(u_star)))
    if d0 > max(tol.eps_graph, 1e-7):
        raise IllConditioned(f"||phi'(0)|| = {d0:.3e} exceeds tolerance")
    gm.diagnostics.update({"rho_validated": rho, "sup_phi_prime": sup_d,
                           "phi_prime_at_0": d0})
    return gm


def to_normal_form(v, split: SpectralSplit, gm: GraphMap):
    """Ambient deviation v -> graph-adapted coordinates.

    Returns (x, y) when the unstable part is empty, else (x, y, z):
    x = P_c v, y = P_s v - phi_s(x), z = P_u v - phi_u(x).
    All three are full-space vectors lying in their subspaces.
    """
    v = np.asarray(v, dtype=float)
    x = split.p_c @ v
    if np.linalg.norm(x) > gm.rho0 * (1.0 + 1e-9):
        raise OutOfChart(
            f"|P_c v| = {np.linalg.norm(x):.3e} exceeds rho0 = {gm.rho0:.3e}")
    phi_val = gm.phi(x)
    y = split.p_s @ v - split.p_s @ phi_val
    if split.v_u.shape[1] == 0:
        return x, y
    z = split.p_u @ v - split.p_u @ phi_val
    return x, y, z


def from_normal_form(x, y, split: SpectralSplit, gm: GraphMap, z=None) -> np.ndarray:
    """Inverse of to_normal_form: v = x + phi(x) + y (+ z)."""
    x = np.asarray(x, dtype=float)
    v = x + gm.phi(x) + np.asarray(y, dtype=float)
    if z is not None:
        v = v + np.asarray(z, dtype=float)
    return v


def normal_form_rhs(x, y, split: SpectralSplit, gm: GraphMap,
                    fs: VectorFieldSpec | None = None, z=None):
    """Reduced right-hand sides in graph-adapted coordinates.

    With no unstable part returns (T, R) where
    ``T = P_c (G(x + phi(x) + y) - G(x + phi(x)))`` and
    ``R = P_s (...) - phi'(x) T``; both vanish identically at y = 0.
    With an unstable part (pass z) returns (T, R_s, R_u) with the transverse
    increment evaluated at x + phi(x) + y + z and each component corrected by
    the matching derivative of phi.  ``fs`` is accepted for signature
    compatibility; the nonlinearity is taken from the graph map.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = gm.g
    base = x + gm.phi(x)
    if z is None:
        dg = g(base + y) - g(base)
        t_val = split.p_c @ dg
        r_val = split.p_s @ dg - split.p_s @ gm.phi_prime_apply(x, t_val)
        if split.v_u.shape[1] == 0:
            return t_val, r_val
        r_u = split.p_u @ dg - split.p_u @ gm.phi_prime_apply(x, t_val)
        return t_val, r_val, r_u
    z = np.asarray(z, dtype=float)
    dg = g(base + y + z) - g(base)
    t_val = split.p_c @ dg
    dphi_t = gm.phi_prime_apply(x, t_val)
    r_s = split.p_s @ dg - split.p_s @ dphi_t
    r_u = split.p_u @ dg - split.p_u @ dphi_t
    return t_val, r_s, r_u
