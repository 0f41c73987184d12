"""Reduced two-phase Hele-Shaw (curvature-driven, nonlocal) model in the plane.

The interface evolves by V = -[d_nu u] where u solves the Laplace equation on
both sides of the curve with trace u = kappa (curvature) and a no-flux outer
wall.  Equilibria are circles; perturbing a circle of radius R by a Fourier
mode cos(k theta) decouples the linearization into scalar problems per mode:

    lambda_k = -(dtn jump of the mode-k harmonic) * a_k,
    a_k = (k^2 - 1) / R^2,

in the decaying convention (lambda >= 0 means the mode relaxes).  The jump is
computed here by radial finite differences; the analytic limit is -2k/R for
an unbounded exterior, giving lambda_k -> 2 k (k^2 - 1) / R^3.  Modes k = 0
and k = 1 are neutral: they reproduce the radius and center shifts of the
equilibrium family, and the chart of nearby circles has exactly this span as
its tangent space.

A flat-interface variant checks the Fourier symbol 2 |xi|^3 on a strip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded, subspace_angles

from .errors import ConfigError, GridTooCoarse, InvalidRadius, OutOfChart
from .normal_form import TangentKernelReport
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "MSConfig",
    "ModeEigenReport",
    "FlatSymbolReport",
    "SphereChart",
    "a_sigma_mode",
    "dtn_jump_mode",
    "l_mode_eigenvalue",
    "flat_symbol_check",
    "sphere_chart",
    "ms_tangent_kernel_check",
]


@dataclass(frozen=True)
class MSConfig:
    """Geometry and grid sizes for the circle and strip computations.

    radial_grid counts intervals on [0, R]; the exterior [R, r_out] gets a
    step-matched count so both sides run at the same resolution.
    """

    radius: float = 1.0
    r_out: float = 20.0
    radial_grid: int = 400
    strip_height: float = 30.0
    strip_grid: int = 1200

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidRadius(f"radius must be positive, got {self.radius}")
        if not self.r_out > self.radius:
            raise InvalidRadius(
                f"outer wall r_out={self.r_out} must exceed radius={self.radius}")
        if self.radial_grid < 16 or self.strip_grid < 16:
            raise ConfigError("grids need at least 16 intervals")
        if not self.strip_height > 0.0:
            raise ConfigError("strip_height must be positive")


def a_sigma_mode(k: int, radius: float) -> float:
    """Curvature trace coefficient of mode k on a circle: (k^2 - 1)/R^2.

    Perturbing r = R + eps cos(k theta) changes the curvature trace by
    eps a_k cos(k theta) + O(eps^2); k = 1 is neutral (translations).
    """
    if not radius > 0.0:
        raise InvalidRadius(f"radius must be positive, got {radius}")
    if k < 0 or k != int(k):
        raise ConfigError(f"mode index must be a nonnegative integer, got {k}")
    return (k * k - 1.0) / radius ** 2


def _solve_tridiag(sub, diag, sup, rhs):
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    return solve_banded((1, 1), ab, rhs)


def _inner_derivative(k: int, cfg: MSConfig) -> float:
    """d/dr at r=R of the regular mode-k harmonic with trace 1 (from inside)."""
    m = cfg.radial_grid
    h = cfg.radius / m
    r = h * np.arange(m + 1)
    # unknowns v_1..v_{m-1}; v_0 = 0 (regularity, k >= 1), v_m = 1
    j = np.arange(1, m)
    rp = r[j] + 0.5 * h
    rm = r[j] - 0.5 * h
    diag = -(rp + rm) / h ** 2 - k * k / r[j]
    sub = rm[1:] / h ** 2
    sup = rp[:-1] / h ** 2
    rhs = np.zeros(m - 1)
    rhs[-1] = -rp[-1] / h ** 2        # move v_m = 1 to the right side
    v = _solve_tridiag(sub, diag, sup, rhs)
    return (3.0 * 1.0 - 4.0 * v[-1] + v[-2]) / (2.0 * h)


def _outer_derivative(k: int, cfg: MSConfig) -> float:
    """d/dr at r=R of the mode-k harmonic with trace 1, no-flux at r_out."""
    span = cfg.r_out - cfg.radius
    m = int(np.ceil(cfg.radial_grid * span / cfg.radius))
    h = span / m
    r = cfg.radius + h * np.arange(m + 1)
    # unknowns v_1..v_m; v_0 = 1 at r = R; last row is the one-sided
    # second-order no-flux closure (3 v_m - 4 v_{m-1} + v_{m-2}) / 2h = 0,
    # which widens the lower bandwidth to 2.
    n = m
    ab = np.zeros((4, n))
    rhs = np.zeros(n)
    j = np.arange(1, m)
    rp = r[j] + 0.5 * h
    rm = r[j] - 0.5 * h
    diag = -(rp + rm) / h ** 2 - k * k / r[j]
    # row i (0-indexed) carries node j = i + 1
    ab[1, :-1] = diag
    ab[0, 1:-1] = rp[:-1] / h ** 2     # coefficient of v_{j+1}, j = 1..m-2
    ab[0, -1] = rp[-1] / h ** 2        # node m-1 couples to v_m
    ab[2, :-2] = rm[1:] / h ** 2       # coefficient of v_{j-1}, j = 2..m-1
    rhs[0] = -rm[0] / h ** 2           # node 1 couples to v_0 = 1
    # closure row: unknown columns m-3, m-2, m-1 get 1, -4, 3
    ab[1, -1] = 3.0
    ab[2, -2] = -4.0
    ab[3, -3] = 1.0
    v = solve_banded((2, 1), ab, rhs)
    return (-3.0 * 1.0 + 4.0 * v[0] - v[1]) / (2.0 * h)


def dtn_jump_mode(k: int, cfg: MSConfig | None = None) -> float:
    """Jump [d_r v] at r=R of the two-sided mode-k harmonic with trace 1.

    Exterior minus interior derivative.  k = 0 is exact: both sides are
    constant (regularity inside, no-flux outside), so the jump vanishes.
    The unbounded-exterior limit is -2k/R, approached like (R/r_out)^{2k}.
    """
    cfg = cfg or MSConfig()
    if k < 0 or k != int(k):
        raise ConfigError(f"mode index must be a nonnegative integer, got {k}")
    if k == 0:
        return 0.0
    return _outer_derivative(k, cfg) - _inner_derivative(k, cfg)


@dataclass
class ModeEigenReport:
    k: int
    eigenvalue: float
    dtn_jump: float
    curvature_coeff: float
    radius: float
    r_out: float
    radial_grid: int


def l_mode_eigenvalue(k: int, cfg: MSConfig | None = None) -> ModeEigenReport:
    """Relaxation rate of Fourier mode k on the circle of radius cfg.radius."""
    cfg = cfg or MSConfig()
    jump = dtn_jump_mode(k, cfg)
    a_k = a_sigma_mode(k, cfg.radius)
    return ModeEigenReport(k=k, eigenvalue=-jump * a_k, dtn_jump=jump,
                           curvature_coeff=a_k, radius=cfg.radius,
                           r_out=cfg.r_out, radial_grid=cfg.radial_grid)


def _strip_jump(xi: float, height: float, n: int) -> float:
    """[d_y w] at y=0 for -w'' + xi^2 w = 0, w(0) = xi^2, w(+-height) = 0.

    The problem is even in y, so one half-strip solve gives both one-sided
    derivatives; the jump is twice the upper one.
    """
    h = height / n
    diag = np.full(n - 1, 2.0 / h ** 2 + xi * xi)
    off = np.full(n - 2, -1.0 / h ** 2)
    rhs = np.zeros(n - 1)
    rhs[0] = xi * xi / h ** 2
    w = _solve_tridiag(off, diag, off, rhs)
    d_up = (-3.0 * xi * xi + 4.0 * w[0] - w[1]) / (2.0 * h)
    return 2.0 * d_up


@dataclass
class FlatSymbolReport:
    xi: np.ndarray
    jump: np.ndarray              # finest-grid jump per frequency
    symbol: np.ndarray            # -jump
    target: np.ndarray            # 2 |xi|^3
    rel_error: np.ndarray
    conv_ratio: np.ndarray        # coarse/fine difference quotient, ~4
    order_estimate: np.ndarray    # log2 of conv_ratio
    strip_height: float
    strip_grid: int

    @property
    def max_rel_error(self) -> float:
        return float(np.max(self.rel_error))


def flat_symbol_check(xi_values=(0.5, 1.0, 2.0, 4.0),
                      cfg: MSConfig | None = None,
                      ratio_window: tuple[float, float] = (3.0, 5.0)) -> FlatSymbolReport:
    """Verify the flat-interface symbol 2 |xi|^3 by strip finite differences.

    Solves at three nested grids (n, 2n, 4n); the difference quotient
    between refinements must land in ratio_window (second order gives 4),
    otherwise GridTooCoarse.  Differences already at roundoff count as
    converged.
    """
    cfg = cfg or MSConfig()
    xi_arr = np.atleast_1d(np.asarray(xi_values, dtype=float))
    if np.any(xi_arr <= 0.0):
        raise ConfigError("frequencies must be positive")
    n0 = cfg.strip_grid
    jumps = np.empty_like(xi_arr)
    ratios = np.empty_like(xi_arr)
    for i, xi in enumerate(xi_arr):
        j1 = _strip_jump(xi, cfg.strip_height, n0)
        j2 = _strip_jump(xi, cfg.strip_height, 2 * n0)
        j4 = _strip_jump(xi, cfg.strip_height, 4 * n0)
        coarse, fine = j1 - j2, j2 - j4
        if abs(fine) < 1e-12 * max(1.0, abs(j4)):
            ratios[i] = np.nan        # refinement hit roundoff: converged
        else:
            ratios[i] = coarse / fine
            if not ratio_window[0] <= ratios[i] <= ratio_window[1]:
                raise GridTooCoarse(
                    f"refinement quotient {ratios[i]:.3g} at xi={xi} is outside "
                    f"{ratio_window}; raise strip_grid or shrink strip_height")
        jumps[i] = j4
    target = 2.0 * np.abs(xi_arr) ** 3
    symbol = -jumps
    return FlatSymbolReport(
        xi=xi_arr, jump=jumps, symbol=symbol, target=target,
        rel_error=np.abs(symbol - target) / target,
        conv_ratio=ratios,
        order_estimate=np.log2(ratios),
        strip_height=cfg.strip_height, strip_grid=n0,
    )


@dataclass
class SphereChart:
    """Nearby circles as radial graphs over the reference circle.

    z = (z0, z1, z2): the circle with radius R + z0 and center
    (z1, z2) has the polar representation r(theta) = R + rho(z, theta) with

        rho = y - R + sqrt(y^2 + (R + z0)^2 - z1^2 - z2^2),
        y = z1 cos(theta) + z2 sin(theta).

    rho(z0, 0, 0) = z0 exactly, and the derivative at z = 0 sends h to
    h0 + h1 cos(theta) + h2 sin(theta).
    """

    radius: float
    m: int = field(default=3, init=False)

    def rho(self, z, theta):
        z = np.asarray(z, dtype=float)
        if z.shape != (3,):
            raise ConfigError(f"chart takes 3 coordinates, got shape {z.shape}")
        theta = np.asarray(theta, dtype=float)
        z0, z1, z2 = z
        big_r = self.radius + z0
        if big_r <= 0.0:
            raise OutOfChart(f"radius increment z0={z0} collapses the circle")
        off_sq = z1 * z1 + z2 * z2
        if off_sq >= big_r ** 2:
            raise OutOfChart("center offset reaches the circle; the radial "
                             "graph representation breaks down")
        y = z1 * np.cos(theta) + z2 * np.sin(theta)
        return y - self.radius + np.sqrt(y * y + big_r ** 2 - off_sq)

    def d_rho0(self, theta) -> np.ndarray:
        """Exact derivative at z = 0: columns 1, cos(theta), sin(theta)."""
        theta = np.asarray(theta, dtype=float)
        return np.column_stack([np.ones_like(theta), np.cos(theta), np.sin(theta)])

    def fd_jacobian(self, theta, step: float = 1e-6) -> np.ndarray:
        """Central-difference derivative at z = 0, for cross-checking d_rho0."""
        theta = np.asarray(theta, dtype=float)
        cols = []
        for j in range(3):
            e = np.zeros(3)
            e[j] = step
            cols.append((self.rho(e, theta) - self.rho(-e, theta)) / (2.0 * step))
        return np.column_stack(cols)


def sphere_chart(cfg: MSConfig | None = None) -> SphereChart:
    cfg = cfg or MSConfig()
    return SphereChart(radius=cfg.radius)


def ms_tangent_kernel_check(cfg: MSConfig | None = None, k_max: int = 6,
                            n_theta: int = 256, kernel_ks=None,
                            tol: Tolerances = DEFAULT_TOL) -> TangentKernelReport:
    """Compare the chart tangent space with the kernel of the linearization.

    The tangent space at the reference circle is the span of the chart
    derivative columns (sampled on a theta mesh, via finite differences so
    the exact formula is not assumed).  The kernel is the span of the
    Fourier modes whose computed rate is below tol.gap; pass kernel_ks to
    override the mode selection (useful for negative checks).
    """
    cfg = cfg or MSConfig()
    chart = sphere_chart(cfg)
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    tangent = chart.fd_jacobian(theta)

    if kernel_ks is None:
        scale = max(abs(l_mode_eigenvalue(k, cfg).eigenvalue)
                    for k in range(k_max + 1))
        kernel_ks = [k for k in range(k_max + 1)
                     if abs(l_mode_eigenvalue(k, cfg).eigenvalue)
                     <= tol.gap * max(1.0, scale)]
    cols = []
    for k in sorted(set(int(k) for k in kernel_ks)):
        if k == 0:
            cols.append(np.ones_like(theta))
        else:
            cols.append(np.cos(k * theta))
            cols.append(np.sin(k * theta))
    if not cols:
        kernel = np.zeros((n_theta, 0))
    else:
        kernel = np.column_stack(cols)

    tangent_dim = int(np.linalg.matrix_rank(tangent))
    kernel_dim = kernel.shape[1]
    if kernel_dim == 0:
        angles = np.full(tangent.shape[1], np.pi / 2.0)
        contained = tangent_dim == 0
    else:
        angles = subspace_angles(tangent, kernel)
        contained = (tangent_dim <= kernel_dim
                     and float(np.max(angles)) <= 1e-7)
    equal = contained and tangent_dim == kernel_dim
    return TangentKernelReport(contained=bool(contained), equal=bool(equal),
                               angles=np.asarray(angles),
                               tangent_dim=tangent_dim, kernel_dim=kernel_dim)
