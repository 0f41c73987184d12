"""Built-in planar and 3D benchmark fields with circles of equilibria.

All planar fields live on R^2 \\ {0} and share the unit circle as their
equilibria manifold; the base point is u_star = (0, 1).  In polar form
(r = |u|, theta = atan2(y, x)):

* ``Ex1``:   r' = -r(r-1),    theta' = r - 1        (normally stable)
* ``Ex2m1``: r' = -r(r-1)^3,  theta' = (r-1)        (zero not semisimple)
* ``Ex2m2``: r' = -r(r-1)^3,  theta' = (r-1)^2      (kernel too large)

Each planar trajectory obeys a closed-form relation theta = c0 + g(r),
exposed as a :class:`PolarRelation` that diagnostics can test against.
``Hyperbolic3D`` extends the circle to 3D with r' = r(r-1), w' = -w, making
the circle x {0} normally hyperbolic with one growing and one decaying
transverse direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, SingularBand
from .normal_form import ManifoldChart, VectorFieldSpec
from .odesim import Trajectory

__all__ = [
    "BuiltinProblem",
    "PolarRelation",
    "PolarRelationReport",
    "LyapunovReport",
    "BUILTIN_NAMES",
    "example_field",
    "hyperbolic_field",
    "builtin_problem",
    "polar_history",
    "polar_relation_residual",
    "lyapunov_check",
]

BUILTIN_NAMES = ("Ex1", "Ex2m1", "Ex2m2", "Hyperbolic3D")

# planar fields are undefined at the origin; stop integration shy of it
_R_MIN = 1e-6


@dataclass
class PolarRelation:
    """theta(r) = c0 + g(r) along trajectories, valid away from singular radii."""

    kind: str
    g: Callable[[np.ndarray], np.ndarray]
    singular_at_one: bool
    description: str


@dataclass
class BuiltinProblem:
    name: str
    field: VectorFieldSpec
    chart: ManifoldChart
    u_star: np.ndarray
    relation: PolarRelation | None = None


@dataclass
class PolarRelationReport:
    residual_max: float
    c0: float
    t: np.ndarray = field(repr=False, default=None)
    r: np.ndarray = field(repr=False, default=None)
    theta: np.ndarray = field(repr=False, default=None)


@dataclass
class LyapunovReport:
    max_increase: float
    initial: float
    final: float
    t: np.ndarray = field(repr=False, default=None)
    values: np.ndarray = field(repr=False, default=None)


def _circle_chart(n: int) -> ManifoldChart:
    """Unit circle through (0, 1[, 0]), parameterized by arclength from the top."""

    def psi(zeta):
        z = float(np.atleast_1d(zeta)[0])
        p = np.zeros(n)
        p[0] = np.sin(z)
        p[1] = np.cos(z)
        return p

    def d_psi(zeta):
        z = float(np.atleast_1d(zeta)[0])
        t = np.zeros((n, 1))
        t[0, 0] = np.cos(z)
        t[1, 0] = -np.sin(z)
        return t

    chart = ManifoldChart(m=1, psi=psi, chart_radius=np.pi, d_psi=d_psi,
                          name=f"unit_circle_{n}d")

    def psi_batch(zetas):
        z = np.asarray(zetas, dtype=float).reshape(-1)
        pts = np.zeros((len(z), n))
        pts[:, 0] = np.sin(z)
        pts[:, 1] = np.cos(z)
        return pts

    chart.psi_batch = psi_batch
    return chart


def _ex1_field() -> VectorFieldSpec:
    def f(u):
        x, y = u
        s = 1.0 - np.hypot(x, y)
        return np.array([(x + y) * s, (y - x) * s])

    def jac(u):
        x, y = u
        r = np.hypot(x, y)
        s = 1.0 - r
        return np.array([
            [s - (x + y) * x / r, s - (x + y) * y / r],
            [-s - (y - x) * x / r, s - (y - x) * y / r],
        ])

    return VectorFieldSpec(n=2, f=f, jacobian=jac, name="Ex1",
                           domain_guard=lambda u: np.hypot(u[0], u[1]) - _R_MIN)


def _ex2_field(m: int) -> VectorFieldSpec:
    def f(u):
        x, y = u
        q = np.hypot(x, y) - 1.0
        return np.array([-x * q ** 3 - y * q ** m, -y * q ** 3 + x * q ** m])

    def jac(u):
        x, y = u
        r = np.hypot(x, y)
        q = r - 1.0
        qm = q ** m
        dqm = m * q ** (m - 1)
        rx, ry = x / r, y / r
        return np.array([
            [-q ** 3 - 3 * x * q ** 2 * rx - y * dqm * rx,
             -3 * x * q ** 2 * ry - qm - y * dqm * ry],
            [-3 * y * q ** 2 * rx + qm + x * dqm * rx,
             -q ** 3 - 3 * y * q ** 2 * ry + x * dqm * ry],
        ])

    return VectorFieldSpec(n=2, f=f, jacobian=jac, name=f"Ex2m{m}",
                           domain_guard=lambda u: np.hypot(u[0], u[1]) - _R_MIN)


def _hyperbolic_field_spec() -> VectorFieldSpec:
    def f(u):
        x, y, w = u
        q = np.hypot(x, y) - 1.0
        return np.array([(x - y) * q, (x + y) * q, -w])

    def jac(u):
        x, y, w = u
        r = np.hypot(x, y)
        q = r - 1.0
        rx, ry = x / r, y / r
        return np.array([
            [q + (x - y) * rx, -q + (x - y) * ry, 0.0],
            [q + (x + y) * rx, q + (x + y) * ry, 0.0],
            [0.0, 0.0, -1.0],
        ])

    return VectorFieldSpec(
        n=3, f=f, jacobian=jac, name="Hyperbolic3D",
        domain_guard=lambda u: np.hypot(u[0], u[1]) - _R_MIN,
        domain_center=np.array([0.0, 1.0, 0.0]),
        domain_radius=10.0,
    )


def _relation(kind: str) -> PolarRelation:
    if kind == "Ex1":
        return PolarRelation("Ex1", lambda r: -np.log(r), False,
                             "theta = c0 - ln r")
    if kind == "Ex2m1":
        return PolarRelation(
            "Ex2m1",
            lambda r: np.log(np.abs(r - 1.0) / r) + 1.0 / (r - 1.0),
            True,
            "theta = c0 + ln(|r-1|/r) + 1/(r-1)")
    if kind == "Ex2m2":
        return PolarRelation(
            "Ex2m2",
            lambda r: -np.log(np.abs(r - 1.0) / r),
            True,
            "theta = c0 - ln(|r-1|/r)")
    raise ConfigError(f"no polar relation for {kind!r}")


def example_field(kind: str) -> BuiltinProblem:
    """One of the planar circle examples: 'Ex1', 'Ex2m1' or 'Ex2m2'."""
    if kind == "Ex1":
        fs = _ex1_field()
    elif kind == "Ex2m1":
        fs = _ex2_field(1)
    elif kind == "Ex2m2":
        fs = _ex2_field(2)
    else:
        raise ConfigError(f"unknown example kind {kind!r}; "
                          f"expected one of {BUILTIN_NAMES[:3]}")
    chart = _circle_chart(2)
    return BuiltinProblem(kind, fs, chart, np.array([0.0, 1.0]), _relation(kind))


def hyperbolic_field() -> BuiltinProblem:
    """The 3D field whose unit circle x {0} is normally hyperbolic."""
    fs = _hyperbolic_field_spec()
    chart = _circle_chart(3)
    return BuiltinProblem("Hyperbolic3D", fs, chart,
                          np.array([0.0, 1.0, 0.0]), None)


def builtin_problem(name: str) -> BuiltinProblem:
    if name == "Hyperbolic3D":
        return hyperbolic_field()
    return example_field(name)


def polar_history(traj: Trajectory, n_samples: int = 800, times=None,
                  max_refine: int = 6):
    """(t, r, theta) along a planar trajectory with theta safely unwrapped.

    theta accumulates atan2 increments; sampling is refined (doubled) until
    every raw increment is below 0.9 * pi so the unwrap cannot alias.
    Pass explicit ``times`` for nonuniform (e.g. geometric) sampling.
    """
    for attempt in range(max_refine + 1):
        if times is not None:
            ts = np.asarray(times, dtype=float)
        else:
            ts = np.linspace(traj.t[0], traj.t_end, n_samples * 2 ** attempt)
        us = traj.sample(ts)
        r = np.hypot(us[:, 0], us[:, 1])
        raw = np.arctan2(us[:, 1], us[:, 0])
        d = np.diff(raw)
        wrapped = (d + np.pi) % (2 * np.pi) - np.pi
        if times is not None or len(d) == 0 or np.max(np.abs(wrapped)) < 0.9 * np.pi:
            theta = np.concatenate([[raw[0]], raw[0] + np.cumsum(wrapped)])
            return ts, r, theta
    raise ValueError("theta increments stay too large; trajectory winds faster "
                     "than the sampling can resolve")


def polar_relation_residual(traj: Trajectory, relation: PolarRelation,
                            band_width: float = 0.02, n_samples: int = 800,
                            times=None) -> PolarRelationReport:
    """Max deviation of theta - g(r) from its mean along the trajectory.

    Raises SingularBand if any sample has |r - 1| < band_width while the
    relation is singular there (the excluded band around the equilibrium
    radius where theta'(r) blows up).
    """
    ts, r, theta = polar_history(traj, n_samples=n_samples, times=times)
    if relation.singular_at_one and np.any(np.abs(r - 1.0) < band_width):
        worst = float(np.min(np.abs(r - 1.0)))
        raise SingularBand(
            f"trajectory enters |r-1| < {band_width:g} (min |r-1| = {worst:.3e}); "
            "the relation residual is not meaningful there")
    g = relation.g(r)
    c0 = float(np.mean(theta - g))
    resid = float(np.max(np.abs(theta - g - c0)))
    return PolarRelationReport(residual_max=resid, c0=c0, t=ts, r=r, theta=theta)


def lyapunov_check(traj: Trajectory, v: Callable[[np.ndarray], float] | None = None,
                   n_samples: int = 500) -> LyapunovReport:
    """Monotonicity check of a scalar function along a trajectory.

    Default V = (r - 1)^2, which decreases along the planar examples.
    max_increase is the largest positive jump between consecutive samples
    (0 for a numerically monotone decay).
    """
    ts = np.linspace(traj.t[0], traj.t_end, n_samples)
    us = traj.sample(ts)
    if v is None:
        vals = (np.hypot(us[:, 0], us[:, 1]) - 1.0) ** 2
    else:
        vals = np.array([v(u) for u in us])
    inc = np.diff(vals)
    max_inc = float(np.max(inc)) if len(inc) else 0.0
    return LyapunovReport(max_increase=max(max_inc, 0.0),
                          initial=float(vals[0]), final=float(vals[-1]),
                          t=ts, values=vals)
