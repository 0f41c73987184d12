"""Trajectory integration and convergence diagnostics near an equilibria manifold.

``integrate`` wraps an adaptive explicit embedded Runge-Kutta method with
dense output.  ``dist_to_manifold`` measures chart distance by coarse grid
search plus Gauss-Newton refinement.  ``assess_convergence`` implements the
trichotomy used throughout: a trajectory either leaves the rho-neighborhood
of the manifold, converges to a single equilibrium with a log-linear decay
fit, or stays Undetermined.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainExit, NoStablePart, StepSizeUnderflow
from .normal_form import ManifoldChart, VectorFieldSpec
from .spectral import SpectralSplit
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "Trajectory",
    "ConvergenceReport",
    "RateVsGap",
    "integrate",
    "dist_to_manifold",
    "assess_convergence",
    "estimate_rate_vs_gap",
    "fit_exponential_rate",
    "direction_set",
    "sweep_convergence",
    "parallel_map",
]

OUTCOME_CONVERGED = "Converged"
OUTCOME_LEFT = "LeftNeighborhood"
OUTCOME_UNDETERMINED = "Undetermined"

# function evaluations per step attempt and extra evals per accepted step
# for dense output, used to estimate the rejected-step count
_STAGE_COUNT = {"RK45": 6, "RK23": 3, "DOP853": 12}
_DENSE_EXTRA = {"RK45": 0, "RK23": 0, "DOP853": 3}


@dataclass
class Trajectory:
    t: np.ndarray
    states: np.ndarray                 # (k, n)
    fs: VectorFieldSpec = field(repr=False, default=None)
    sol: object = field(repr=False, default=None)   # dense OdeSolution
    step_stats: dict = field(default_factory=dict)
    status: str = "completed"

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def sample(self, times) -> np.ndarray:
        """States at the requested times, via dense output when available."""
        times = np.asarray(times, dtype=float)
        if self.sol is not None:
            return np.asarray(self.sol(times)).T
        idx = np.searchsorted(self.t, times).clip(0, len(self.t) - 1)
        return self.states[idx]


@dataclass
class ConvergenceReport:
    outcome: str
    u_inf: np.ndarray | None = None
    rate: float | None = None
    fit_r2: float | None = None
    t_exit: float | None = None
    sample_t: np.ndarray = field(repr=False, default=None)
    dist_series: np.ndarray = field(repr=False, default=None)
    resid_series: np.ndarray = field(repr=False, default=None)
    diagnostics: dict = field(repr=False, default_factory=dict)


@dataclass
class RateVsGap:
    rate: float
    gap: float

    @property
    def ratio(self) -> float:
        return self.rate / self.gap


def _domain_events(fs: VectorFieldSpec):
    events = []
    if fs.domain_radius is not None and fs.domain_center is not None:
        radius, center = fs.domain_radius, fs.domain_center

        def ball(t, u, radius=radius, center=center):
            return radius - np.linalg.norm(u - center)

        ball.terminal = True
        ball.direction = -1
        events.append(ball)
    if fs.domain_guard is not None:
        guard_fn = fs.domain_guard

        def guard(t, u, guard_fn=guard_fn):
            return guard_fn(u)

        guard.terminal = True
        guard.direction = -1
        events.append(guard)
    return events


def _defect_estimate(traj: Trajectory, n_probe: int = 25) -> float:
    """Sampled dense-output defect ||d/dt sol(t) - F(sol(t))||, relative."""
    if traj.sol is None or traj.fs is None or len(traj.t) < 2:
        return 0.0
    t0, t1 = traj.t[0], traj.t[-1]
    h = max(1e-9 * (t1 - t0), 1e-12)
    probes = np.linspace(t0 + 2 * h, t1 - 2 * h, n_probe)
    worst = 0.0
    for tp in probes:
        du = (traj.sol(tp + h) - traj.sol(tp - h)) / (2 * h)
        f = traj.fs.eval(traj.sol(tp))
        worst = max(worst, np.linalg.norm(du - f) / (1.0 + np.linalg.norm(f)))
    return float(worst)


def integrate(fs: VectorFieldSpec, u0, t_max: float, tol: float = 1e-10,
              method: str = "DOP853", max_step: float = np.inf,
              dense: bool = True) -> Trajectory:
    """Integrate u' = F(u) adaptively from u0 over [0, t_max].

    Deterministic for fixed inputs.  Raises DomainExit (with the partial
    trajectory attached) if the state crosses the field's domain boundary,
    StepSizeUnderflow if the controller fails.  t_max = 0 returns the
    single-sample trajectory.

    step_stats reports nfev, accepted steps, an estimated rejected-step
    count (from the stage count of the method) and a sampled dense-output
    defect as a stand-in for the embedded local error estimate, which the
    backend does not expose.
    """
    u0 = np.asarray(u0, dtype=float)
    if not fs.in_domain(u0):
        raise DomainExit("initial state outside the field's domain",
                         trajectory=Trajectory(np.array([0.0]), u0[None, :], fs=fs,
                                               status="domain_exit"),
                         t_exit=0.0)
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    if t_max == 0:
        return Trajectory(np.array([0.0]), u0[None, :], fs=fs,
                          step_stats={"nfev": 0, "n_accepted": 0,
                                      "n_rejected_est": 0, "max_defect_est": 0.0})

    res = solve_ivp(lambda t, u: fs.eval(u), (0.0, float(t_max)), u0,
                    method=method, rtol=tol, atol=tol, max_step=max_step,
                    dense_output=dense, events=_domain_events(fs))
    traj = Trajectory(res.t, res.y.T, fs=fs, sol=res.sol if dense else None)
    stages = _STAGE_COUNT.get(method, 6)
    extra = _DENSE_EXTRA.get(method, 0) if dense else 0
    n_acc = max(len(res.t) - 1, 0)
    n_rej = max(0, int(round((res.nfev - 1 - extra * n_acc) / stages)) - n_acc)
    traj.step_stats = {
        "nfev": int(res.nfev),
        "n_accepted": n_acc,
        "n_rejected_est": n_rej,
        "tol": tol,
        "max_defect_est": _defect_estimate(traj),
    }
    if res.status == -1:
        traj.status = "failed"
        raise StepSizeUnderflow(f"integrator failed: {res.message}", trajectory=traj)
    if res.status == 1:
        traj.status = "domain_exit"
        raise DomainExit(f"trajectory left the domain at t = {res.t[-1]:.6g}",
                         trajectory=traj, t_exit=float(res.t[-1]))
    return traj


def _chart_grid(chart: ManifoldChart, n_grid: int) -> np.ndarray:
    r = chart.chart_radius
    if chart.m == 0:
        return np.zeros((1, 0))
    if chart.m == 1:
        return np.linspace(-r, r, n_grid)[:, None]
    if chart.m == 2:
        side = max(8, int(np.sqrt(n_grid)))
        ax = np.linspace(-r, r, side)
        xx, yy = np.meshgrid(ax, ax)
        return np.column_stack([xx.ravel(), yy.ravel()])
    rng = np.random.default_rng(0)
    return rng.uniform(-r, r, size=(n_grid, chart.m))


def _chart_points(chart: ManifoldChart, zetas: np.ndarray) -> np.ndarray:
    batch = getattr(chart, "psi_batch", None)
    if batch is not None:
        return np.asarray(batch(zetas), dtype=float)
    return np.stack([chart.point(z) for z in zetas])


def dist_to_manifold(u, chart: ManifoldChart, n_grid: int = 512,
                     refine_steps: int = 20):
    """Distance from u to the charted manifold and the minimizing chart point.

    Coarse grid search over the chart ball followed by damped Gauss-Newton
    refinement of ||Psi(zeta) - u||^2.  Returns (dist, zeta_star).
    """
    u = np.asarray(u, dtype=float)
    zetas = _chart_grid(chart, n_grid)
    pts = _chart_points(chart, zetas)
    d2 = np.sum((pts - u) ** 2, axis=1)
    best = int(np.argmin(d2))
    zeta = zetas[best].astype(float)
    dist = float(np.sqrt(d2[best]))
    if chart.m == 0:
        return dist, zeta
    r = chart.chart_radius
    for _ in range(refine_steps):
        resid = chart.point(zeta) - u
        jac = chart.tangent(zeta)
        step, *_ = np.linalg.lstsq(jac, -resid, rcond=None)
        if not np.all(np.isfinite(step)):
            break
        lam = 1.0
        improved = False
        while lam > 1e-6:
            cand = np.clip(zeta + lam * step, -r, r)
            d_new = np.linalg.norm(chart.point(cand) - u)
            if d_new < dist:
                zeta, dist = cand, float(d_new)
                improved = True
                break
            lam *= 0.5
        if not improved or np.linalg.norm(step) * lam < 1e-12 * (1 + np.linalg.norm(zeta)):
            break
    return dist, zeta


def fit_exponential_rate(times, values, floor: float = 0.0):
    """Least-squares slope of log(values) vs t.

    Returns (omega, r2, n_used) with omega = -slope, ignoring samples at or
    below ``floor``.  r2 = 0 when the series carries no decay signal.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = np.isfinite(values) & (values > max(floor, 0.0))
    t, v = times[mask], values[mask]
    if len(t) < 2 or np.ptp(t) <= 0.0:
        return 0.0, 0.0, int(len(t))
    logv = np.log(v)
    coeffs = np.polyfit(t, logv, 1)
    pred = np.polyval(coeffs, t)
    ss_res = float(np.sum((logv - pred) ** 2))
    ss_tot = float(np.sum((logv - np.mean(logv)) ** 2))
    r2 = 0.0 if ss_tot < 1e-20 else 1.0 - ss_res / ss_tot
    return float(-coeffs[0]), float(r2), int(len(t))


def assess_convergence(traj: Trajectory, chart: ManifoldChart, rho: float,
                       fit_window: float = 0.3, min_samples: int = 20,
                       n_samples: int = 300,
                       tol: Tolerances = DEFAULT_TOL) -> ConvergenceReport:
    """Classify a trajectory as LeftNeighborhood / Converged / Undetermined.

    LeftNeighborhood: some sample has chart distance > rho (first such time
    reported).  Converged: the estimated limit u_inf (tail average refined by
    one Gauss-Newton step on F) has small field residual and log ||u - u_inf||
    decays linearly (r2 >= 0.98) over the fit window (last ``fit_window``
    fraction of samples, at least ``min_samples``).  Otherwise Undetermined.
    """
    n_samples = max(n_samples, min_samples)
    ts = np.linspace(traj.t[0], traj.t_end, n_samples)
    us = traj.sample(ts)
    dists = np.empty(len(ts))
    for i, u in enumerate(us):
        dists[i], _ = dist_to_manifold(u, chart)

    beyond = np.nonzero(dists > rho)[0]
    if beyond.size:
        t_exit = float(ts[beyond[0]])
        return ConvergenceReport(OUTCOME_LEFT, t_exit=t_exit, sample_t=ts,
                                 dist_series=dists,
                                 diagnostics={"max_dist": float(np.max(dists))})

    # limit estimate: tail average plus one Gauss-Newton step onto {F = 0}
    k_tail = max(2, n_samples // 10)
    u_inf = np.mean(us[-k_tail:], axis=0)
    # the tail mean lags the limit by O(e^{-w t_end}) along the manifold,
    # which the Gauss-Newton step cannot remove (it corrects transversally);
    # componentwise Aitken extrapolation on three spaced samples kills the
    # leading geometric term
    m_sp = max(1, n_samples // 20)
    if n_samples > 2 * m_sp:
        u_c, u_b, u_a = us[-1], us[-1 - m_sp], us[-1 - 2 * m_sp]
        d1 = u_c - u_b
        d2 = d1 - (u_b - u_a)
        safe = np.abs(d2) > 1e3 * np.finfo(float).eps * (1.0 + np.abs(u_c))
        u_ait = u_c.copy()
        u_ait[safe] -= d1[safe] ** 2 / d2[safe]
        if np.linalg.norm(u_ait - u_c) <= 10.0 * np.linalg.norm(d1) + 1e-12:
            u_inf = u_ait
    if traj.fs is not None:
        jac = traj.fs.jac(u_inf)
        step, *_ = np.linalg.lstsq(jac, -traj.fs.eval(u_inf), rcond=None)
        if np.all(np.isfinite(step)):
            u_inf = u_inf + step
        eq_resid = float(np.linalg.norm(traj.fs.eval(u_inf)))
    else:
        eq_resid = np.nan

    resid = np.linalg.norm(us - u_inf, axis=1)
    k_fit = max(min_samples, int(np.ceil(fit_window * n_samples)))
    k_fit = min(k_fit, n_samples)
    t_fit, e_fit = ts[-k_fit:], resid[-k_fit:]

    scale = 1.0 + np.linalg.norm(u_inf)
    floor = 1e-13 * scale
    diagnostics = {"eq_residual": eq_resid, "tail_len": k_fit,
                   "final_resid": float(resid[-1])}

    if np.all(e_fit <= 10 * floor):
        # already at the limit to working precision: converged, rate unresolved
        return ConvergenceReport(OUTCOME_CONVERGED, u_inf=u_inf, rate=np.inf,
                                 fit_r2=1.0, sample_t=ts, dist_series=dists,
                                 resid_series=resid, diagnostics=diagnostics)

    omega, r2, n_used = fit_exponential_rate(t_fit, e_fit, floor=floor)
    diagnostics.update({"fit_points": n_used})
    ok_eq = (not np.isfinite(eq_resid)) or eq_resid <= max(tol.eps_eq, 1e3 * floor)
    if omega > 0 and r2 >= 0.98 and n_used >= min(min_samples, len(t_fit)) and ok_eq:
        return ConvergenceReport(OUTCOME_CONVERGED, u_inf=u_inf, rate=omega,
                                 fit_r2=r2, sample_t=ts, dist_series=dists,
                                 resid_series=resid, diagnostics=diagnostics)
    return ConvergenceReport(OUTCOME_UNDETERMINED, u_inf=u_inf, rate=omega,
                             fit_r2=r2, sample_t=ts, dist_series=dists,
                             resid_series=resid, diagnostics=diagnostics)


def estimate_rate_vs_gap(report: ConvergenceReport, split: SpectralSplit) -> RateVsGap:
    """Compare a fitted decay rate against the spectral gap min Re sigma(A_s)."""
    if split.v_s.shape[1] == 0:
        raise NoStablePart("spectral split has no stable part")
    if report.outcome != OUTCOME_CONVERGED or report.rate is None:
        raise ValueError("rate comparison needs a Converged report")
    gap = float(np.min(np.linalg.eigvals(split.a_s).real))
    return RateVsGap(rate=float(report.rate), gap=gap)


def direction_set(n: int, count: int, seed: int = 0) -> np.ndarray:
    """A deterministic set of unit directions in R^n.

    n = 2 uses equally spaced angles; higher dimensions draw a seeded
    Gaussian sample, normalized, with the coordinate axes prepended.
    """
    if n == 2:
        ang = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    rng = np.random.default_rng(seed)
    axes = np.vstack([np.eye(n), -np.eye(n)])
    extra = rng.normal(size=(max(count - len(axes), 0), n))
    extra /= np.linalg.norm(extra, axis=1)[:, None]
    dirs = np.vstack([axes, extra])[:count]
    return dirs


def parallel_map(fn, items):
    """Map fn over items honoring the NORMSTAB_THREADS cap (default 1)."""
    workers = int(os.environ.get("NORMSTAB_THREADS", "1") or "1")
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sweep_convergence(fs: VectorFieldSpec, chart: ManifoldChart, u_star,
                      delta: float, directions, t_max: float, rho: float,
                      tol_ode: float = 1e-12,
                      tol: Tolerances = DEFAULT_TOL) -> list[dict]:
    """Assess convergence for starts u_star + delta * d over a direction set.

    Domain exits are folded into the assessment of the truncated trajectory
    (they almost always mean LeftNeighborhood).  Honors NORMSTAB_THREADS.
    """
    u_star = np.asarray(u_star, dtype=float)
    directions = np.asarray(directions, dtype=float)

    def run(d):
        u0 = u_star + delta * d
        try:
            traj = integrate(fs, u0, t_max, tol=tol_ode)
        except DomainExit as exc:
            traj = exc.trajectory
        report = assess_convergence(traj, chart, rho, tol=tol)
        return {"direction": d, "u0": u0, "report": report,
                "status": traj.status}

    return parallel_map(run, directions)
