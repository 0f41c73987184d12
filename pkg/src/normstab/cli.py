"""Command-line front end.

Subcommands mirror the library layers: ``classify`` and ``simulate`` for
fields with equilibria manifolds, ``wave find|spectrum|simulate`` for the
bistable traveling wave, ``ms symbol|modes|chart`` for the circle-interface
model, and ``examples run`` for the built-in planar studies.

Problems are described by a JSON config with exactly one ``kind``:

    {"kind": {"builtin": "Ex1"}}
    {"kind": {"polynomial": {"n": 2, "components": [[...monomials...], ...]}},
     "equilibrium": [0, 1], "chart": {"table": {"zeta": [...], "points": [[...]]}}}
    {"kind": {"wave": {"a": 0.25, "sigma_kind": "identity"}}}
    {"kind": {"ms": {"radius": 1.0, "r_out": 20.0}}}

plus an optional "tolerances" map.  Command-line flags override config
values.  Reports go to stdout as JSON, or with ``--out DIR`` as
report.json + one CSV per series + rendered PNG figures (suppress the
figures with ``--no-figures``).  Exit codes: 0 success, 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from .errors import ConfigError, DomainExit, InvalidRadius, NormstabError
from .examples_ode import BUILTIN_NAMES, builtin_problem, polar_relation_residual, lyapunov_check
from .mullins_sekerka import (
    MSConfig,
    flat_symbol_check,
    l_mode_eigenvalue,
    ms_tangent_kernel_check,
    sphere_chart,
)
from .normal_form import ManifoldChart, classify
from .odesim import assess_convergence, estimate_rate_vs_gap, integrate
from .polynomial import polynomial_field
from .report import RunReport, Series, config_sha256, report_hash, write_report
from .spectral import spectral_projections
from .tolerances import DEFAULT_TOL, Tolerances
from .wave import find_speed, saddle_rates, simulate_perturbation, wave_problem, wave_spectrum

__all__ = ["main", "cmd_classify", "cmd_simulate", "cmd_wave", "cmd_ms",
           "cmd_examples"]

_KINDS = ("builtin", "polynomial", "wave", "ms")
_GROUP_IDS = {"center": 0, "stable": 1, "unstable": 2, "inconclusive": 3}


# ---------------------------------------------------------------- config

def load_config(path) -> tuple[dict, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON: line {exc.lineno} "
            f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc, text


def _tolerances(doc: dict) -> Tolerances:
    overrides = doc.get("tolerances", {})
    if not isinstance(overrides, dict):
        raise ConfigError("'tolerances' must be an object")
    return DEFAULT_TOL.replace(**overrides)


def _kind(doc: dict) -> tuple[str, object]:
    kind = doc.get("kind")
    if not isinstance(kind, dict):
        raise ConfigError("config needs a 'kind' object")
    keys = [k for k in kind if k in _KINDS]
    unknown = [k for k in kind if k not in _KINDS]
    if unknown:
        raise ConfigError(f"unknown kind(s) {unknown}; expected one of {_KINDS}")
    if len(keys) != 1:
        raise ConfigError(f"exactly one kind must be present, got {len(keys)}")
    return keys[0], kind[keys[0]]


def _chart_from_table(tab: dict) -> ManifoldChart:
    if not isinstance(tab, dict) or "zeta" not in tab or "points" not in tab:
        raise ConfigError("chart table needs 'zeta' and 'points' arrays")
    zeta = np.asarray(tab["zeta"], dtype=float)
    pts = np.asarray(tab["points"], dtype=float)
    if zeta.ndim != 1 or len(zeta) < 4:
        raise ConfigError("chart table needs at least 4 one-dimensional "
                          "zeta samples (only m = 1 charts are serializable)")
    if np.any(np.diff(zeta) <= 0):
        raise ConfigError("chart 'zeta' values must be strictly increasing")
    if not (zeta[0] < 0.0 < zeta[-1]):
        raise ConfigError("chart 'zeta' range must contain 0")
    if pts.ndim != 2 or pts.shape[0] != len(zeta):
        raise ConfigError("'points' must be one state row per zeta sample")
    spl = CubicSpline(zeta, pts, axis=0)
    dspl = spl.derivative()

    def psi(z):
        return np.asarray(spl(float(np.atleast_1d(z)[0])), dtype=float)

    def d_psi(z):
        return np.asarray(dspl(float(np.atleast_1d(z)[0])),
                          dtype=float).reshape(-1, 1)

    radius = float(min(-zeta[0], zeta[-1]))
    return ManifoldChart(m=1, psi=psi, chart_radius=radius, d_psi=d_psi,
                         name="table")


def _field_and_chart(doc: dict):
    """(VectorFieldSpec, ManifoldChart, builtin_or_None) for classify/simulate."""
    name, payload = _kind(doc)
    if name == "builtin":
        if payload not in BUILTIN_NAMES:
            raise ConfigError(f"unknown builtin {payload!r}; "
                              f"expected one of {BUILTIN_NAMES}")
        bp = builtin_problem(payload)
        return bp.field, bp.chart, bp
    if name == "polynomial":
        fs = polynomial_field(payload)
        eq = doc.get("equilibrium")
        chart_doc = doc.get("chart")
        if chart_doc is not None:
            if isinstance(chart_doc, dict) and "builtin" in chart_doc:
                ref = chart_doc["builtin"]
                if ref not in BUILTIN_NAMES:
                    raise ConfigError(f"unknown builtin chart {ref!r}")
                chart = builtin_problem(ref).chart
            elif isinstance(chart_doc, dict) and "table" in chart_doc:
                chart = _chart_from_table(chart_doc["table"])
            else:
                raise ConfigError("'chart' must be {'builtin': name} or "
                                  "{'table': {...}}")
        elif eq is not None:
            u_star = np.asarray(eq, dtype=float)
            if u_star.shape != (fs.n,):
                raise ConfigError(f"'equilibrium' must have {fs.n} components")
            chart = ManifoldChart(m=0, psi=lambda z, u=u_star: u,
                                  chart_radius=1.0, name="point")
        else:
            raise ConfigError("polynomial kind needs 'chart' or 'equilibrium'")
        if eq is not None and chart.m > 0:
            u_star = np.asarray(eq, dtype=float)
            if (u_star.shape != chart.u_star.shape
                    or np.max(np.abs(u_star - chart.u_star)) > 1e-8):
                raise ConfigError("'equilibrium' does not sit at the chart "
                                  "base point psi(0)")
        if chart.u_star.shape != (fs.n,):
            raise ConfigError("chart dimension does not match the field")
        return fs, chart, None
    raise ConfigError(f"kind '{name}' does not support this command")


def _parse_floats(text: str, what: str, count: int | None = None) -> np.ndarray:
    try:
        vals = np.array([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated numbers, "
                          f"got {text!r}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"{what} needs exactly {count} numbers, got {len(vals)}")
    if vals.size == 0:
        raise ConfigError(f"{what} is empty")
    return vals


# ---------------------------------------------------------------- commands

def _eigen_series(classification) -> Series:
    sr = classification.spectrum
    eigs = np.asarray(sr.eigenvalues)
    gid = np.full(len(eigs), -1, dtype=int)
    # the group attributes hold indices into the sorted eigenvalue array
    for gname in ("center", "stable", "unstable", "inconclusive"):
        for idx in getattr(sr, gname):
            gid[int(idx)] = _GROUP_IDS[gname]
    data = np.column_stack([eigs.real, eigs.imag, gid.astype(float)])
    return Series(columns=["re", "im", "group"], data=data)


def cmd_classify(doc: dict, seed: int = 0, config_text: str = "") -> RunReport:
    tol = _tolerances(doc)
    fs, chart, _ = _field_and_chart(doc)
    c = classify(fs, chart, tol)
    outputs = {
        "verdict": c.verdict,
        "failed_conditions": list(c.failed),
        "dims": {"center": c.dims[0], "stable": c.dims[1],
                 "unstable": c.dims[2]},
        "u_star": c.u_star,
        "a0": c.a0,
        "kernel": {"dim": c.kernel.kernel_dim, "semisimple": c.kernel.semisimple,
                   "margin": c.kernel.margin,
                   "basis": c.kernel.basis},
        "tangent": {"contained": c.tangent.contained, "equal": c.tangent.equal,
                    "tangent_dim": c.tangent.tangent_dim,
                    "kernel_dim": c.tangent.kernel_dim,
                    "max_angle": (float(np.max(c.tangent.angles))
                                  if np.size(c.tangent.angles) else 0.0)},
        "diagnostics": c.diagnostics,
    }
    return RunReport(command="classify", outputs=outputs,
                     series={"eigenvalues": _eigen_series(c)},
                     tolerances=tol, seed=seed,
                     config_sha256=config_sha256(config_text))


def cmd_simulate(doc: dict, u0: np.ndarray, t_max: float, rho: float,
                 ode_tol: float = 1e-10, seed: int = 0,
                 config_text: str = "") -> RunReport:
    tol = _tolerances(doc)
    fs, chart, _ = _field_and_chart(doc)
    if u0.shape != (fs.n,):
        raise ConfigError(f"--u0 needs {fs.n} components, got {len(u0)}")
    status = "completed"
    try:
        traj = integrate(fs, u0, t_max=t_max, tol=ode_tol)
    except DomainExit as exc:
        if exc.trajectory is None:
            raise
        traj, status = exc.trajectory, "domain_exit"
    rep = assess_convergence(traj, chart, rho=rho, tol=tol)

    ratio = None
    c = classify(fs, chart, tol)
    if c.verdict != "Inconclusive" and rep.outcome == "Converged":
        split = spectral_projections(c.a0, tol=tol)
        if split.dims[1] > 0 and np.isfinite(rep.rate):
            ratio = estimate_rate_vs_gap(rep, split).ratio

    states = traj.sample(rep.sample_t)
    cols = ["t"] + [f"u{i}" for i in range(fs.n)] + ["dist"]
    data = np.column_stack([rep.sample_t, states, rep.dist_series])
    outputs = {
        "outcome": rep.outcome,
        "status": status,
        "verdict": c.verdict,
        "u_inf": rep.u_inf,
        "rate": rep.rate,
        "fit_r2": rep.fit_r2,
        "rate_over_gap": ratio,
        "t_exit": rep.t_exit,
        "t_end": traj.t_end,
        "rho": rho,
        "diagnostics": rep.diagnostics,
    }
    return RunReport(command="simulate", outputs=outputs,
                     series={"trajectory": Series(columns=cols, data=data)},
                     tolerances=tol, seed=seed,
                     config_sha256=config_sha256(config_text))


def _wave_params(args, doc: dict) -> dict:
    conf = {}
    if doc:
        name, payload = _kind(doc)
        if name != "wave":
            raise ConfigError(f"wave commands need a wave config, got kind "
                              f"'{name}'")
        if not isinstance(payload, dict):
            raise ConfigError("wave kind must be an object")
        unknown = set(payload) - {"a", "sigma_kind", "sigma_params"}
        if unknown:
            raise ConfigError(f"unknown wave config fields {sorted(unknown)}")
        conf = payload
    sigma_params = conf.get("sigma_params", {})
    if not isinstance(sigma_params, dict):
        raise ConfigError("'sigma_params' must be an object")
    return {
        "a": args.a if args.a is not None else conf.get("a", 0.25),
        "sigma_kind": args.sigma if args.sigma is not None
        else conf.get("sigma_kind", "identity"),
        "c": args.sigma_c if args.sigma_c is not None
        else sigma_params.get("c", 0.1),
    }


def cmd_wave(subcommand: str, params: dict, seed: int = 0,
             config_text: str = "") -> RunReport:
    tol = params["tol"]
    wp = wave_problem(params["a"], params["sigma_kind"], c=params["c"])
    v_star, profile = find_speed(wp, bracket=params["bracket"])
    lam_left, lam_right = saddle_rates(wp, v_star)
    base = {
        "a": wp.a, "sigma_kind": wp.kind, "v_star": v_star,
        "lam_left": lam_left, "lam_right": lam_right,
    }

    if subcommand == "find":
        plot_l = params["plot_length"]
        s = np.linspace(-plot_l, plot_l, 1201)
        series = {"profile": Series(columns=["s", "w", "z"],
                                    data=np.column_stack([s, profile.w(s),
                                                          profile.z(s)]))}
        base.update({
            "s_matching": [profile.s_lo, profile.s_hi],
            "saddle_miss": profile.diagnostics.get("miss"),
            "bisections": profile.diagnostics.get("n_bisect"),
        })
        return RunReport(command="wave find", outputs=base, series=series,
                         tolerances=tol, seed=seed,
                         config_sha256=config_sha256(config_text))

    half_length, n_interior = params["half_length"], params["n_interior"]
    if subcommand == "spectrum":
        sp = wave_spectrum(profile, wp, half_length, n_interior, tol=tol)
        lam = np.asarray(sp.eigenvalues)
        series = {"spectrum": Series(
            columns=["index", "re", "im"],
            data=np.column_stack([np.arange(len(lam)), np.real(lam),
                                  np.imag(lam)]))}
        base.update({
            "zero_mode_gap": sp.zero_mode_gap,
            "zero_mode_correlation": sp.zero_mode_correlation,
            "stable_margin": sp.stable_margin,
            "essential_bound": sp.essential_bound,
            "route": sp.route,
            "below_bound": sp.below_bound,
            "bound_violations": sp.bound_violations,
            "half_length": half_length,
            "n_interior": n_interior,
        })
        return RunReport(command="wave spectrum", outputs=base, series=series,
                         tolerances=tol, seed=seed,
                         config_sha256=config_sha256(config_text))

    if subcommand == "simulate":
        sim = simulate_perturbation(profile, wp, half_length, n_interior,
                                    v0=params["amplitude"],
                                    t_max=params["t_max"], tol=tol)
        series = {"decay": Series(
            columns=["t", "resid_l2", "resid_sup", "alpha"],
            data=np.column_stack([sim.times, sim.resid_l2, sim.resid_sup,
                                  sim.alpha]))}
        base.update({
            "rate": sim.rate,
            "fit_r2": sim.fit_r2,
            "final_resid_l2": sim.final_resid_l2,
            "final_resid_sup": sim.final_resid_sup,
            "alpha_hat": sim.diagnostics.get("alpha_final"),
            "amplitude": params["amplitude"],
            "t_max": params["t_max"],
            "half_length": half_length,
            "n_interior": n_interior,
            "fit_window": sim.diagnostics.get("fit_window"),
        })
        return RunReport(command="wave simulate", outputs=base, series=series,
                         tolerances=tol, seed=seed,
                         config_sha256=config_sha256(config_text))
    raise ConfigError(f"unknown wave subcommand {subcommand!r}")


def _ms_config(args, doc: dict) -> MSConfig:
    conf = {}
    if doc:
        name, payload = _kind(doc)
        if name != "ms":
            raise ConfigError(f"ms commands need an ms config, got kind "
                              f"'{name}'")
        if not isinstance(payload, dict):
            raise ConfigError("ms kind must be an object")
        fields = {"radius", "r_out", "radial_grid", "strip_height", "strip_grid"}
        unknown = set(payload) - fields
        if unknown:
            raise ConfigError(f"unknown ms config fields {sorted(unknown)}")
        conf = dict(payload)
    for flag in ("radius", "r_out", "radial_grid", "strip_height", "strip_grid"):
        v = getattr(args, flag, None)
        if v is not None:
            conf[flag] = v
    try:
        return MSConfig(**conf)
    except (InvalidRadius, TypeError) as exc:
        raise ConfigError(f"invalid ms configuration: {exc}") from exc


def cmd_ms(subcommand: str, params: dict, seed: int = 0,
           config_text: str = "") -> RunReport:
    tol = params["tol"]
    cfg: MSConfig = params["cfg"]
    geom = {"radius": cfg.radius, "r_out": cfg.r_out,
            "radial_grid": cfg.radial_grid}

    if subcommand == "symbol":
        fr = flat_symbol_check(params["xi"], cfg)
        series = {"symbol": Series(
            columns=["xi", "jump", "symbol", "target", "rel_error",
                     "conv_ratio"],
            data=np.column_stack([fr.xi, fr.jump, fr.symbol, fr.target,
                                  fr.rel_error, fr.conv_ratio]))}
        outputs = {"max_rel_error": fr.max_rel_error,
                   "strip_height": fr.strip_height,
                   "strip_grid": fr.strip_grid,
                   "order_estimate": fr.order_estimate}
        return RunReport(command="ms symbol", outputs=outputs, series=series,
                         tolerances=tol, seed=seed,
                         config_sha256=config_sha256(config_text))

    if subcommand == "modes":
        reports = [l_mode_eigenvalue(k, cfg) for k in range(params["k_max"] + 1)]
        lam = np.array([r.eigenvalue for r in reports])
        scale = max(1.0, float(np.max(np.abs(lam))))
        kernel_dim = sum(1 if r.k == 0 else 2 for r in reports
                         if abs(r.eigenvalue) <= tol.gap * scale)
        series = {"modes": Series(
            columns=["k", "eigenvalue", "dtn_jump", "curvature_coeff"],
            data=np.column_stack([[r.k for r in reports], lam,
                                  [r.dtn_jump for r in reports],
                                  [r.curvature_coeff for r in reports]]))}
        outputs = {**geom, "k_max": params["k_max"], "kernel_dim": kernel_dim,
                   "eigenvalues": lam}
        return RunReport(command="ms modes", outputs=outputs, series=series,
                         tolerances=tol, seed=seed,
                         config_sha256=config_sha256(config_text))

    if subcommand == "chart":
        ch = sphere_chart(cfg)
        z = params["z"]
        theta = np.linspace(0.0, 2.0 * np.pi, 361)
        rho = ch.rho(z, theta)
        linearized = ch.d_rho0(theta) @ z
        rho_at_zero = float(np.max(np.abs(ch.rho(np.zeros(3), theta))))
        deriv_err = float(np.max(np.abs(ch.fd_jacobian(theta)
                                        - ch.d_rho0(theta))))
        tk = ms_tangent_kernel_check(cfg, tol=tol)
        series = {"chart": Series(
            columns=["theta", "rho", "linearized"],
            data=np.column_stack([theta, rho, linearized]))}
        outputs = {**geom, "z": z, "rho_at_zero": rho_at_zero,
                   "derivative_max_err": deriv_err,
                   "tangent_kernel": {
                       "contained": tk.contained, "equal": tk.equal,
                       "tangent_dim": tk.tangent_dim,
                       "kernel_dim": tk.kernel_dim,
                       "max_angle": (float(np.max(tk.angles))
                                     if np.size(tk.angles) else 0.0)}}
        return RunReport(command="ms chart", outputs=outputs, series=series,
                         tolerances=tol, seed=seed,
                         config_sha256=config_sha256(config_text))
    raise ConfigError(f"unknown ms subcommand {subcommand!r}")


_EXAMPLE_RUNS = {
    "Ex1": {"u0": (0.0, 1.5), "t_max": 12.0},
    "Ex2m1": {"u0": (0.0, 1.5), "t_max": 400.0},
    "Ex2m2": {"u0": (0.0, 1.5), "t_max": 400.0},
    "Hyperbolic3D": {"u0": (0.0, 1.0, 0.3), "t_max": 20.0},
}


def cmd_examples(name: str, t_max: float | None = None, seed: int = 0,
                 tol: Tolerances = DEFAULT_TOL,
                 config_text: str = "") -> RunReport:
    if name not in BUILTIN_NAMES:
        raise ConfigError(f"unknown example {name!r}; expected one of "
                          f"{BUILTIN_NAMES}")
    bp = builtin_problem(name)
    run = _EXAMPLE_RUNS[name]
    horizon = t_max if t_max is not None else run["t_max"]
    c = classify(bp.field, bp.chart, tol)
    traj = integrate(bp.field, np.array(run["u0"]), t_max=horizon, tol=1e-12)

    ts = np.linspace(traj.t[0], traj.t_end, 800)
    states = traj.sample(ts)
    r = np.hypot(states[:, 0], states[:, 1])
    cols = ["t"] + [f"u{i}" for i in range(bp.field.n)] + ["r"]
    series = {"orbit": Series(columns=cols,
                              data=np.column_stack([ts, states, r]))}
    outputs = {
        "name": name,
        "verdict": c.verdict,
        "failed_conditions": list(c.failed),
        "u0": list(run["u0"]),
        "t_max": horizon,
        "r_initial": float(r[0]),
        "r_final": float(r[-1]),
    }

    if bp.relation is not None:
        rel = polar_relation_residual(traj, bp.relation)
        dev = rel.theta - bp.relation.g(rel.r) - rel.c0
        series["relation"] = Series(columns=["t", "deviation"],
                                    data=np.column_stack([rel.t, dev]))
        outputs["relation"] = {"kind": bp.relation.kind,
                               "residual_max": rel.residual_max,
                               "c0": rel.c0,
                               "description": bp.relation.description}
        lp = lyapunov_check(traj)
        outputs["lyapunov"] = {"max_increase": lp.max_increase,
                               "initial": lp.initial, "final": lp.final}
    else:
        rep = assess_convergence(traj, bp.chart, rho=0.5, tol=tol)
        outputs["convergence"] = {"outcome": rep.outcome, "rate": rep.rate,
                                  "fit_r2": rep.fit_r2}
    return RunReport(command="examples run", outputs=outputs, series=series,
                     tolerances=tol, seed=seed,
                     config_sha256=config_sha256(config_text))


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="normstab",
        description="Stability classification near manifolds of equilibria.")
    p.add_argument("--version", action="version",
                   version=f"normstab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR",
                        help="write report.json, CSV series and figures here "
                             "(default: JSON to stdout)")
    common.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering when --out is given")
    common.add_argument("--seed", type=int, default=0,
                        help="seed recorded in provenance and used by any "
                             "randomized sweep (default 0)")
    common.add_argument("--config", metavar="FILE",
                        help="JSON problem configuration")

    pc = sub.add_parser("classify", parents=[common],
                        help="classify the equilibrium at the chart base point")
    pc.set_defaults(need_config=True)

    ps = sub.add_parser("simulate", parents=[common],
                        help="integrate one start and assess convergence")
    ps.add_argument("--u0", required=True,
                    help="comma-separated initial state")
    ps.add_argument("--t-max", type=float, default=20.0)
    ps.add_argument("--rho", type=float, default=0.5,
                    help="neighborhood radius for the dichotomy verdict")
    ps.add_argument("--ode-tol", type=float, default=1e-10)
    ps.set_defaults(need_config=True)

    pw = sub.add_parser("wave", help="bistable traveling-wave analyses")
    ws = pw.add_subparsers(dest="wave_cmd", required=True)
    wave_common = argparse.ArgumentParser(add_help=False)
    wave_common.add_argument("--a", type=float, default=None,
                             help="bistable parameter in (0, 1/2)")
    wave_common.add_argument("--sigma", default=None,
                             choices=["identity", "linear", "tanh"])
    wave_common.add_argument("--sigma-c", type=float, default=None,
                             help="flux parameter for linear/tanh kinds")
    wave_common.add_argument("--bracket", default="0,2",
                             help="speed bracket lo,hi for the bisection")
    wf = ws.add_parser("find", parents=[common, wave_common],
                       help="find the connecting speed and profile")
    wf.add_argument("--plot-length", type=float, default=30.0)
    for nm, hlp in (("spectrum", "discretized linearization spectrum"),
                    ("simulate", "moving-frame perturbation decay")):
        wp_ = ws.add_parser(nm, parents=[common, wave_common], help=hlp)
        wp_.add_argument("--half-length", type=float, default=40.0)
        wp_.add_argument("--n", dest="n_interior", type=int, default=2000)
        if nm == "simulate":
            wp_.add_argument("--t-max", type=float, default=40.0)
            wp_.add_argument("--amplitude", type=float, default=0.01)

    pm = sub.add_parser("ms", help="circle-interface model analyses")
    mss = pm.add_subparsers(dest="ms_cmd", required=True)
    ms_common = argparse.ArgumentParser(add_help=False)
    for flag, typ in (("radius", float), ("r-out", float),
                      ("radial-grid", int), ("strip-height", float),
                      ("strip-grid", int)):
        ms_common.add_argument(f"--{flag}", type=typ, default=None)
    msy = mss.add_parser("symbol", parents=[common, ms_common],
                         help="flat-interface symbol check")
    msy.add_argument("--xi", default="0.5,1,2,4",
                     help="comma-separated frequencies")
    msm = mss.add_parser("modes", parents=[common, ms_common],
                         help="per-mode relaxation rates on the circle")
    msm.add_argument("--k-max", type=int, default=6)
    msc = mss.add_parser("chart", parents=[common, ms_common],
                         help="nearby-circles chart sampling and checks")
    msc.add_argument("--z", default="0.05,0.02,-0.03",
                     help="chart coordinates z0,z1,z2")

    pe = sub.add_parser("examples", help="built-in planar studies")
    es = pe.add_subparsers(dest="examples_cmd", required=True)
    er = es.add_parser("run", parents=[common],
                       help="run one builtin example end to end")
    er.add_argument("name", choices=list(BUILTIN_NAMES))
    er.add_argument("--t-max", type=float, default=None)
    return p


def _dispatch(args) -> RunReport:
    doc, text = ({}, "")
    if getattr(args, "config", None):
        doc, text = load_config(args.config)
    elif getattr(args, "need_config", False):
        raise ConfigError("this command requires --config")
    seed = getattr(args, "seed", 0)

    if args.command == "classify":
        return cmd_classify(doc, seed=seed, config_text=text)
    if args.command == "simulate":
        u0 = _parse_floats(args.u0, "--u0")
        return cmd_simulate(doc, u0, t_max=args.t_max, rho=args.rho,
                            ode_tol=args.ode_tol, seed=seed, config_text=text)
    if args.command == "wave":
        params = _wave_params(args, doc)
        params["tol"] = _tolerances(doc)
        bracket = _parse_floats(args.bracket, "--bracket", count=2)
        params["bracket"] = (float(bracket[0]), float(bracket[1]))
        if args.wave_cmd == "find":
            params["plot_length"] = args.plot_length
        else:
            params["half_length"] = args.half_length
            params["n_interior"] = args.n_interior
        if args.wave_cmd == "simulate":
            params["t_max"] = args.t_max
            params["amplitude"] = args.amplitude
        return cmd_wave(args.wave_cmd, params, seed=seed, config_text=text)
    if args.command == "ms":
        params = {"tol": _tolerances(doc), "cfg": _ms_config(args, doc)}
        if args.ms_cmd == "symbol":
            params["xi"] = _parse_floats(args.xi, "--xi")
        elif args.ms_cmd == "modes":
            if args.k_max < 0:
                raise ConfigError("--k-max must be >= 0")
            params["k_max"] = args.k_max
        elif args.ms_cmd == "chart":
            params["z"] = _parse_floats(args.z, "--z", count=3)
        return cmd_ms(args.ms_cmd, params, seed=seed, config_text=text)
    if args.command == "examples":
        return cmd_examples(args.name, t_max=args.t_max, seed=seed,
                            tol=_tolerances(doc), config_text=text)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NormstabError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3

    if getattr(args, "out", None):
        paths = write_report(report, args.out)
        if not args.no_figures:
            from . import figures      # matplotlib import only when needed

            paths += figures.render(report, args.out)
        for p in paths:
            print(f"wrote {p}")
        print(f"report sha256 (volatile fields excluded): "
              f"{report_hash(report.as_dict(inline_series=False))}")
    else:
        sys.stdout.write(report.to_json(inline_series=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
