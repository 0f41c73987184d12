"""PNG renderings of run reports.

One entry point, ``render(report, out_dir)``, dispatching on the report's
command.  Figures are built purely from the report's series and outputs so
a saved report can be re-rendered later.  The Agg backend keeps this safe
in headless runs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["render"]

_GROUP_NAMES = {0: "center", 1: "stable", 2: "unstable", 3: "inconclusive"}
_GROUP_COLORS = {0: "tab:green", 1: "tab:blue", 2: "tab:red", 3: "tab:orange"}


def _save(fig, out_dir: Path, name: str, written: list):
    path = out_dir / name
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)


def _fig_classify(report, out_dir, written):
    s = report.series.get("eigenvalues")
    if s is None:
        return
    data = s.data
    fig, ax = plt.subplots(figsize=(5, 4))
    groups = data[:, 2].astype(int)
    for g in sorted(set(groups)):
        sel = groups == g
        ax.scatter(data[sel, 0], data[sel, 1], s=60,
                   color=_GROUP_COLORS.get(g, "gray"),
                   label=_GROUP_NAMES.get(g, str(g)), zorder=3)
    ax.axvline(0.0, color="k", lw=0.6)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"spectrum of A0: {report.outputs.get('verdict', '')}")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, out_dir, "eigenvalues.png", written)


def _fig_simulate(report, out_dir, written):
    s = report.series.get("trajectory")
    if s is None:
        return
    t = s.data[:, 0]
    dist = s.data[:, -1]
    states = s.data[:, 1:-1]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    pos = dist > 0
    if np.any(pos):
        ax1.semilogy(t[pos], dist[pos], color="tab:blue")
    ax1.set_xlabel("t")
    ax1.set_ylabel("distance to manifold")
    ax1.set_title(report.outputs.get("outcome", ""))
    ax1.grid(alpha=0.3)
    for i in range(states.shape[1]):
        ax2.plot(t, states[:, i], label=f"u[{i}]")
    ax2.set_xlabel("t")
    ax2.legend(fontsize=8)
    ax2.grid(alpha=0.3)
    _save(fig, out_dir, "trajectory.png", written)


def _fig_wave_find(report, out_dir, written):
    s = report.series.get("profile")
    if s is None:
        return
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(s.data[:, 0], s.data[:, 1], label="w")
    ax.plot(s.data[:, 0], s.data[:, 2], label="w'")
    v = report.outputs.get("v_star")
    ax.set_title(f"traveling wave, V = {v:.6f}" if v is not None else "profile")
    ax.set_xlabel("s")
    ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, out_dir, "profile.png", written)


def _fig_wave_spectrum(report, out_dir, written):
    s = report.series.get("spectrum")
    if s is None:
        return
    lam = s.data[:, 1]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(np.arange(len(lam)), np.sort(lam), ".", ms=3)
    b = report.outputs.get("essential_bound")
    if b is not None:
        ax.axhline(b, color="tab:red", lw=1,
                   label=f"essential bound {b:.3f}")
        ax.legend(fontsize=8)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.set_title("linearization spectrum (decaying convention)")
    ax.grid(alpha=0.3)
    _save(fig, out_dir, "spectrum.png", written)


def _fig_wave_simulate(report, out_dir, written):
    s = report.series.get("decay")
    if s is None:
        return
    t = s.data[:, 0]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.semilogy(t, s.data[:, 1], label="grid L2")
    ax1.semilogy(t, s.data[:, 2], label="sup")
    rate = report.outputs.get("rate")
    if rate is not None and np.isfinite(rate):
        ax1.set_title(f"distance to nearest translate, rate {rate:.4f}")
    ax1.set_xlabel("t")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.plot(t, s.data[:, 3], color="tab:purple")
    ax2.set_xlabel("t")
    ax2.set_ylabel("fitted shift alpha")
    ax2.grid(alpha=0.3)
    _save(fig, out_dir, "decay.png", written)


def _fig_ms_symbol(report, out_dir, written):
    s = report.series.get("symbol")
    if s is None:
        return
    xi = s.data[:, 0]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.loglog(xi, s.data[:, 2], "o", label="computed")
    ax1.loglog(xi, s.data[:, 3], "-", label="2|xi|^3")
    ax1.set_xlabel("xi")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3, which="both")
    ax2.loglog(xi, s.data[:, 4], "s-", color="tab:red")
    ax2.set_xlabel("xi")
    ax2.set_ylabel("relative error")
    ax2.grid(alpha=0.3, which="both")
    _save(fig, out_dir, "symbol.png", written)


def _fig_ms_modes(report, out_dir, written):
    s = report.series.get("modes")
    if s is None:
        return
    k = s.data[:, 0]
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(k, s.data[:, 1], "o-", label="computed")
    r = report.outputs.get("radius", 1.0)
    kk = np.linspace(0, k.max(), 200)
    ax.plot(kk, 2 * kk * (kk ** 2 - 1) / r ** 3, "--", lw=1,
            label="unbounded-exterior limit")
    ax.set_xlabel("mode k")
    ax.set_ylabel("relaxation rate")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, out_dir, "modes.png", written)


def _fig_ms_chart(report, out_dir, written):
    s = report.series.get("chart")
    if s is None:
        return
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(s.data[:, 0], s.data[:, 1], label="rho(theta)")
    if s.data.shape[1] > 2:
        ax.plot(s.data[:, 0], s.data[:, 2], "--", label="linearized")
    ax.set_xlabel("theta")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, out_dir, "chart.png", written)


def _fig_examples(report, out_dir, written):
    orbit = report.series.get("orbit")
    rel = report.series.get("relation")
    fig, axes = plt.subplots(1, 2 if rel is not None else 1,
                             figsize=(9 if rel is not None else 5, 3.8),
                             squeeze=False)
    ax = axes[0][0]
    if orbit is not None:
        ax.plot(orbit.data[:, 1], orbit.data[:, 2], lw=0.9)
        th = np.linspace(0, 2 * np.pi, 300)
        ax.plot(np.sin(th), np.cos(th), "k--", lw=0.8)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(report.outputs.get("name", "orbit"))
        ax.grid(alpha=0.3)
    if rel is not None:
        ax2 = axes[0][1]
        ax2.plot(rel.data[:, 0], rel.data[:, 1], lw=0.9)
        ax2.set_xlabel("t")
        ax2.set_ylabel("relation deviation")
        ax2.grid(alpha=0.3)
    _save(fig, out_dir, "orbit.png", written)


_DISPATCH = {
    "classify": _fig_classify,
    "simulate": _fig_simulate,
    "wave find": _fig_wave_find,
    "wave spectrum": _fig_wave_spectrum,
    "wave simulate": _fig_wave_simulate,
    "ms symbol": _fig_ms_symbol,
    "ms modes": _fig_ms_modes,
    "ms chart": _fig_ms_chart,
    "examples run": _fig_examples,
}


def render(report, out_dir) -> list:
    """Write the figures for a report into out_dir; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    fn = _DISPATCH.get(report.command)
    if fn is not None:
        fn(report, out_dir, written)
    return written
