"""Figures written next to the CSV/JSON reports.

Figures are built on bare :class:`matplotlib.figure.Figure` objects with the
Agg canvas, so no interactive backend or global pyplot state is touched.
PNG metadata is stripped to keep files reproducible.
"""

from __future__ import annotations

import math
import os

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

__all__ = [
    "new_figure",
    "save_figure",
    "step_xy",
    "plot_simulation",
    "plot_orbit",
    "plot_scan",
    "plot_spectral",
    "plot_discontinuity",
]


def new_figure(nrows=1, ncols=1, width=6.0, height=None):
    """Figure and axes with the package defaults (golden-ratio height)."""
    if height is None:
        height = width * (math.sqrt(5) - 1.0) / 2.0
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols, squeeze=False)
    for ax in axes.flat:
        ax.tick_params(labelsize=8)
        ax.grid(True, alpha=0.3, linewidth=0.5)
    return fig, axes


def save_figure(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    return path


def step_xy(profile):
    """Coordinates drawing a left-continuous step profile over (0, 1]."""
    edges = np.concatenate([[0.0], profile.boundaries])
    x = np.repeat(edges, 2)[1:-1]
    y = np.repeat(profile.levels, 2)
    return x, y


def plot_simulation(sim, path, reference=None):
    """L1 change per cycle, return times and the final profile."""
    fig, axes = new_figure(3, 1, width=6.0, height=7.5)
    ax0, ax1, ax2 = axes[:, 0]
    k = np.arange(len(sim.distances))
    dist = np.asarray(sim.distances)
    positive = dist > 0
    if positive.any():
        ax0.semilogy(k[positive], dist[positive], ".-", color="C0")
    ax0.set_xlabel("cycle")
    ax0.set_ylabel(r"$\|u_{k+1}-u_k\|_1$")
    for c, _, _ in sim.merge_events:
        ax0.axvline(c, color="C3", alpha=0.4, linewidth=0.8)
    ax1.plot(k, [c.return_time for c in sim.cycles], ".-", color="C1")
    ax1.set_xlabel("cycle")
    ax1.set_ylabel("return time")
    x, y = step_xy(sim.final_profile)
    ax2.plot(x, y, color="C2", label="final profile")
    if reference is not None:
        xr, yr = step_xy(reference)
        ax2.plot(xr, yr, "--", color="k", label="periodic profile")
    ax2.set_xlabel("cell x")
    ax2.set_ylabel("level u(x)")
    ax2.set_xlim(0, 1)
    ax2.legend(loc="upper left", frameon=False)
    return save_figure(fig, path)


def plot_orbit(orbit, path):
    fig, axes = new_figure()
    ax = axes[0, 0]
    x, y = step_xy(orbit.profile)
    ax.plot(x, y, color="C0")
    ax.set_title(f"{orbit.branch} branch, period {orbit.period:.6g}")
    ax.set_xlabel("cell x")
    ax.set_ylabel("level u(x)")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.05)
    return save_figure(fig, path)


def plot_scan(scan, path):
    fig, axes = new_figure()
    ax = axes[0, 0]
    eps = [r.epsilon for r in scan.rows if r.exists]
    per = [r.period for r in scan.rows if r.exists]
    ax.plot(eps, per, "o-", color="C0", label="period")
    missing = [r.epsilon for r in scan.rows if not r.exists]
    if missing:
        ax.plot(missing, [min(per) if per else 1.0] * len(missing), "x",
                color="C3", label="no orbit")
    bound = scan.rows[0].bound
    if math.isfinite(bound):
        ax.axvline(bound, color="k", linestyle="--", linewidth=0.8, label="existence bound")
    ax.set_xlabel(r"coupling $\epsilon$")
    ax.set_ylabel("period")
    ax.legend(frameon=False)
    return save_figure(fig, path)


def plot_spectral(estimate, path):
    fig, axes = new_figure()
    ax = axes[0, 0]
    vals = [v for _, v in estimate.samples]
    ax.hist(vals, bins=min(40, max(5, len(vals) // 5)), color="C0", alpha=0.8)
    ax.axvline(estimate.ratio_bound, color="k", linestyle="--", label="ratio bound")
    if estimate.empirical_rho is not None:
        ax.axvline(estimate.empirical_rho, color="C3", label="empirical rate")
    ax.set_xlabel(r"SpecRad$(\prod A)^{1/k}$")
    ax.set_ylabel("count")
    ax.legend(frameon=False)
    return save_figure(fig, path)


def plot_discontinuity(demo, x1, path):
    fig, axes = new_figure()
    ax = axes[0, 0]
    ax.step([0, 0.5 * x1, x1], [demo.times[0], demo.times[0], demo.times[1]],
            where="pre", color="C0", label="perturbed")
    ax.hlines(demo.limits[0], 0, 0.5 * x1, colors="k", linestyles="--", label="predicted limit")
    ax.hlines(demo.limits[1], 0.5 * x1, x1, colors="k", linestyles="--")
    ax.hlines(demo.base_times[0], 0, x1, colors="C3", linestyles=":", label="unperturbed")
    ax.set_xlabel("cell x")
    ax.set_ylabel("first firing time")
    ax.legend(frameon=False)
    return save_figure(fig, path)
