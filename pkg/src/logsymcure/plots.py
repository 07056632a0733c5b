"""Matplotlib figure rendering for the CLI report path.

Figures are written next to the delimited outputs; all rendering goes
through the Agg backend so no display is required.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .kaplan_meier import KMCurve

__all__ = ["plot_km", "plot_km_overlay", "save_figure"]

_FIGSIZE = (6.4, 4.2)


def _step_xy(curve: KMCurve, t_max: float):
    """Right-continuous step coordinates starting at (0, 1)."""
    if curve.times.size == 0:
        return np.array([0.0, t_max]), np.array([1.0, 1.0])
    x = np.concatenate([[0.0], curve.times, [t_max]])
    y = np.concatenate([[1.0], curve.survival, [curve.survival[-1]]])
    return x, y


def plot_km(curves: dict[str, KMCurve], path, title="Kaplan-Meier estimate"):
    """Step plot of one or more product-limit curves."""
    t_max = max(
        (float(c.times[-1]) for c in curves.values() if c.times.size), default=1.0
    )
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for label, curve in sorted(curves.items()):
        x, y = _step_xy(curve, t_max)
        ax.step(x, y, where="post", label=label)
    ax.set_xlabel("time")
    ax.set_ylabel("survival probability")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    if len(curves) > 1:
        ax.legend()
    save_figure(fig, path)


def plot_km_overlay(
    curves: dict[str, KMCurve],
    fitted: dict[str, tuple[np.ndarray, np.ndarray]],
    path,
    title="Kaplan-Meier vs fitted survival",
):
    """Empirical step curves with fitted population-survival overlays."""
    t_max = max(
        (float(c.times[-1]) for c in curves.values() if c.times.size), default=1.0
    )
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for label, curve in sorted(curves.items()):
        x, y = _step_xy(curve, t_max)
        (line,) = ax.step(x, y, where="post", alpha=0.6, label=f"{label} (empirical)")
        if label in fitted:
            grid, sp = fitted[label]
            ax.plot(grid, sp, color=line.get_color(), label=f"{label} (fitted)")
    ax.set_xlabel("time")
    ax.set_ylabel("survival probability")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    ax.legend(fontsize=8)
    save_figure(fig, path)


def save_figure(fig, path):
    """Write a PNG without volatile metadata, for reproducible outputs."""
    fig.savefig(path, dpi=120, metadata={"Software": "logsymcure"})
    plt.close(fig)
