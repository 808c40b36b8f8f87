"""Figure rendering for CLI report paths.

Every helper takes the data it plots plus a target file path, draws with
the Agg backend, and returns the path written. Figures sit alongside the
delimited outputs; nothing here is consumed programmatically.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_ensemble_plot",
    "save_loss_plot",
    "save_herding_plot",
    "save_probe_plot",
    "save_suite_plot",
]


def _finish(fig, out_path) -> str:
    fig.tight_layout()
    fig.savefig(out_path, dpi=110, metadata={})
    plt.close(fig)
    return str(out_path)


def save_ensemble_plot(ensemble, out_path, title="generated paths") -> str:
    """Spaghetti plot of the first state coordinate; jumps marked."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for path in ensemble:
        ax.plot(path.times, path.values[:, 0], lw=0.9, alpha=0.8)
        if path.jump_flags.any():
            j = path.jump_flags
            ax.scatter(
                path.times[j], path.values[j, 0], s=12, color="crimson", zorder=3
            )
    ax.set_xlabel("t")
    ax.set_ylabel("x1")
    ax.set_title(title)
    return _finish(fig, out_path)


def save_loss_plot(times, loss_trace, dissipation_trace, out_path) -> str:
    """Loss curve over the run plus the dissipation decomposition."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].plot(times, loss_trace, lw=1.2)
    axes[0].set_xlabel("s")
    axes[0].set_ylabel("J")
    axes[0].set_title("one-step loss")
    arr = np.asarray(dissipation_trace)
    if len(arr):
        axes[1].plot(times, arr[:, 0], label="continuous", lw=1.0)
        axes[1].plot(times, arr[:, 1], label="jump", lw=1.0)
        axes[1].plot(times, arr[:, 2], label="residual", lw=1.0)
        axes[1].legend(fontsize=8)
    axes[1].set_xlabel("s")
    axes[1].set_title("dissipation terms")
    return _finish(fig, out_path)


def save_herding_plot(error_trace, out_path, r_max=None) -> str:
    """Log-log herding error with the R/sqrt(k) guide."""
    errs = np.asarray(error_trace, dtype=float)
    ks = np.arange(1, len(errs) + 1)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.loglog(ks, errs, lw=1.2, label="|E_k|")
    if r_max is not None and r_max > 0:
        ax.loglog(ks, r_max / np.sqrt(ks), "--", lw=1.0, label="R/sqrt(k)")
    ax.set_xlabel("k")
    ax.set_ylabel("whitened error")
    ax.legend(fontsize=8)
    ax.set_title("herding decay")
    return _finish(fig, out_path)


def save_probe_plot(rows, out_path) -> str:
    """Projection error against the spectral-tail bound."""
    rows = list(rows)
    ms = [r[0] for r in rows]
    eps = [r[1] for r in rows]
    tails = [np.sqrt(max(r[2], 0.0)) for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.semilogy(ms, np.maximum(eps, 1e-300), marker="o", lw=1.0, label="eps_proj")
    ax.semilogy(
        ms, np.maximum(tails, 1e-300), marker="s", lw=1.0, label="sqrt(tail)"
    )
    ax.set_xlabel("m'")
    ax.legend(fontsize=8)
    ax.set_title("projection error vs spectral tail")
    return _finish(fig, out_path)


def save_suite_plot(rows, out_path) -> str:
    """Pass/fail bar chart over the criteria battery."""
    rows = list(rows)
    names = [r["name"] for r in rows]
    passed = [bool(r["passed"]) for r in rows]
    colors = ["seagreen" if p else "crimson" for p in passed]
    fig, ax = plt.subplots(figsize=(7, 0.45 * len(rows) + 1.2))
    ax.barh(range(len(rows)), [1.0] * len(rows), color=colors, alpha=0.85)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xticks([])
    ax.invert_yaxis()
    ax.set_title("acceptance battery")
    return _finish(fig, out_path)
