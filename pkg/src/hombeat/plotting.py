"""Figures written next to the CLI tables.

Uses the non-interactive Agg backend and strips file metadata so that
repeated runs produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
    "svg.hashsalt": "hombeat",
}


def _save(fig, path):
    path = str(path)
    metadata = None
    if path.endswith(".png"):
        metadata = {"Software": None}
    elif path.endswith((".pdf", ".svg")):
        metadata = {"Creator": None, "Date": None} if path.endswith(".pdf") else {"Date": None}
    fig.savefig(path, metadata=metadata)
    plt.close(fig)


def fringe_figure(path, tau, p_coinc, simulated=None):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(tau, p_coinc, color="k", label="model")
        if simulated is not None:
            ax.plot(tau, simulated, ".", color="tab:blue", ms=3, label="simulated")
            ax.legend(frameon=False)
        ax.set_xlabel("delay (ps)")
        ax.set_ylabel("coincidence probability")
        ax.set_ylim(-0.02, 1.02)
        _save(fig, path)


def fisher_figure(path, tau, fisher, limit, ideal=None):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(tau, fisher, color="tab:blue", label="Fisher information")
        if ideal is not None:
            ax.plot(tau, ideal, color="tab:gray", lw=0.8, label="ideal interferometer")
        ax.axhline(limit, color="tab:red", lw=0.8, label="quantum limit")
        ax.set_xlabel("delay (ps)")
        ax.set_ylabel(r"$F_\tau$ (ps$^{-2}$)")
        ax.legend(frameon=False)
        _save(fig, path)


def fit_figure(path, tau, ratio, model):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(tau, ratio, ".", color="tab:blue", ms=3, label="data")
        ax.plot(tau, model, color="k", label="fit")
        ax.set_xlabel("delay (ps)")
        ax.set_ylabel("coincidence probability")
        ax.legend(frameon=False)
        _save(fig, path)


def sensor_figure(path, temp, beta, p_coinc):
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
        ax1.plot(temp, p_coinc, color="k")
        ax1.set_xlabel("heating (deg)")
        ax1.set_ylabel("coincidence probability")
        ax2.plot(temp, np.asarray(beta), color="tab:red")
        ax2.set_xlabel("heating (deg)")
        ax2.set_ylabel("phase shift (rad)")
        fig.tight_layout()
        _save(fig, path)
