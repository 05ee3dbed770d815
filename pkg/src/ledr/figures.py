"""Matplotlib renderings saved next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .discrete import (
    REGIME_DEGENERATE,
    REGIME_DIVERGENT_NEGATIVE,
    REGIME_DIVERGENT_POSITIVE,
    REGIME_FLAT_DRIFT,
    REGIME_OSCILLATORY,
)

_REGIME_CODES = {
    REGIME_DIVERGENT_NEGATIVE: 0,
    REGIME_FLAT_DRIFT: 1,
    REGIME_OSCILLATORY: 2,
    REGIME_DEGENERATE: 3,
    REGIME_DIVERGENT_POSITIVE: 4,
}


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_series(path, times, xi, title, ylabel="deviation"):
    fig, ax = plt.subplots(figsize=(7, 4))
    xi = np.atleast_2d(xi)
    for i in range(xi.shape[1]):
        ax.plot(times, xi[:, i], label=f"component {i}")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def render_sphere_plane(path, times, measured, closed_form, r):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(times, measured, label="simulated transverse deviation")
    ax.plot(times, closed_form, "--", label="closed form")
    ax.set_xlabel("t")
    ax.set_ylabel("transverse deviation")
    ax.set_title(f"curved truth (r={r}) vs flat model")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def render_stability_map(path, k_values, h_values, regimes):
    codes = np.array(
        [[_REGIME_CODES[regimes[(i, j)]] for j in range(len(h_values))] for i in range(len(k_values))]
    )
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(
        h_values, k_values, codes, cmap="viridis", vmin=0, vmax=4, shading="nearest"
    )
    bar = fig.colorbar(mesh, ax=ax, ticks=sorted(_REGIME_CODES.values()))
    bar.ax.set_yticklabels([name for name, _ in sorted(_REGIME_CODES.items(), key=lambda kv: kv[1])])
    ax.set_xlabel("h")
    ax.set_ylabel("K")
    ax.set_title("recurrence stability regimes")
    _save(fig, path)


def render_curvature_estimate(path, times, k_values, valid):
    fig, ax = plt.subplots(figsize=(7, 4))
    masked = np.where(valid, k_values, np.nan)
    ax.plot(times, masked, ".", markersize=3, label="per-step estimate")
    finite = masked[np.isfinite(masked)]
    if finite.size:
        ax.axhline(np.median(finite), color="k", linewidth=0.8, label="median")
    ax.set_xlabel("t")
    ax.set_ylabel("estimated curvature")
    ax.set_title("curvature recovered from deviation samples")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    _save(fig, path)
