"""Annotated relative-efficiency heatmap."""

from __future__ import annotations

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import read_heatmap_csv

# quadrant boundaries: half the frame's Doppler resolution and one delay bin
QUADRANT_NU_HZ = 500.0
QUADRANT_TAU_US = 1e6 / 672e3


def _deterministic_rc():
    plt.rcParams["svg.hashsalt"] = "ddviz"


def build_figure(table):
    """Figure with one annotated cell per (nu_max, tau_s) ratio."""
    _deterministic_rc()
    n_rows = len(table.nu_values)
    n_cols = len(table.tau_values_us)
    grid = np.full((n_rows, n_cols), np.nan)
    for i, nu in enumerate(table.nu_values):
        for j, tau in enumerate(table.tau_values_us):
            v = table.ratio.get((nu, tau))
            if v is not None:
                grid[i, j] = v

    fig, ax = plt.subplots(figsize=(1.6 * n_cols + 2.0, 0.8 * n_rows + 1.5))
    finite = grid[np.isfinite(grid)]
    span = max(abs(finite - 1.0).max(), 0.05) if finite.size else 0.5
    cmap = plt.get_cmap("RdBu_r").copy()
    cmap.set_bad("white")
    im = ax.imshow(
        grid,
        origin="lower",
        aspect="auto",
        cmap=cmap,
        vmin=1.0 - span,
        vmax=1.0 + span,
    )
    for i in range(n_rows):
        for j in range(n_cols):
            if np.isfinite(grid[i, j]):
                ax.text(
                    j, i, f"{grid[i, j]:.2f}", ha="center", va="center", fontsize=9
                )
    ax.set_xticks(range(n_cols), [f"{t:g}" for t in table.tau_values_us])
    ax.set_yticks(range(n_rows), [f"{n:g}" for n in table.nu_values])
    ax.set_xlabel("delay spread (us)")
    ax.set_ylabel("max Doppler shift (Hz)")
    ax.set_title("relative spectral efficiency (delay-Doppler / CP-OFDM)")

    def _boundary(values, threshold):
        # grid coordinate separating values below/above the threshold
        below = [k for k, v in enumerate(values) if v <= threshold]
        return (below[-1] + 0.5) if below and below[-1] + 1 < len(values) else None

    ynu = _boundary(table.nu_values, QUADRANT_NU_HZ)
    xtau = _boundary(table.tau_values_us, QUADRANT_TAU_US)
    if ynu is not None:
        ax.axhline(ynu, color="k", lw=1.2, ls="--")
    if xtau is not None:
        ax.axvline(xtau, color="k", lw=1.2, ls="--")
    fig.colorbar(im, ax=ax, label="ratio")
    fig.tight_layout()
    return fig


def plot_heatmap(csv_path: str, out_path: str) -> list:
    """Render the ratio heatmap; writes PNG and SVG anchored at out_path's
    stem.  Cells without a ratio stay blank.  Returns the written paths.
    """
    table = read_heatmap_csv(csv_path)
    fig = build_figure(table)
    base, _ = os.path.splitext(out_path)
    written = []
    for path, fmt in [(base + ".png", "png"), (base + ".svg", "svg")]:
        fig.savefig(path, format=fmt, metadata=_clean_metadata(fmt))
        written.append(path)
    plt.close(fig)
    return written


def _clean_metadata(fmt: str):
    if fmt == "svg":
        return {"Date": None}
    return {"Software": "ddviz"}
