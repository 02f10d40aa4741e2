"""Operating-point study curves."""

from __future__ import annotations

import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import read_study_json

log = logging.getLogger("ddviz")

STUDY_KINDS = ("se_vs_tau", "se_vs_numax", "se_vs_alloc", "se_vs_pdr")


def plot_study(json_dir: str, kind: str, out_path: str) -> list:
    """Line (or bar, for the allocation study) chart of one study."""
    if kind not in STUDY_KINDS:
        raise ValueError(f"unknown study kind {kind!r}")
    payload = read_study_json(json_dir, kind)
    x = payload["x"]
    plt.rcParams["svg.hashsalt"] = "ddviz"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    n_series = 0
    for label, ys in sorted(payload["series"].items()):
        if ys is None or len(ys) != len(x):
            log.warning("skipping series %r with mismatched length", label)
            continue
        if kind == "se_vs_alloc":
            offset = 0.8 * n_series / max(1, len(payload["series"])) - 0.4
            ax.bar([xi + offset for xi in x], ys, width=0.25, label=label)
        else:
            ax.plot(x, ys, marker="o", label=label)
        n_series += 1
    if n_series == 0:
        raise ValueError("no plottable series")
    ax.set_xlabel(payload["xlabel"])
    ax.set_ylabel("spectral efficiency (bits/s/Hz)")
    ax.set_title(kind.replace("_", " "))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    base, _ = os.path.splitext(out_path)
    written = []
    for path, fmt in ((base + ".png", "png"), (base + ".svg", "svg")):
        meta = {"Date": None} if fmt == "svg" else {"Software": "ddviz"}
        fig.savefig(path, format=fmt, metadata=meta)
        written.append(path)
    plt.close(fig)
    return written
