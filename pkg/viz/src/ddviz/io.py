"""Readers for the sweep's CSV/JSON output files.

The heatmap CSV schema is the interface contract with the simulator:
one row per (nu_max, tau_s) cell, ratio empty when either efficiency is
zero.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional

log = logging.getLogger("ddviz")

HEATMAP_COLUMNS = [
    "nu_max_hz",
    "tau_s_us",
    "se_zak",
    "se_ofdm",
    "ratio",
    "zak_nu_p",
    "zak_pulse",
    "zak_alloc",
    "zak_pdr_db",
    "ofdm_scs",
    "ofdm_boost_db",
    "mcs_zak",
    "mcs_ofdm",
]


class SchemaError(ValueError):
    pass


@dataclass
class HeatmapTable:
    nu_values: List[float]  # ascending, one per row of the plot
    tau_values_us: List[float]  # ascending, one per column
    ratio: Dict[tuple, Optional[float]]  # (nu, tau_us) -> ratio or None


def read_heatmap_csv(path: str) -> HeatmapTable:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty CSV")
        if header != HEATMAP_COLUMNS:
            raise SchemaError(f"unexpected header {header}")
        rows = [r for r in reader if r]
    if not rows:
        raise SchemaError("no data rows")
    ratio: Dict[tuple, Optional[float]] = {}
    nus, taus = set(), set()
    for r in rows:
        if len(r) != len(HEATMAP_COLUMNS):
            raise SchemaError(f"malformed row {r}")
        nu = float(r[0])
        tau = float(r[1])
        nus.add(nu)
        taus.add(tau)
        key = (nu, tau)
        if key in ratio:
            raise SchemaError(f"duplicate cell {key}")
        ratio[key] = float(r[4]) if r[4] != "" else None
    table = HeatmapTable(sorted(nus), sorted(taus), ratio)
    missing = [
        (nu, tau)
        for nu in table.nu_values
        for tau in table.tau_values_us
        if (nu, tau) not in ratio
    ]
    for cell in missing:
        log.warning("missing cell %s rendered blank", cell)
        table.ratio[cell] = None
    return table


def read_study_json(json_dir: str, kind: str) -> dict:
    path = os.path.join(json_dir, "studies", f"{kind}.json")
    if not os.path.exists(path):
        path = os.path.join(json_dir, f"{kind}.json")
    with open(path) as f:
        payload = json.load(f)
    for key in ("x", "series", "xlabel"):
        if key not in payload:
            raise SchemaError(f"study file missing {key!r}")
    return payload
