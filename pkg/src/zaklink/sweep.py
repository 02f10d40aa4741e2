"""Experiment driver.

Per-cell grid search over both waveforms' operating points, the sweep over
(nu_max, tau_s) cells, CSV/JSON persistence, and the single-axis operating
point studies.  Everything is deterministically seeded: a context seed is
derived from (base_seed, cell, operating point, MCS index) and per-frame
channel seeds are context_seed XOR frame_index.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .channel import ChannelDrawConfig, VEH_A_PDP
from .config import SweepConfig, config_to_dict, feasible_scs
from .dd_core import FrameDims
from .link_layer import (
    BLER_TARGET,
    MCS_LADDER,
    LinkResult,
    spectral_efficiency,
    zak_guard_overhead,
)
from .linksim import (
    derive_seed,
    frame_seed,
    measure_bler,
    simulate_ofdm_frame,
    simulate_zak_frame,
)
from .ofdm_modem import make_dmrs, make_numerology, ofdm_overheads
from .pulses import make_pulse
from .zak_modem import build_layout, check_crystallization, dd_noise_factor

__all__ = [
    "CellResult",
    "run_cell",
    "run_sweep",
    "run_study",
    "write_heatmap_csv",
    "HEATMAP_COLUMNS",
    "STUDY_KINDS",
]

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


@dataclass
class CellResult:
    nu_max: float
    tau_s: float
    best_zak: Optional[Dict] = None
    best_ofdm: Optional[Dict] = None
    diagnostics: Dict = field(default_factory=dict)

    @property
    def se_zak(self) -> float:
        return self.best_zak["se"] if self.best_zak else 0.0

    @property
    def se_ofdm(self) -> float:
        return self.best_ofdm["se"] if self.best_ofdm else 0.0

    @property
    def ratio(self) -> Optional[float]:
        if self.se_zak > 0 and self.se_ofdm > 0:
            return self.se_zak / self.se_ofdm
        return None


def _scan_mcs(frame_fn_for_mcs, ctx_seed_for_mcs, cfg: SweepConfig):
    """Top-down ladder scan: highest entry with BLER below the target.

    Equivalent to measuring every entry and applying select_mcs, given that
    BLER is non-decreasing in the ladder index (nested constellations and
    rates), but skips the hopeless high entries quickly.
    """
    for mcs_idx in range(len(MCS_LADDER) - 1, -1, -1):
        m = measure_bler(
            frame_fn_for_mcs(mcs_idx),
            ctx_seed_for_mcs(mcs_idx),
            cfg.n_frames,
            cfg.max_block_errors,
        )
        if m.bler < BLER_TARGET:
            return mcs_idx, m
    return None


def _zak_point_keys(cfg: SweepConfig, tau_s: float):
    for nu_p in cfg.zak.nu_p_list:
        for kind in cfg.zak.pulse_kinds:
            for alloc in cfg.zak.allocations:
                for pdr in cfg.zak.pdr_db_list:
                    yield nu_p, kind, alloc, pdr


def run_cell(cfg: SweepConfig, nu_max: float, tau_s: float) -> CellResult:
    """Optimize both waveforms at one (nu_max, tau_s) cell."""
    result = CellResult(nu_max=nu_max, tau_s=tau_s)
    draw_cfg = ChannelDrawConfig(
        pdp=VEH_A_PDP, nu_max=nu_max, rng_seed=0, delay_scale=cfg.delay_scale(tau_s)
    )
    nu_s = 2.0 * nu_max
    skipped = []

    # --- delay-Doppler side
    dims_cache: Dict[float, FrameDims] = {}
    pulse_cache = {}
    best = None
    for nu_p, kind, alloc, pdr in _zak_point_keys(cfg, tau_s):
        dims = dims_cache.setdefault(
            nu_p, FrameDims.from_doppler_period(cfg.bandwidth, cfg.frame_duration, nu_p)
        )
        try:
            layout = build_layout(dims, tau_s, alloc)
        except ValueError as e:
            skipped.append(f"zak nu_p={nu_p:g} alloc={alloc}: {e}")
            continue
        key = (nu_p, kind)
        if key not in pulse_cache:
            pulse = make_pulse(kind, dims)
            pulse_cache[key] = (pulse, dd_noise_factor(pulse, dims))
        pulse, noise_factor = pulse_cache[key]

        def frame_fn_for_mcs(mcs_idx):
            mcs = MCS_LADDER[mcs_idx]

            def fn(seed):
                return simulate_zak_frame(
                    dims,
                    pulse,
                    layout,
                    draw_cfg,
                    cfg.snr_db,
                    pdr,
                    mcs,
                    seed,
                    nu_s_hint=nu_s,
                    acq_threshold=cfg.acq_threshold,
                    noise_factor=noise_factor,
                )

            return fn

        def ctx(mcs_idx):
            return derive_seed(
                cfg.base_seed, "zak", nu_max, tau_s * 1e9, nu_p, kind, alloc, pdr, mcs_idx
            )

        hit = _scan_mcs(frame_fn_for_mcs, ctx, cfg)
        if hit is None:
            continue
        mcs_idx, m = hit
        se = spectral_efficiency(
            m.n_info_bits, m.bler, "zak", tau_s, cfg.bandwidth, cfg.frame_duration
        )
        if best is None or se > best["se"]:
            link = LinkResult(
                n_info_bits=m.n_info_bits,
                bler=m.bler,
                ber=m.ber,
                se=se,
                overhead_fraction=layout.overhead,
                mcs_chosen=mcs_idx,
            )
            best = {
                "se": se,
                "nu_p": nu_p,
                "pulse": kind,
                "allocation": alloc,
                "pdr_db": pdr,
                "mcs": mcs_idx,
                "bler": m.bler,
                "ber": m.ber,
                "frames": m.frames,
                "n_info_bits": m.n_info_bits,
                "overhead": layout.overhead,
                "crystallized": check_crystallization(dims, tau_s, nu_s),
                "link_result": dataclasses.asdict(link),
            }
    if best is not None:
        # acquisition quality at the winning operating point, vs the
        # quadrature ground truth, averaged over a few frames
        dims = dims_cache[best["nu_p"]]
        layout = build_layout(dims, tau_s, best["allocation"])
        pulse, noise_factor = pulse_cache[(best["nu_p"], best["pulse"])]
        mcs = MCS_LADDER[best["mcs"]]
        ctx_seed = derive_seed(cfg.base_seed, "zak-nmse", nu_max, tau_s * 1e9)
        vals = []
        for idx in range(2):
            out = simulate_zak_frame(
                dims, pulse, layout, draw_cfg, cfg.snr_db, best["pdr_db"], mcs,
                frame_seed(ctx_seed, idx), nu_s_hint=nu_s,
                acq_threshold=cfg.acq_threshold, noise_factor=noise_factor,
                collect_nmse=True,
            )
            vals.append(out.extra["acq_nmse_db"])
        best["acq_nmse_db"] = float(np.mean(vals))
    result.best_zak = best

    # --- OFDM side
    best = None
    for scs, ext in feasible_scs(tau_s, cfg.ofdm.scs_options):
        num = make_numerology(scs, ext)
        for positions in cfg.ofdm.dmrs_position_sets:
            for boost in cfg.ofdm.boost_db_list:
                dmrs = make_dmrs(num, positions, cfg.ofdm.freq_comb, boost)

                def frame_fn_for_mcs(mcs_idx):
                    mcs = MCS_LADDER[mcs_idx]

                    def fn(seed):
                        return simulate_ofdm_frame(
                            num, dmrs, draw_cfg, cfg.snr_db, mcs, seed
                        )

                    return fn

                def ctx(mcs_idx):
                    return derive_seed(
                        cfg.base_seed,
                        "ofdm",
                        nu_max,
                        tau_s * 1e9,
                        scs,
                        int(ext),
                        *positions,
                        boost,
                        mcs_idx,
                    )

                hit = _scan_mcs(frame_fn_for_mcs, ctx, cfg)
                if hit is None:
                    continue
                mcs_idx, m = hit
                se = spectral_efficiency(m.n_info_bits, m.bler, "ofdm")
                if best is None or se > best["se"]:
                    cp_f, pilot_f, total_f = ofdm_overheads(num, dmrs)
                    link = LinkResult(
                        n_info_bits=m.n_info_bits,
                        bler=m.bler,
                        ber=m.ber,
                        se=se,
                        overhead_fraction=total_f,
                        mcs_chosen=mcs_idx,
                    )
                    best = {
                        "se": se,
                        "scs": scs,
                        "extended_cp": ext,
                        "dmrs_positions": list(positions),
                        "boost_db": boost,
                        "mcs": mcs_idx,
                        "bler": m.bler,
                        "ber": m.ber,
                        "frames": m.frames,
                        "n_info_bits": m.n_info_bits,
                        "overhead": total_f,
                        "link_result": dataclasses.asdict(link),
                    }
    result.best_ofdm = best

    result.diagnostics = {
        "snr_db": cfg.snr_db,
        "nu_s": nu_s,
        "guard_overhead": zak_guard_overhead(tau_s, cfg.frame_duration),
        "skipped_points": skipped,
    }
    return result


# ---------------------------------------------------------------------------
# sweep over cells


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


def heatmap_row(res: CellResult) -> List[str]:
    z, o = res.best_zak, res.best_ofdm
    return [
        _fmt(res.nu_max),
        _fmt(res.tau_s * 1e6),
        _fmt(res.se_zak),
        _fmt(res.se_ofdm),
        _fmt(res.ratio),
        _fmt(z["nu_p"]) if z else "",
        z["pulse"] if z else "",
        _fmt(z["allocation"]) if z else "",
        _fmt(z["pdr_db"]) if z else "",
        (_fmt(o["scs"]) + ("ext" if o["extended_cp"] else "")) if o else "",
        _fmt(o["boost_db"]) if o else "",
        _fmt(z["mcs"]) if z else "",
        _fmt(o["mcs"]) if o else "",
    ]


def write_heatmap_csv(results: Sequence[CellResult], path: str) -> None:
    rows = sorted(results, key=lambda r: (r.nu_max, r.tau_s))
    lines = [",".join(HEATMAP_COLUMNS)]
    for r in rows:
        lines.append(",".join(heatmap_row(r)))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _cell_json_name(nu_max: float, tau_s: float) -> str:
    return f"{int(round(nu_max))}_{tau_s * 1e6:.2f}.json"


def _run_cell_star(args):
    cfg, nu_max, tau_s = args
    return run_cell(cfg, nu_max, tau_s)


def run_sweep(
    cfg: SweepConfig, out_dir: str, jobs: int = 1, cells: Optional[list] = None
) -> List[CellResult]:
    """Run all (nu_max, tau_s) cells and persist heatmap.csv, per-cell JSON
    and run_meta.json under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    os.makedirs(os.path.join(out_dir, "cells"), exist_ok=True)
    if cells is None:
        cells = [(nu, ta) for nu in cfg.nu_max_list for ta in cfg.tau_s_list]
    tasks = [(cfg, nu, ta) for nu, ta in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_cell_star, tasks))
    else:
        results = [_run_cell_star(t) for t in tasks]

    write_heatmap_csv(results, os.path.join(out_dir, "heatmap.csv"))
    for res in results:
        payload = {
            "nu_max_hz": res.nu_max,
            "tau_s_s": res.tau_s,
            "best_zak": res.best_zak,
            "best_ofdm": res.best_ofdm,
            "se_zak": res.se_zak,
            "se_ofdm": res.se_ofdm,
            "ratio": res.ratio,
            "diagnostics": res.diagnostics,
        }
        name = _cell_json_name(res.nu_max, res.tau_s)
        with open(os.path.join(out_dir, "cells", name), "w") as f:
            json.dump(payload, f, indent=1, sort_keys=True)

    import scipy

    import zaklink

    meta = {
        "base_seed": cfg.base_seed,
        "config": config_to_dict(cfg),
        "versions": {
            "zaklink": zaklink.__version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "pilot_overhead_sanity_8_tau_nu": cfg.max_spread_product,
        "worst_case_spread_product": cfg.worst_case_spread_product,
        # external reference efficiencies at (100 Hz, 1.15 us) obtained with
        # a standardized LDPC chain; a different code is bundled here, so
        # these are context, not a reproduction target
        "reference_se_anchor": {"zak": 0.92, "ofdm": 0.85},
        # the two efficiency denominators differ (672 kHz frame vs a
        # 720 kHz*ms slot); both formulas are applied verbatim
        "se_denominator_note": "zak: B*(T+tau_s) with B=672 kHz; ofdm: 720 kHz*ms per slot",
    }
    with open(os.path.join(out_dir, "run_meta.json"), "w") as f:
        json.dump(meta, f, indent=1, sort_keys=True)
    return results


# ---------------------------------------------------------------------------
# single-axis operating-point studies

STUDY_KINDS = ("se_vs_tau", "se_vs_numax", "se_vs_alloc", "se_vs_pdr")


def _zak_point_se(cfg, nu_max, tau_s, nu_p, kind, alloc, pdr) -> float:
    sub = dataclasses.replace(
        cfg,
        zak=dataclasses.replace(
            cfg.zak,
            nu_p_list=(nu_p,),
            pulse_kinds=(kind,),
            allocations=(alloc,),
            pdr_db_list=(pdr,),
        ),
    )
    res = run_cell(sub, nu_max, tau_s)
    return res.se_zak


def run_study(cfg: SweepConfig, kind: str, out_dir: str) -> Dict:
    """One published-style operating-point study, written to
    out_dir/studies/<kind>.json."""
    if kind not in STUDY_KINDS:
        raise ValueError(f"unknown study {kind!r}")
    os.makedirs(os.path.join(out_dir, "studies"), exist_ok=True)
    series: Dict[str, List[float]] = {}
    if kind == "se_vs_tau":
        x = list(cfg.tau_s_list)
        xlabel = "tau_s_us"
        xs = [t * 1e6 for t in x]
        for nu_p in (1e3, 2e3, 12e3):
            label = f"nu_p={nu_p/1e3:g}kHz"
            series[label] = [
                max(
                    (
                        _zak_point_se(cfg, 100.0, t, nu_p, "gauss_sinc", a, p)
                        for a in cfg.zak.allocations
                        for p in cfg.zak.pdr_db_list
                    ),
                    default=0.0,
                )
                for t in x
            ]
    elif kind == "se_vs_numax":
        xs = list(cfg.nu_max_list)
        xlabel = "nu_max_hz"
        for nu_p in (1e3, 4e3, 12e3):
            label = f"nu_p={nu_p/1e3:g}kHz"
            series[label] = [
                max(
                    (
                        _zak_point_se(cfg, nm, 1.15e-6, nu_p, "gauss_sinc", a, p)
                        for a in cfg.zak.allocations
                        for p in cfg.zak.pdr_db_list
                    ),
                    default=0.0,
                )
                for nm in xs
            ]
    elif kind == "se_vs_alloc":
        xs = [1, 2, 3, 4, 5]
        xlabel = "allocation"
        for nu_max, nu_p, tau_s in ((100.0, 2e3, 1.15e-6), (2000.0, 12e3, 4.7e-6)):
            label = f"nu_max={nu_max:g}Hz,nu_p={nu_p/1e3:g}kHz,tau_s={tau_s*1e6:g}us"
            series[label] = [
                max(
                    (
                        _zak_point_se(cfg, nu_max, tau_s, nu_p, "gauss_sinc", a, p)
                        for p in cfg.zak.pdr_db_list
                    ),
                    default=0.0,
                )
                for a in xs
            ]
    else:  # se_vs_pdr
        xs = list(cfg.zak.pdr_db_list)
        xlabel = "pdr_db"
        for nu_max, nu_p, tau_s in ((100.0, 2e3, 1.15e-6), (2000.0, 12e3, 4.7e-6)):
            label = f"nu_max={nu_max:g}Hz,nu_p={nu_p/1e3:g}kHz,tau_s={tau_s*1e6:g}us"
            series[label] = [
                max(
                    (
                        _zak_point_se(cfg, nu_max, tau_s, nu_p, "gauss_sinc", a, p)
                        for a in cfg.zak.allocations
                    ),
                    default=0.0,
                )
                for p in xs
            ]
    payload = {"study": kind, "x": xs, "xlabel": xlabel, "series": series}
    with open(os.path.join(out_dir, "studies", f"{kind}.json"), "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
    return payload
