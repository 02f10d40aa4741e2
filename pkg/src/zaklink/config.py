"""Sweep configuration: search spaces, feasibility rules, TOML loading.

Defaults reproduce the published operating grids: a 1 ms, 672 kHz
delay-Doppler frame swept over Doppler periods, pulse shapes, pilot
allocations and pilot-to-data ratios, against 4-PRB OFDM slots swept over
subcarrier spacings, DMRS patterns and power boosts, all at 12 dB receiver
SNR over the six-path vehicular profile.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

try:  # python >= 3.11
    import tomllib as _toml
except ImportError:  # pragma: no cover
    import tomli as _toml

__all__ = [
    "ZakSearchSpace",
    "OfdmSearchSpace",
    "SweepConfig",
    "default_config",
    "acceptance_config",
    "mini_config",
    "load_config",
    "feasible_scs",
    "cp_duration",
]

# normal-CP duration by subcarrier spacing; extended CP fills a 12-symbol slot
CP_BY_SCS = {15e3: 4.7e-6, 30e3: 2.35e-6, 60e3: 1.175e-6}
CP_EXTENDED_60K = 0.25e-3 / 12 - 1.0 / 60e3

VEH_A_MAX_DELAY = 2.51e-6


def cp_duration(scs: float, extended: bool) -> float:
    return CP_EXTENDED_60K if extended else CP_BY_SCS[scs]


def feasible_scs(
    tau_s: float, scs_options: Sequence[Tuple[float, bool]]
) -> List[Tuple[float, bool]]:
    """Spacings whose cyclic prefix covers the delay spread.

    The extended-CP variant only enters once the spread exceeds the 30 kHz
    normal prefix (it exists to reach a wide spacing at large delay spread,
    not as a generally available alternative).
    """
    out = []
    for scs, ext in scs_options:
        if cp_duration(scs, ext) < tau_s - 1e-12:
            continue
        if ext and tau_s <= CP_BY_SCS[30e3] + 1e-12:
            continue
        out.append((scs, ext))
    return out


@dataclass(frozen=True)
class ZakSearchSpace:
    nu_p_list: Tuple[float, ...] = (1e3, 2e3, 4e3, 6e3, 8e3, 12e3, 14e3, 24e3)
    pulse_kinds: Tuple[str, ...] = ("sinc", "gauss", "gauss_sinc")
    allocations: Tuple[int, ...] = (1, 2, 3, 4, 5)
    pdr_db_list: Tuple[float, ...] = (-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0)

    def __post_init__(self):
        if not (self.nu_p_list and self.pulse_kinds and self.allocations and self.pdr_db_list):
            raise ValueError("all delay-Doppler search lists must be nonempty")


@dataclass(frozen=True)
class OfdmSearchSpace:
    # (scs_hz, extended_cp)
    scs_options: Tuple[Tuple[float, bool], ...] = (
        (15e3, False),
        (30e3, False),
        (60e3, False),
        (60e3, True),
    )
    dmrs_position_sets: Tuple[Tuple[int, ...], ...] = (
        (2,),
        (2, 7),
        (2, 7, 11),
        (2, 5, 8, 11),
        (1, 3, 5, 7, 9, 11, 13),
    )
    freq_comb: int = 2
    boost_db_list: Tuple[float, ...] = (-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0)

    def __post_init__(self):
        if not (self.scs_options and self.dmrs_position_sets and self.boost_db_list):
            raise ValueError("all OFDM search lists must be nonempty")


@dataclass(frozen=True)
class SweepConfig:
    nu_max_list: Tuple[float, ...] = (0.0, 100.0, 400.0, 800.0, 1200.0, 1600.0, 2000.0)
    tau_s_list: Tuple[float, ...] = (0.0, 1.15e-6, 2.3e-6, 4.13e-6, 4.7e-6)
    snr_db: float = 12.0
    n_frames: int = 200
    base_seed: int = 1
    bandwidth: float = 672e3
    frame_duration: float = 1e-3
    acq_threshold: float = 0.05
    max_block_errors: int = 20
    zak: ZakSearchSpace = field(default_factory=ZakSearchSpace)
    ofdm: OfdmSearchSpace = field(default_factory=OfdmSearchSpace)

    def __post_init__(self):
        if not self.nu_max_list or not self.tau_s_list:
            raise ValueError("sweep axes must be nonempty")
        if self.n_frames < 1:
            raise ValueError("n_frames must be positive")
        for tau_s in self.tau_s_list:
            if tau_s > 0 and not feasible_scs(tau_s, self.ofdm.scs_options):
                raise ValueError(
                    f"no configured subcarrier spacing covers tau_s = {tau_s}"
                )

    @property
    def max_spread_product(self) -> float:
        """max over the sweep of 8 * tau_s * nu_max (pilot-overhead sanity)."""
        return 8.0 * max(self.tau_s_list) * max(self.nu_max_list)

    @property
    def worst_case_spread_product(self) -> float:
        """max tau_s times max Doppler spread (2 nu_max)."""
        return max(self.tau_s_list) * 2.0 * max(self.nu_max_list)

    def delay_scale(self, tau_s: float) -> float:
        """Scale factor putting the longest profile path at tau_s."""
        return tau_s / VEH_A_MAX_DELAY


def default_config() -> SweepConfig:
    return SweepConfig()


def acceptance_config(base_seed: int = 1, n_frames: int = 200) -> SweepConfig:
    """Trimmed operating spaces for the acceptance-level ratio checks.

    The retained points bracket the published optima for the low-mobility
    small-cell and high-mobility large-cell corners.
    """
    return SweepConfig(
        n_frames=n_frames,
        base_seed=base_seed,
        zak=ZakSearchSpace(
            nu_p_list=(2e3, 12e3),
            pulse_kinds=("gauss_sinc",),
            allocations=(1, 4, 5),
            pdr_db_list=(-10.0, -5.0),
        ),
        ofdm=OfdmSearchSpace(
            scs_options=((15e3, False), (30e3, False), (60e3, False), (60e3, True)),
            dmrs_position_sets=((2,), (2, 7, 11), (2, 5, 8, 11), (1, 3, 5, 7, 9, 11, 13)),
            boost_db_list=(0.0, 4.0),
        ),
    )


def mini_config(base_seed: int = 1) -> SweepConfig:
    """Tiny deterministic configuration for reproducibility checks."""
    return SweepConfig(
        nu_max_list=(100.0, 1600.0),
        tau_s_list=(1.15e-6, 4.7e-6),
        n_frames=20,
        max_block_errors=5,
        base_seed=base_seed,
        zak=ZakSearchSpace(
            nu_p_list=(2e3, 12e3),
            pulse_kinds=("gauss_sinc",),
            allocations=(4,),
            pdr_db_list=(-5.0,),
        ),
        ofdm=OfdmSearchSpace(
            scs_options=((15e3, False),),
            dmrs_position_sets=((2, 7),),
            boost_db_list=(0.0,),
        ),
    )


_PRESETS = {
    "default": default_config,
    "acceptance": acceptance_config,
    "mini": mini_config,
}


def load_config(path: Optional[str]) -> SweepConfig:
    """Load a TOML config file, or a named preset, or the defaults.

    Schema mirrors SweepConfig: top-level scalars plus [zak] and [ofdm]
    tables; ofdm.scs_options entries are "15000", "30000", "60000" or
    "60000ext".
    """
    if path is None:
        return default_config()
    if path in _PRESETS:
        return _PRESETS[path]()
    with open(path, "rb") as f:
        raw = _toml.load(f)
    return config_from_dict(raw)


def _parse_scs(entry) -> Tuple[float, bool]:
    s = str(entry)
    ext = s.endswith("ext")
    if ext:
        s = s[: -len("ext")]
    return float(s), ext


def config_from_dict(raw: Dict) -> SweepConfig:
    zak_raw = raw.pop("zak", {})
    ofdm_raw = raw.pop("ofdm", {})
    zak_kwargs = {}
    for key in ("nu_p_list", "pulse_kinds", "allocations", "pdr_db_list"):
        if key in zak_raw:
            zak_kwargs[key] = tuple(zak_raw[key])
    ofdm_kwargs = {}
    if "scs_options" in ofdm_raw:
        ofdm_kwargs["scs_options"] = tuple(_parse_scs(e) for e in ofdm_raw["scs_options"])
    if "dmrs_position_sets" in ofdm_raw:
        ofdm_kwargs["dmrs_position_sets"] = tuple(
            tuple(int(p) for p in s) for s in ofdm_raw["dmrs_position_sets"]
        )
    for key in ("freq_comb", "boost_db_list"):
        if key in ofdm_raw:
            ofdm_kwargs[key] = (
                tuple(ofdm_raw[key]) if key.endswith("list") else int(ofdm_raw[key])
            )
    kwargs = {}
    for f in dataclasses.fields(SweepConfig):
        if f.name in ("zak", "ofdm"):
            continue
        if f.name in raw:
            val = raw[f.name]
            kwargs[f.name] = tuple(val) if isinstance(val, list) else val
    return SweepConfig(
        zak=ZakSearchSpace(**zak_kwargs), ofdm=OfdmSearchSpace(**ofdm_kwargs), **kwargs
    )


def config_to_dict(cfg: SweepConfig) -> Dict:
    """JSON-friendly echo of a config (for run metadata)."""
    d = dataclasses.asdict(cfg)
    d["ofdm"]["scs_options"] = [
        f"{int(scs)}" + ("ext" if ext else "") for scs, ext in cfg.ofdm.scs_options
    ]
    return d
