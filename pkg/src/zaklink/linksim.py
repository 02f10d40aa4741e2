"""Single-frame link simulations and Monte-Carlo block error measurement.

Signal power is measured on the synthesized frame and the noise level is
set so that the stated receiver SNR refers to the total received power
(data plus pilots) in the occupied bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .channel import ChannelDrawConfig, TdSignal, add_awgn, apply_channel_td, draw_veh_a
from .dd_core import FrameDims
from .link_layer import (
    McsEntry,
    demap_qam,
    fec_decode,
    fec_encode,
    info_bits_for_capacity,
    map_qam,
)
from .ofdm_modem import (
    DmrsConfig,
    OfdmNumerology,
    demodulate_ofdm,
    estimate_channel_dmrs,
    mmse_equalize_per_carrier,
    modulate_ofdm,
)
from .pulses import PulseShape
from .zak_modem import (
    FrameLayout,
    acquire_channel,
    acquisition_box,
    compose_frame,
    dd_noise_factor,
    demodulate,
    lsmr_equalize,
    modulate,
)

__all__ = [
    "BlerMeasurement",
    "FrameOutcome",
    "simulate_zak_frame",
    "simulate_ofdm_frame",
    "measure_bler",
    "derive_seed",
    "frame_seed",
]

_NOISE_SEED_MASK = 0x9E3779B97F4A7C15
_BITS_SEED_MASK = 0x5DEECE66D
_INTERLEAVER_SEED = 0xC0DEC0DE


def _interleaver(n: int) -> np.ndarray:
    """Fixed pseudo-random bit interleaver over a length-n coded block.

    Spreads coded bits over the frame so localized fades do not produce
    error bursts beyond the decoder's span; known to both ends.
    """
    return np.random.default_rng(_INTERLEAVER_SEED ^ n).permutation(n)


def derive_seed(base_seed: int, *labels) -> int:
    """Stable 64-bit context seed from a base seed and hashable labels."""
    entropy = [base_seed & 0xFFFFFFFFFFFFFFFF]
    for lab in labels:
        if isinstance(lab, str):
            entropy.extend(lab.encode("utf8"))
        else:
            entropy.append(int(lab) & 0xFFFFFFFFFFFFFFFF)
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def frame_seed(ctx_seed: int, frame_index: int) -> int:
    """Per-frame channel seed: context seed XOR frame index."""
    return (ctx_seed ^ frame_index) & 0xFFFFFFFFFFFFFFFF


@dataclass
class FrameOutcome:
    block_error: bool
    bit_errors: int
    n_info_bits: int
    extra: Dict[str, float]


def simulate_zak_frame(
    dims: FrameDims,
    pulse: PulseShape,
    layout: FrameLayout,
    draw_cfg: ChannelDrawConfig,
    snr_db: float,
    pdr_db: float,
    mcs: McsEntry,
    seed: int,
    nu_s_hint: Optional[float] = None,
    acq_threshold: float = 0.05,
    noise_factor: Optional[float] = None,
    collect_nmse: bool = False,
) -> FrameOutcome:
    """One delay-Doppler frame through draw -> modulate -> channel -> noise ->
    acquire -> equalize -> decode.

    With collect_nmse the acquisition error against the quadrature ground
    truth is reported in extra["acq_nmse_db"] (slower: runs the oracle).
    """
    Q = 4
    bits_rng = np.random.default_rng(seed ^ _BITS_SEED_MASK)
    chan = draw_veh_a(
        ChannelDrawConfig(
            pdp=draw_cfg.pdp,
            nu_max=draw_cfg.nu_max,
            rng_seed=seed,
            delay_scale=draw_cfg.delay_scale,
        )
    )
    bps = int(math.log2(mcs.qam_order))
    capacity = layout.n_data * bps
    n_info = info_bits_for_capacity(capacity, mcs.code_rate)
    bits = bits_rng.integers(0, 2, n_info)
    coded = fec_encode(bits, mcs.code_rate)
    filled = np.zeros(capacity, dtype=int)
    filled[: len(coded)] = coded
    perm = _interleaver(capacity)
    syms = map_qam(filled[perm], mcs.qam_order)

    pilot_amp = math.sqrt(10.0 ** (pdr_db / 10.0) * layout.n_data)
    grid = compose_frame(layout, syms, pilot_amp)
    x = modulate(grid, pulse)
    y = apply_channel_td(x, chan)
    # the receiver SNR (data plus pilot) is fixed: noise is referenced to the
    # received energy time-averaged over the frame duration
    p_sig = y.energy() / dims.T
    noisy = add_awgn(y.samples, snr_db, Q * p_sig, seed ^ _NOISE_SEED_MASK)
    rx = demodulate(TdSignal(noisy, y.rate, y.start), pulse, dims)

    n0 = p_sig / (10.0 ** (snr_db / 10.0) * dims.B)
    if noise_factor is None:
        noise_factor = dd_noise_factor(pulse, dims)
    cell_var = n0 * noise_factor
    if nu_s_hint is None:
        nu_s_hint = 2.0 * draw_cfg.nu_max
    precursor, d_margin, nu_margin = acquisition_box(pulse)
    est = acquire_channel(
        rx, layout, threshold=acq_threshold, pilot_amplitude=pilot_amp,
        nu_s_hint=nu_s_hint, delay_margin=d_margin, doppler_margin=nu_margin,
        precursor=precursor,
    )
    eq = lsmr_equalize(rx, est, layout, cell_var, pilot_amplitude=pilot_amp)
    llrs = demap_qam(eq.soft_symbols, mcs.qam_order, cell_var)
    deperm = np.empty(capacity, dtype=int)
    deperm[perm] = np.arange(capacity)
    llrs = llrs[deperm]
    dec = fec_decode(llrs[: len(coded)], mcs.code_rate)
    n_err = int((dec != bits).sum())
    extra = {"lsmr_iterations": eq.iterations}
    if collect_nmse:
        from .effective_channel import ground_truth_heff
        from .zak_modem import filter_nmse_db

        truth = ground_truth_heff(chan, pulse, dims)
        extra["acq_nmse_db"] = filter_nmse_db(
            est.filter, truth, est.k_lo, est.k_hi, est.l_lo, est.l_hi
        )
    return FrameOutcome(
        block_error=n_err > 0,
        bit_errors=n_err,
        n_info_bits=n_info,
        extra=extra,
    )


def simulate_ofdm_frame(
    num: OfdmNumerology,
    dmrs: DmrsConfig,
    draw_cfg: ChannelDrawConfig,
    snr_db: float,
    mcs: McsEntry,
    seed: int,
) -> FrameOutcome:
    """One CP-OFDM subframe through the time-domain channel oracle."""
    bits_rng = np.random.default_rng(seed ^ _BITS_SEED_MASK)
    chan = draw_veh_a(
        ChannelDrawConfig(
            pdp=draw_cfg.pdp,
            nu_max=draw_cfg.nu_max,
            rng_seed=seed,
            delay_scale=draw_cfg.delay_scale,
        )
    )
    n_sym, n_sub = num.n_symbols, num.n_subcarriers
    pilot_sc = dmrs.pilot_subcarriers(n_sub)
    boost_amp = 10.0 ** (dmrs.power_boost_db / 20.0)

    data_mask = np.ones((n_sym, n_sub), dtype=bool)
    for s in dmrs.time_positions:
        data_mask[s, pilot_sc] = False
    n_data = int(data_mask.sum())

    bps = int(math.log2(mcs.qam_order))
    capacity = n_data * bps
    n_info = info_bits_for_capacity(capacity, mcs.code_rate)
    bits = bits_rng.integers(0, 2, n_info)
    coded = fec_encode(bits, mcs.code_rate)
    filled = np.zeros(capacity, dtype=int)
    filled[: len(coded)] = coded
    perm = _interleaver(capacity)
    syms = map_qam(filled[perm], mcs.qam_order)

    # deterministic QPSK pilot sequence, common to transmitter and receiver
    pilot_rng = np.random.default_rng(0xD31A5)
    pilot_values = {}
    grid = np.zeros((n_sym, n_sub), dtype=np.complex128)
    grid[data_mask] = syms
    for s in dmrs.time_positions:
        vals = pilot_rng.choice([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], size=len(pilot_sc))
        vals = boost_amp * vals / math.sqrt(2.0)
        grid[s, pilot_sc] = vals
        pilot_values[s] = vals

    x = modulate_ofdm(grid, num)
    y = apply_channel_td(x, chan)
    # fixed receiver SNR: noise referenced to the received energy
    # time-averaged over the slot
    slot_T = num.n_symbols * (num.body_samples + num.cp_samples) / num.rate
    p_sig = y.energy() / slot_T
    noisy = add_awgn(
        y.samples, snr_db, num.oversample * p_sig, seed ^ _NOISE_SEED_MASK
    )
    rx = demodulate_ofdm(TdSignal(noisy, y.rate, y.start), num)

    n0 = p_sig / (10.0 ** (snr_db / 10.0) * num.bandwidth)
    est = estimate_channel_dmrs(rx, dmrs, pilot_values, num)
    xhat = mmse_equalize_per_carrier(rx, est, n0)
    h2 = np.maximum(np.abs(est) ** 2, 1e-9)
    # undo the MMSE bias before demapping; the per-symbol noise follows the
    # zero-forcing model
    gain = h2 / (h2 + n0)
    nv = n0 / h2
    llrs = demap_qam((xhat / gain)[data_mask], mcs.qam_order, nv[data_mask])
    deperm = np.empty(capacity, dtype=int)
    deperm[perm] = np.arange(capacity)
    llrs = llrs[deperm]
    dec = fec_decode(llrs[: len(coded)], mcs.code_rate)
    n_err = int((dec != bits).sum())
    return FrameOutcome(
        block_error=n_err > 0,
        bit_errors=n_err,
        n_info_bits=n_info,
        extra={},
    )


@dataclass
class BlerMeasurement:
    bler: float
    ber: float
    frames: int
    n_info_bits: int


def measure_bler(
    frame_fn: Callable[[int], FrameOutcome],
    ctx_seed: int,
    max_frames: int,
    max_block_errors: int = 20,
) -> BlerMeasurement:
    """Monte-Carlo block/bit error rates with early stop.

    Runs up to max_frames frames (seeded ctx_seed XOR index) and stops once
    max_block_errors block errors accumulate.
    """
    errors = 0
    bit_errors = 0
    frames = 0
    n_info = 0
    for idx in range(max_frames):
        out = frame_fn(frame_seed(ctx_seed, idx))
        frames += 1
        n_info = out.n_info_bits
        bit_errors += out.bit_errors
        if out.block_error:
            errors += 1
        if errors >= max_block_errors:
            break
    return BlerMeasurement(
        bler=errors / frames,
        ber=bit_errors / max(1, frames * n_info),
        frames=frames,
        n_info_bits=n_info,
    )
