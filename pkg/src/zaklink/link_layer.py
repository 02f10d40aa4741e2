"""Bits to symbols and back.

Gray-mapped square QAM with max-log soft demapping, a punctured
rate-compatible convolutional code (K=7, generators 133/171 octal,
terminated) with soft Viterbi decoding, the modulation-and-coding ladder,
and the spectral-efficiency bookkeeping shared by both waveforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "McsEntry",
    "LinkResult",
    "MCS_LADDER",
    "map_qam",
    "demap_qam",
    "fec_encode",
    "fec_decode",
    "info_bits_for_capacity",
    "select_mcs",
    "spectral_efficiency",
    "zak_guard_overhead",
]

BLER_TARGET = 0.1

# ---------------------------------------------------------------------------
# QAM

# per-axis Gray tables: bit tuple index -> amplitude level (unnormalized)
_GRAY_LEVELS = {
    1: np.array([1.0, -1.0]),  # 0 -> +1, 1 -> -1
    2: np.array([3.0, 1.0, -1.0, -3.0]),  # 00,01,11,10 -> reflected Gray
    3: np.array([7.0, 5.0, 3.0, 1.0, -1.0, -3.0, -5.0, -7.0]),
}
# index into the tables by the Gray-decoded bit pattern
_GRAY_ORDER = {
    1: np.array([0, 1]),
    2: np.array([0, 1, 3, 2]),
    3: np.array([0, 1, 3, 2, 6, 7, 5, 4]),
}


def _axis_params(order: int) -> Tuple[int, float]:
    if order not in (4, 16, 64):
        raise ValueError("QAM order must be 4, 16 or 64")
    m = int(math.log2(order)) // 2
    levels = _GRAY_LEVELS[m]
    scale = math.sqrt(2.0 * np.mean(levels**2))
    return m, scale


def _axis_level(bits: np.ndarray, m: int) -> np.ndarray:
    """bits shape (n, m) -> Gray-mapped PAM level (unnormalized)."""
    idx = np.zeros(len(bits), dtype=int)
    for b in range(m):
        idx = (idx << 1) | bits[:, b]
    return _GRAY_LEVELS[m][_GRAY_ORDER[m][idx]]


def map_qam(bits: np.ndarray, order: int) -> np.ndarray:
    """Gray-mapped square QAM with unit average symbol energy.

    The first half of each symbol's bits drives the in-phase axis.
    """
    m, scale = _axis_params(order)
    bits = np.asarray(bits, dtype=int).reshape(-1, 2 * m)
    i = _axis_level(bits[:, :m], m)
    q = _axis_level(bits[:, m:], m)
    return (i + 1j * q) / scale


def demap_qam(soft: np.ndarray, order: int, noise_var) -> np.ndarray:
    """Max-log LLRs, positive for bit = 0.

    noise_var may be a scalar or per-symbol vector of post-equalization
    noise variances.
    """
    m, scale = _axis_params(order)
    soft = np.asarray(soft).ravel()
    nv = np.broadcast_to(np.asarray(noise_var, dtype=float), soft.shape)
    nv = np.maximum(nv, 1e-30)
    levels = _GRAY_LEVELS[m][_GRAY_ORDER[m]] / scale  # level of bit index b
    # per-axis distances to each candidate level: (n_sym, 2^m)
    out = np.empty((len(soft), 2 * m))
    for axis, y in enumerate((soft.real, soft.imag)):
        d2 = (y[:, None] - levels[None, :]) ** 2
        for b in range(m):
            idx = np.arange(2**m)
            bit = (idx >> (m - 1 - b)) & 1
            d0 = d2[:, bit == 0].min(axis=1)
            d1 = d2[:, bit == 1].min(axis=1)
            out[:, axis * m + b] = (d1 - d0) / nv
    return out.reshape(-1)


# ---------------------------------------------------------------------------
# convolutional code, K = 7, generators (133, 171) octal, terminated

_G1, _G2 = 0o133, 0o171
_K = 7
_NSTATES = 64

_PUNCTURE = {
    Fraction(1, 2): (np.array([1]), np.array([1])),
    Fraction(2, 3): (np.array([1, 1]), np.array([1, 0])),
    Fraction(3, 4): (np.array([1, 1, 0]), np.array([1, 0, 1])),
    Fraction(5, 6): (np.array([1, 1, 0, 1, 0]), np.array([1, 0, 1, 0, 1])),
}


def _as_rate(rate) -> Fraction:
    r = Fraction(rate).limit_denominator(12)
    if r not in _PUNCTURE:
        raise ValueError(f"unsupported code rate {rate}")
    return r


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    out = np.zeros_like(x)
    while np.any(x):
        out ^= x & 1
        x >>= 1
    return out


# transition tables: for state s (6 bits, most recent bit in the MSB) and
# input bit b, the shift register is (b, s); outputs tap the register.
_IN_BITS = np.arange(2)[:, None]
_STATES = np.arange(_NSTATES)[None, :]
_REG = (_IN_BITS << 6) | _STATES
_OUT1 = _parity(_REG & _G1)  # (2, 64)
_OUT2 = _parity(_REG & _G2)
_NEXT = _REG >> 1  # next state

# predecessor view: next state t has input bit t>>5 and predecessors
# 2*(t & 31) and 2*(t & 31) + 1
_T = np.arange(_NSTATES)
_INBIT = _T >> 5
_PRED = np.stack([2 * (_T & 31), 2 * (_T & 31) + 1])  # (2, 64)
_PO1 = np.stack([_OUT1[_INBIT, _PRED[0]], _OUT1[_INBIT, _PRED[1]]]).astype(float)
_PO2 = np.stack([_OUT2[_INBIT, _PRED[0]], _OUT2[_INBIT, _PRED[1]]]).astype(float)


def fec_encode(bits: np.ndarray, rate) -> np.ndarray:
    """Encode with termination (6 tail zeros), then puncture to the rate."""
    r = _as_rate(rate)
    p1, p2 = _PUNCTURE[r]
    bits = np.asarray(bits, dtype=int).ravel()
    tailed = np.concatenate([bits, np.zeros(_K - 1, dtype=int)])
    state = 0
    c1 = np.empty(len(tailed), dtype=int)
    c2 = np.empty(len(tailed), dtype=int)
    for i, b in enumerate(tailed):
        c1[i] = _OUT1[b, state]
        c2[i] = _OUT2[b, state]
        state = _NEXT[b, state]
    period = len(p1)
    n = len(tailed)
    keep1 = np.tile(p1, n // period + 1)[:n].astype(bool)
    keep2 = np.tile(p2, n // period + 1)[:n].astype(bool)
    out = np.empty(keep1.sum() + keep2.sum(), dtype=int)
    mixed = np.empty(2 * n, dtype=int)
    mixed[0::2] = c1
    mixed[1::2] = c2
    keep = np.empty(2 * n, dtype=bool)
    keep[0::2] = keep1
    keep[1::2] = keep2
    return mixed[keep]


def fec_decode(llrs: np.ndarray, rate) -> np.ndarray:
    """Soft Viterbi decode of a terminated, punctured stream.

    llrs are positive-for-zero; punctured positions are re-inserted as
    erasures.  Returns the information bits (tail removed).
    """
    r = _as_rate(rate)
    p1, p2 = _PUNCTURE[r]
    period = len(p1)
    per_period = int(p1.sum() + p2.sum())
    llrs = np.asarray(llrs, dtype=float).ravel()
    n_periods, rem = divmod(len(llrs), per_period)
    if rem:
        raise ValueError("llr stream length does not match the puncturing grid")
    n = n_periods * period  # trellis steps
    l1 = np.zeros(n)
    l2 = np.zeros(n)
    keep1 = np.tile(p1, n_periods).astype(bool)
    keep2 = np.tile(p2, n_periods).astype(bool)
    mixed_keep = np.empty(2 * n, dtype=bool)
    mixed_keep[0::2] = keep1
    mixed_keep[1::2] = keep2
    mixed = np.zeros(2 * n)
    mixed[mixed_keep] = llrs
    l1, l2 = mixed[0::2], mixed[1::2]

    # branch cost of emitting coded bit c against llr L (positive-for-zero)
    # is c*L up to a state-independent offset; precompute both predecessor
    # branch metrics for the whole block
    bm0 = np.outer(l1, _PO1[0]) + np.outer(l2, _PO2[0])
    bm1 = np.outer(l1, _PO1[1]) + np.outer(l2, _PO2[1])
    big = 1e18
    pm = np.full(_NSTATES, big)
    pm[0] = 0.0
    take0 = np.empty((n, _NSTATES), dtype=bool)
    for t in range(n):
        cost0 = pm[_PRED[0]] + bm0[t]
        cost1 = pm[_PRED[1]] + bm1[t]
        tk = cost0 <= cost1
        pm = np.where(tk, cost0, cost1)
        take0[t] = tk

    state = 0  # terminated
    bits = np.empty(n, dtype=int)
    for t in range(n - 1, -1, -1):
        bits[t] = state >> 5  # the input bit is the new state's MSB
        state = _PRED[0, state] if take0[t, state] else _PRED[1, state]
    return bits[: n - (_K - 1)]


def info_bits_for_capacity(n_coded_capacity: int, rate) -> int:
    """Largest terminated info length whose punctured stream fits the capacity.

    The terminated length (info + 6) is aligned to the puncturing period.
    """
    r = _as_rate(rate)
    p1, p2 = _PUNCTURE[r]
    period = len(p1)
    per_period = int(p1.sum() + p2.sum())
    n_periods = n_coded_capacity // per_period
    info = n_periods * period - (_K - 1)
    while info < 1 and n_periods >= 1:
        n_periods -= 1
        info = n_periods * period - (_K - 1)
    if info < 1:
        raise ValueError("capacity too small for a terminated block")
    return info


# ---------------------------------------------------------------------------
# MCS ladder / spectral efficiency


@dataclass(frozen=True)
class McsEntry:
    index: int
    qam_order: int
    code_rate: Fraction

    @property
    def bits_per_symbol(self) -> float:
        return math.log2(self.qam_order) * float(self.code_rate)


_LADDER_POINTS = sorted(
    (
        (order, Fraction(*r))
        for order in (4, 16, 64)
        for r in ((1, 2), (2, 3), (3, 4), (5, 6))
    ),
    key=lambda p: (math.log2(p[0]) * p[1], p[0]),
)
MCS_LADDER: Tuple[McsEntry, ...] = tuple(
    McsEntry(i, order, rate) for i, (order, rate) in enumerate(_LADDER_POINTS)
)


@dataclass
class LinkResult:
    n_info_bits: int
    bler: float
    ber: float
    se: float
    overhead_fraction: float
    mcs_chosen: Optional[int]


def select_mcs(
    per_mcs_bler: Sequence[Optional[float]], ladder: Sequence[McsEntry] = MCS_LADDER
) -> Optional[McsEntry]:
    """Highest-information-rate entry with BLER < 0.1; None if all fail.

    Entries with bler None are treated as unmeasured and skipped.
    """
    if len(ladder) == 0:
        raise ValueError("empty MCS ladder")
    if len(per_mcs_bler) != len(ladder):
        raise ValueError("need one BLER per ladder entry")
    best = None
    for entry, bler in zip(ladder, per_mcs_bler):
        if bler is None:
            continue
        if bler < BLER_TARGET:
            if best is None or entry.bits_per_symbol > best.bits_per_symbol:
                best = entry
    return best


def spectral_efficiency(
    n_info_bits: int,
    bler: float,
    waveform: str,
    tau_s: float = 0.0,
    bandwidth: float = 672e3,
    frame_duration: float = 1e-3,
) -> float:
    """Goodput normalized by the occupied time-bandwidth resource.

    zak:  (1 - BLER) * N_I / (B * (T + tau_s))
    ofdm: (1 - BLER) * N_I / 720  with N_I per 1 ms subframe
          (720 = 48 subcarriers x 15 kHz x 1 ms)
    Zero whenever BLER exceeds the 0.1 target.
    """
    if bler > BLER_TARGET:
        return 0.0
    if waveform == "zak":
        return (1.0 - bler) * n_info_bits / (bandwidth * (frame_duration + tau_s))
    if waveform == "ofdm":
        return (1.0 - bler) * n_info_bits / 720.0
    raise ValueError("waveform must be 'zak' or 'ofdm'")


def zak_guard_overhead(tau_s: float, frame_duration: float) -> float:
    """Guard-time fraction tau_s / (T + tau_s)."""
    if frame_duration <= 0:
        raise ValueError("frame duration must be positive")
    return tau_s / (frame_duration + tau_s)
