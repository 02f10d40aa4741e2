"""Discrete delay-Doppler machinery.

Zak transform pair between length-M*N time-domain frames and M x N
delay-Doppler grids, quasi-periodic extension semantics, and twisted
convolution of sparse filters with grids and with each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

__all__ = [
    "FrameDims",
    "QuasiPeriodicGrid",
    "DiscreteDDFilter",
    "identity_filter",
    "discrete_zak_transform",
    "inverse_discrete_zak_transform",
    "discrete_twisted_convolve",
    "compose_filters",
]


@dataclass(frozen=True)
class FrameDims:
    """Geometry of one frame: M delay bins by N Doppler bins.

    M = B*tau_p and N = T*nu_p must be integers; tau_p*nu_p = 1.  The
    information lattice has delay pitch 1/B and Doppler pitch 1/T.
    """

    M: int
    N: int
    B: float
    T: float
    tau_p: float
    nu_p: float

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be positive integers")
        if abs(self.tau_p * self.nu_p - 1.0) > 1e-12:
            raise ValueError("tau_p*nu_p must equal 1")
        for prod, n, what in (
            (self.B * self.tau_p, self.M, "B*tau_p"),
            (self.T * self.nu_p, self.N, "T*nu_p"),
        ):
            if abs(prod - n) > 1e-9 * max(1.0, abs(prod)):
                raise ValueError(f"{what} = {prod} is not the integer {n}")
        if self.M * self.N != round(self.B * self.T):
            raise ValueError("M*N must equal round(B*T)")

    @classmethod
    def from_doppler_period(cls, B: float, T: float, nu_p: float) -> "FrameDims":
        tau_p = 1.0 / nu_p
        M = round(B * tau_p)
        N = round(T * nu_p)
        return cls(M=M, N=N, B=B, T=T, tau_p=tau_p, nu_p=nu_p)

    @property
    def n_cells(self) -> int:
        return self.M * self.N


class QuasiPeriodicGrid:
    """M x N complex grid with quasi-periodic extension.

    The fundamental domain holds cells[k, l] for k in [0, M), l in [0, N).
    Values outside are defined by
        x[k + nM, l + mN] = exp(j*2*pi*n*l/N) * x[k, l]
    and are only ever produced through :meth:`ext`.
    """

    __slots__ = ("dims", "cells")

    def __init__(self, dims: FrameDims, cells: np.ndarray):
        cells = np.asarray(cells, dtype=np.complex128)
        if cells.shape != (dims.M, dims.N):
            raise ValueError(f"cells shape {cells.shape} != ({dims.M}, {dims.N})")
        self.dims = dims
        self.cells = cells

    @classmethod
    def zeros(cls, dims: FrameDims) -> "QuasiPeriodicGrid":
        return cls(dims, np.zeros((dims.M, dims.N), dtype=np.complex128))

    def ext(self, k, l) -> np.ndarray:
        """Evaluate the quasi-periodic extension at integer indices (k, l).

        Accepts scalars or broadcastable integer arrays.
        """
        k = np.asarray(k)
        l = np.asarray(l)
        n = np.floor_divide(k, self.dims.M)
        k0 = np.mod(k, self.dims.M)
        l0 = np.mod(l, self.dims.N)
        phase = np.exp(2j * np.pi * n * l0 / self.dims.N)
        return phase * self.cells[k0, l0]

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.cells) ** 2))

    def copy(self) -> "QuasiPeriodicGrid":
        return QuasiPeriodicGrid(self.dims, self.cells.copy())


@dataclass
class DiscreteDDFilter:
    """Sparse delay-Doppler filter: taps map integer (k, l) to complex gain.

    Taps may sit anywhere in Z^2; twisted convolution accounts for the
    quasi-periodic extension of the signal it acts on.
    """

    taps: Dict[Tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        self.taps = {
            (int(k), int(l)): complex(g) for (k, l), g in self.taps.items() if g != 0
        }

    @property
    def support(self) -> Tuple[int, int, int, int]:
        """(k_min, k_max, l_min, l_max) bounding box; zeros for empty filter."""
        if not self.taps:
            return (0, 0, 0, 0)
        ks = [k for k, _ in self.taps]
        ls = [l for _, l in self.taps]
        return (min(ks), max(ks), min(ls), max(ls))

    def as_arrays(self):
        if not self.taps:
            z = np.zeros(0)
            return z.astype(int), z.astype(int), z.astype(complex)
        kk, ll, gg = zip(*[(k, l, g) for (k, l), g in self.taps.items()])
        return np.array(kk, dtype=int), np.array(ll, dtype=int), np.array(gg)

    def scaled(self, c: complex) -> "DiscreteDDFilter":
        return DiscreteDDFilter({kl: c * g for kl, g in self.taps.items()})

    def energy(self) -> float:
        return float(sum(abs(g) ** 2 for g in self.taps.values()))


def identity_filter() -> DiscreteDDFilter:
    return DiscreteDDFilter({(0, 0): 1.0})


def discrete_zak_transform(td: np.ndarray, dims: FrameDims) -> QuasiPeriodicGrid:
    """Map a length M*N time frame to its M x N delay-Doppler grid.

    cells[k, l] = (1/sqrt(N)) * sum_n td[k + n*M] * exp(-j*2*pi*n*l/N).
    Unitary: the squared norm of the grid equals that of the input.
    """
    td = np.asarray(td, dtype=np.complex128)
    if td.shape != (dims.n_cells,):
        raise ValueError(f"time frame must have length {dims.n_cells}, got {td.shape}")
    rows = td.reshape(dims.N, dims.M)  # rows[n, k] = td[k + n*M]
    cells = np.fft.fft(rows, axis=0).T / np.sqrt(dims.N)
    return QuasiPeriodicGrid(dims, cells)


def inverse_discrete_zak_transform(grid: QuasiPeriodicGrid) -> np.ndarray:
    """Exact inverse of :func:`discrete_zak_transform`."""
    dims = grid.dims
    # ifft carries 1/N; the inverse wants (1/sqrt(N)) * sum_l cells * e^{+j2pi nl/N}
    rows = np.fft.ifft(grid.cells.T, axis=0) * np.sqrt(dims.N)
    return rows.reshape(dims.n_cells)


def discrete_twisted_convolve(
    filt: DiscreteDDFilter, grid: QuasiPeriodicGrid
) -> QuasiPeriodicGrid:
    """Twisted convolution of a sparse filter with a quasi-periodic grid.

    out[k, l] = sum_taps g(k', l') * x_ext[k - k', l - l']
                * exp(j*2*pi*l'*(k - k')/(M*N))

    The output satisfies the quasi-periodic extension rule exactly.
    """
    dims = grid.dims
    M, N = dims.M, dims.N
    out = np.zeros((M, N), dtype=np.complex128)
    if not filt.taps:
        return QuasiPeriodicGrid(dims, out)
    kk = np.arange(M)[:, None]
    ll = np.arange(N)[None, :]
    for (dk, dl), g in filt.taps.items():
        lag_k = kk - dk  # true (unwrapped) delay lag, may be negative
        twist = np.exp(2j * np.pi * dl * lag_k / (M * N))
        out += g * twist * grid.ext(lag_k, ll - dl)
    return QuasiPeriodicGrid(dims, out)


def compose_filters(
    h1: DiscreteDDFilter, h2: DiscreteDDFilter, dims: FrameDims
) -> DiscreteDDFilter:
    """Twisted convolution h1 *sigma h2 of two sparse filters (no wrap).

    out[k, l] = sum h1[k', l'] h2[k - k', l - l'] exp(j*2*pi*l'(k - k')/(M*N)).
    Support grows additively.  Not commutative.
    """
    MN = dims.n_cells
    out: Dict[Tuple[int, int], complex] = {}
    for (k1, l1), g1 in h1.taps.items():
        for (k2, l2), g2 in h2.taps.items():
            k, l = k1 + k2, l1 + l2
            phase = np.exp(2j * np.pi * l1 * k2 / MN)
            out[(k, l)] = out.get((k, l), 0.0) + g1 * g2 * phase
    return DiscreteDDFilter(out)
