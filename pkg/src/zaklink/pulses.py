"""Factorizable transmit pulses.

A pulse is w(tau, nu) = W1(tau) * W2(nu) with unit-energy factors.  Three
kinds are provided:

* ``sinc``       -- near-brick-wall profiles.  The raw sinc decays too
                    slowly to truncate, so both factors carry a wide
                    Gaussian envelope (several times wider than the
                    gauss_sinc window) before hard truncation; energy is
                    renormalized.  This keeps the narrow main lobe and the
                    heavy leakage that characterize the kind.
* ``gauss``      -- Gaussian in both axes, std alpha_tau/(2B) in delay and
                    alpha_nu/(2T) in Doppler.
* ``gauss_sinc`` -- sinc times a Gaussian window of std 2/B (delay) and
                    2/T (Doppler), scaled by the alpha factors.

The time window w2(t) (Fourier transform of W2) is available in closed
form for all kinds: a Gaussian, or an erf-smoothed rectangle of width T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import erf

from .dd_core import FrameDims

__all__ = ["PulseShape", "make_pulse", "PULSE_KINDS"]

PULSE_KINDS = ("sinc", "gauss", "gauss_sinc")

# envelopes are truncated where they fall below this fraction of their peak
TRUNC_REL = 1e-6
_TRUNC_X = math.sqrt(-math.log(TRUNC_REL))  # exp(-x^2) = TRUNC_REL


def _clip(x, lo, hi):
    return min(max(x, lo), hi)


@dataclass(frozen=True)
class PulseShape:
    """Concrete factorizable pulse bound to a frame geometry."""

    kind: str
    dims: FrameDims
    alpha_tau: float
    alpha_nu: float
    # resolved numeric parameters
    sigma1: float  # Gaussian envelope std along delay (s); inf for pure gauss kind
    sigma2: float  # Gaussian envelope std along Doppler (Hz)
    gauss_std_tau: float  # only for kind == "gauss"
    gauss_std_nu: float
    delay_radius: float  # W1 support is [-delay_radius, delay_radius]
    doppler_radius: float  # W2 support for quadrature
    window_radius: float  # w2(t) support
    w1_norm: float
    w2_norm: float

    # -- delay profile ----------------------------------------------------
    def w1(self, tau) -> np.ndarray:
        """Unit-energy delay profile W1(tau); zero outside its support."""
        tau = np.asarray(tau, dtype=float)
        B = self.dims.B
        if self.kind == "gauss":
            s = self.gauss_std_tau
            val = np.exp(-(tau**2) / (4.0 * s * s))
        else:
            val = np.sinc(B * tau) * np.exp(-(tau**2) / (2.0 * self.sigma1**2))
        out = self.w1_norm * val
        return np.where(np.abs(tau) <= self.delay_radius, out, 0.0)

    # -- Doppler profile ---------------------------------------------------
    def w2_doppler(self, nu) -> np.ndarray:
        """Unit-energy Doppler profile W2(nu); zero outside its support."""
        nu = np.asarray(nu, dtype=float)
        T = self.dims.T
        if self.kind == "gauss":
            s = self.gauss_std_nu
            val = np.exp(-(nu**2) / (4.0 * s * s))
        else:
            val = np.sinc(T * nu) * np.exp(-(nu**2) / (2.0 * self.sigma2**2))
        out = self.w2_norm * val
        return np.where(np.abs(nu) <= self.doppler_radius, out, 0.0)

    # -- time window (FT of the untruncated Doppler profile) ---------------
    def window(self, t) -> np.ndarray:
        """w2(t) = integral W2(nu) exp(j 2 pi nu t) dnu, centered at t = 0.

        Real for the symmetric profiles used here.
        """
        t = np.asarray(t, dtype=float)
        T = self.dims.T
        if self.kind == "gauss":
            s = self.gauss_std_nu
            return self.w2_norm * 2.0 * s * math.sqrt(math.pi) * np.exp(
                -4.0 * math.pi**2 * s * s * t * t
            )
        # sinc * gaussian taper: erf-smoothed rectangle of width T
        a = math.sqrt(2.0) * math.pi * self.sigma2
        return (
            self.w2_norm
            / (2.0 * T)
            * (erf(a * (t + T / 2.0)) - erf(a * (t - T / 2.0)))
        )

    def w1_taps(self, Q: int) -> Tuple[np.ndarray, int]:
        """W1 sampled on the oversampled grid. Returns (taps, start) where
        taps[j] = W1((start + j)/(Q*B))."""
        n1 = int(math.floor(self.delay_radius * Q * self.dims.B))
        j = np.arange(-n1, n1 + 1)
        return self.w1(j / (Q * self.dims.B)), -n1

    def window_crit_range(self, t_center: float) -> Tuple[int, int]:
        """Inclusive range of critical sample indices i (t = i/B) where the
        window centered at t_center is nonzero."""
        B = self.dims.B
        lo = int(math.ceil((t_center - self.window_radius) * B))
        hi = int(math.floor((t_center + self.window_radius) * B))
        return lo, hi


def _unit_norm(fn, radius, step) -> float:
    x = np.arange(-radius, radius + step, step)
    y = np.abs(fn(x)) ** 2
    e = np.sum((y[1:] + y[:-1]) * 0.5) * step
    return 1.0 / math.sqrt(e)


def make_pulse(
    kind: str, dims: FrameDims, alpha_tau: float = 1.0, alpha_nu: float = 1.0
) -> PulseShape:
    """Build a unit-energy pulse of the given kind for the given frame."""
    if kind not in PULSE_KINDS:
        raise ValueError(f"unknown pulse kind {kind!r}")
    B, T = dims.B, dims.T
    tau_p, nu_p = dims.tau_p, dims.nu_p

    sigma1 = sigma2 = math.inf
    g_tau = g_nu = math.nan
    if kind == "sinc":
        # wide taper: several times the gauss_sinc window, shrunk when the
        # period itself is only a few bins.  The delay taper is sized so the
        # self-response keeps >= 99% of its energy in the dominant tap while
        # the far leakage stays above the gauss_sinc level; the Doppler
        # taper is wide so the frame window's edges stay sharp.
        sigma1 = min(max(tau_p / 4.0, 2.5 / B), 11.0 / B, tau_p / 2.0)
        sigma2 = min(max(4.0 * nu_p / 3.0, 2.5 / T), 16.0 / T)
    elif kind == "gauss_sinc":
        sigma1 = min(2.0 * alpha_tau / B, tau_p / 4.0)
        sigma2 = min(2.0 * alpha_nu / T, nu_p / 4.0)
    else:  # gauss
        g_tau = alpha_tau / (2.0 * B)
        g_nu = alpha_nu / (2.0 * T)
    if kind == "gauss":
        delay_radius = min(2.0 * _TRUNC_X * g_tau, tau_p / 2.0)
        doppler_radius = 2.0 * _TRUNC_X * g_nu
    else:
        delay_radius = min(math.sqrt(2.0) * _TRUNC_X * sigma1, tau_p / 2.0)
        doppler_radius = math.sqrt(2.0) * _TRUNC_X * sigma2

    # normalize to unit energy on a fine grid
    proto = PulseShape(
        kind=kind,
        dims=dims,
        alpha_tau=alpha_tau,
        alpha_nu=alpha_nu,
        sigma1=sigma1,
        sigma2=sigma2,
        gauss_std_tau=g_tau,
        gauss_std_nu=g_nu,
        delay_radius=delay_radius,
        doppler_radius=doppler_radius,
        window_radius=0.0,
        w1_norm=1.0,
        w2_norm=1.0,
    )
    n1 = _unit_norm(proto.w1, delay_radius, 1.0 / (16.0 * B))
    n2 = _unit_norm(proto.w2_doppler, doppler_radius, 1.0 / (16.0 * T))

    if kind == "gauss":
        window_radius = _TRUNC_X / (2.0 * math.pi * g_nu)
    else:
        a = math.sqrt(2.0) * math.pi * sigma2
        window_radius = T / 2.0 + (_TRUNC_X + 0.5) / a

    return PulseShape(
        kind=kind,
        dims=dims,
        alpha_tau=alpha_tau,
        alpha_nu=alpha_nu,
        sigma1=sigma1,
        sigma2=sigma2,
        gauss_std_tau=g_tau,
        gauss_std_nu=g_nu,
        delay_radius=delay_radius,
        doppler_radius=doppler_radius,
        window_radius=window_radius,
        w1_norm=n1,
        w2_norm=n2,
    )
