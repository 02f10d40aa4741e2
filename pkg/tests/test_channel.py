import math

import numpy as np
import pytest

from zaklink.channel import (
    VEH_A_PDP,
    ChannelDrawConfig,
    DDSpreadingFunction,
    TdSignal,
    add_awgn,
    apply_channel_td,
    coherence_metrics,
    draw_veh_a,
    fractional_delay_taps,
)

RATE = 4 * 672e3


def bandlimited_burst(n=4096, f_frac=0.1, seed=0):
    """Random tone mixture well inside the band, smoothly tapered so the
    burst itself stays bandlimited, as TdSignal."""
    rng = np.random.default_rng(seed)
    t = np.arange(n) / RATE
    x = np.zeros(n, dtype=complex)
    for _ in range(8):
        f = rng.uniform(-f_frac, f_frac) * RATE
        x += rng.standard_normal() * np.exp(2j * np.pi * f * t)
    ramp = 400
    win = np.ones(n)
    edge = 0.5 * (1 - np.cos(np.pi * np.arange(ramp) / ramp))
    win[:ramp] = edge
    win[-ramp:] = edge[::-1]
    return TdSignal(x * win, RATE)


class TestVehADraw:
    def test_table_delays_and_powers(self):
        assert [d for d, _ in VEH_A_PDP] == pytest.approx(
            [0.0, 0.31e-6, 0.71e-6, 1.09e-6, 1.73e-6, 2.51e-6]
        )
        assert [p for _, p in VEH_A_PDP] == [0, -1, -9, -10, -15, -20]
        chan = draw_veh_a(ChannelDrawConfig(rng_seed=0))
        assert len(chan.paths) == 6
        np.testing.assert_allclose(chan.delays, [d for d, _ in VEH_A_PDP])

    def test_zero_doppler(self):
        chan = draw_veh_a(ChannelDrawConfig(nu_max=0.0, rng_seed=1))
        assert np.all(chan.dopplers == 0.0)

    def test_delay_scaling(self):
        scale = 4.7 / 2.51
        chan = draw_veh_a(ChannelDrawConfig(rng_seed=2, delay_scale=scale))
        assert chan.delays.max() == pytest.approx(4.7e-6)

    def test_gain_normalization(self):
        # mean total power over draws equals one
        total = 0.0
        n = 4000
        for seed in range(n):
            chan = draw_veh_a(ChannelDrawConfig(rng_seed=seed))
            total += np.sum(np.abs(chan.gains) ** 2)
        assert total / n == pytest.approx(1.0, rel=0.05)

    def test_jakes_bound_and_mean(self):
        nu_max = 800.0
        vals = []
        for seed in range(2000):
            chan = draw_veh_a(ChannelDrawConfig(nu_max=nu_max, rng_seed=seed))
            vals.extend(chan.dopplers)
        vals = np.array(vals)
        assert np.abs(vals).max() <= nu_max + 1e-9
        # cos(uniform) has std nu_max/sqrt(2)
        tol = 3 * nu_max / math.sqrt(2) / math.sqrt(len(vals))
        assert abs(vals.mean()) < tol

    def test_empty_pdp_rejected(self):
        with pytest.raises(ValueError):
            ChannelDrawConfig(pdp=())


class TestApplyChannel:
    def test_identity_path(self):
        x = bandlimited_burst()
        chan = DDSpreadingFunction(((1.0, 0.0, 0.0),))
        y = apply_channel_td(x, chan)
        assert y.start == 0
        np.testing.assert_allclose(y.samples[: len(x)], x.samples, atol=1e-12)

    def test_integer_delay_exact(self):
        x = bandlimited_burst(seed=1)
        d_samp = 11
        chan = DDSpreadingFunction(((1.0, d_samp / RATE, 0.0),))
        y = apply_channel_td(x, chan)
        i0 = -y.start + d_samp
        np.testing.assert_allclose(
            y.samples[i0 : i0 + len(x)], x.samples, atol=1e-12
        )

    def test_fractional_delay_passband(self):
        # pure tone in the passband, delayed by a non-integer amount
        n = 8192
        t = np.arange(n) / RATE
        f = 0.08 * RATE
        x = TdSignal(np.exp(2j * np.pi * f * t), RATE)
        tau = 3.37 / RATE
        y = apply_channel_td(x, DDSpreadingFunction(((1.0, tau, 0.0),)))
        ts = (y.start + np.arange(len(y.samples))) / RATE
        ideal = np.exp(2j * np.pi * f * (ts - tau))
        mid = slice(200, len(y.samples) - 200)
        assert np.abs(y.samples[mid] - ideal[mid]).max() < 1e-4

    def test_doppler_shifts_tone(self):
        n = 1 << 14
        t = np.arange(n) / RATE
        f0, nu = 50e3, 12e3
        x = TdSignal(np.exp(2j * np.pi * f0 * t), RATE)
        y = apply_channel_td(x, DDSpreadingFunction(((1.0, 0.0, nu),)))
        spec = np.abs(np.fft.fft(y.samples[: n]))
        freqs = np.fft.fftfreq(n, 1 / RATE)
        assert freqs[np.argmax(spec)] == pytest.approx(f0 + nu, abs=RATE / n)

    def test_superposition(self):
        chan = draw_veh_a(ChannelDrawConfig(nu_max=500.0, rng_seed=3))
        xa, xb = bandlimited_burst(seed=2), bandlimited_burst(seed=3)
        ya = apply_channel_td(xa, chan)
        yb = apply_channel_td(xb, chan)
        both = apply_channel_td(TdSignal(xa.samples + xb.samples, RATE), chan)
        np.testing.assert_allclose(
            both.samples, ya.samples + yb.samples, rtol=0, atol=1e-10 * np.abs(both.samples).max()
        )

    def test_energy_preserved_single_path(self):
        x = bandlimited_burst(seed=4)
        y = apply_channel_td(x, DDSpreadingFunction(((1.0, 2.6 / RATE, 0.0),)))
        assert np.sum(np.abs(y.samples) ** 2) == pytest.approx(
            np.sum(np.abs(x.samples) ** 2), rel=1e-6
        )

    def test_interp_kernel_passband_response(self):
        # the kernel realizes the delay with ~1e-6 response error over the
        # band a 4x-oversampled frame occupies
        for frac in (0.25, 0.5, 0.83):
            taps = fractional_delay_taps(frac)
            m = np.arange(-31, 33)
            for f in (0.01, 0.08, 0.15):
                H = np.sum(taps * np.exp(-2j * np.pi * f * m))
                assert abs(H - np.exp(-2j * np.pi * f * frac)) < 2e-6


class TestAwgn:
    def test_infinite_snr(self):
        x = np.ones(16, dtype=complex)
        np.testing.assert_array_equal(add_awgn(x, math.inf, 1.0, 0), x)

    def test_variance(self):
        x = np.zeros(10**6, dtype=complex)
        y = add_awgn(x, 7.0, 2.0, 42)
        var = np.mean(np.abs(y) ** 2)
        assert var == pytest.approx(2.0 / 10 ** 0.7, rel=0.01)

    def test_seed_repeatability(self):
        x = np.ones(100, dtype=complex)
        np.testing.assert_array_equal(add_awgn(x, 3.0, 1.0, 9), add_awgn(x, 3.0, 1.0, 9))
        assert not np.array_equal(add_awgn(x, 3.0, 1.0, 9), add_awgn(x, 3.0, 1.0, 10))

    def test_rejects_nonpositive_power(self):
        with pytest.raises(ValueError):
            add_awgn(np.ones(4, dtype=complex), 3.0, 0.0, 0)


class TestCoherence:
    def test_single_path(self):
        tau_s, nu_s, tc, bc = coherence_metrics(DDSpreadingFunction(((1.0, 1e-6, 50.0),)))
        assert tau_s == 0.0 and nu_s == 0.0
        assert tc == math.inf and bc == math.inf

    def test_veh_a_delay_spread(self):
        chan = draw_veh_a(ChannelDrawConfig(nu_max=0.0, rng_seed=5))
        tau_s, nu_s, _, _ = coherence_metrics(chan)
        assert tau_s == pytest.approx(2.51e-6)
        assert nu_s == 0.0

    def test_two_tone_doppler(self):
        chan = DDSpreadingFunction(((1.0, 0.0, 1e3), (0.5, 0.0, -1e3)))
        tau_s, nu_s, tc, _ = coherence_metrics(chan)
        assert nu_s == pytest.approx(2e3)
        assert tc == pytest.approx(0.5e-3)
