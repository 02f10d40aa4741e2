import math

import numpy as np
import pytest

from zaklink.channel import (
    ChannelDrawConfig,
    DDSpreadingFunction,
    TdSignal,
    add_awgn,
    apply_channel_td,
    draw_veh_a,
)
from zaklink.ofdm_modem import (
    DmrsConfig,
    OfdmNumerology,
    compute_ofdm_io_matrix,
    declared_overhead_policy,
    demodulate_ofdm,
    estimate_channel_dmrs,
    ici_energy_fraction,
    make_dmrs,
    make_numerology,
    mmse_equalize_per_carrier,
    modulate_ofdm,
    ofdm_overheads,
)


def rand_grid(num, seed=0):
    rng = np.random.default_rng(seed)
    shape = (num.n_symbols, num.n_subcarriers)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


class TestNumerology:
    def test_standard_slots(self):
        n15 = make_numerology(15e3)
        assert (n15.n_symbols, n15.t_cp) == (14, 4.7e-6)
        n30 = make_numerology(30e3)
        assert n30.t_cp == pytest.approx(2.35e-6)
        n60e = make_numerology(60e3, extended_cp=True)
        assert n60e.n_symbols == 12
        assert n60e.t_cp == pytest.approx(0.25e-3 / 12 - 1 / 60e3)
        # 12 extended-CP symbols fill the slot exactly
        assert n60e.n_symbols * (n60e.symbol_body + n60e.t_cp) == pytest.approx(0.25e-3)

    def test_slot_resource_is_720(self):
        for scs, ext in ((15e3, False), (30e3, False), (60e3, False)):
            num = make_numerology(scs, ext)
            slot = num.n_symbols * (num.symbol_body + num.t_cp)
            # occupied time-bandwidth: a little under 720 kHz*ms due to CP
            assert num.bandwidth * slot == pytest.approx(720e3 * 1e-3, rel=0.002)

    def test_rejects_long_slot(self):
        with pytest.raises(ValueError):
            OfdmNumerology(15e3, 48, 14, 8e-6, False)


class TestModulateDemodulate:
    def test_round_trip_exact(self):
        num = make_numerology(15e3)
        X = rand_grid(num, 1)
        Y = demodulate_ofdm(modulate_ofdm(X, num), num)
        assert np.abs(Y - X).max() < 1e-10

    def test_cyclic_prefix_copies_tail(self):
        num = make_numerology(15e3)
        x = modulate_ofdm(rand_grid(num, 2), num)
        nb, ncp = num.body_samples, num.cp_samples
        for s in range(num.n_symbols):
            seg = x.samples[s * (nb + ncp) : (s + 1) * (nb + ncp)]
            np.testing.assert_array_equal(seg[:ncp], seg[ncp:][-ncp:])

    def test_single_subcarrier_is_tone(self):
        num = make_numerology(15e3)
        X = np.zeros((num.n_symbols, num.n_subcarriers), dtype=complex)
        k0 = 7
        X[0, k0] = 1.0
        x = modulate_ofdm(X, num)
        j = np.arange(num.body_samples)
        body = x.samples[num.cp_samples : num.cp_samples + num.body_samples]
        expected = np.exp(2j * np.pi * k0 * j / num.body_samples) / math.sqrt(
            num.symbol_body
        )
        np.testing.assert_allclose(body, expected, atol=1e-12)

    def test_delay_only_channel_is_pure_rotation(self):
        num = make_numerology(15e3)
        tau = 3.1e-6
        chan = DDSpreadingFunction(((0.8 - 0.3j, tau, 0.0),))
        X = rand_grid(num, 3)
        Y = demodulate_ofdm(apply_channel_td(modulate_ofdm(X, num), chan), num)
        m = np.arange(num.n_subcarriers)
        rot = (0.8 - 0.3j) * np.exp(-2j * np.pi * m * num.scs * tau)
        np.testing.assert_allclose(Y, X * rot[None, :], atol=2e-4)

    def test_awgn_fd_variance_uniform(self):
        num = make_numerology(15e3)
        n0 = 0.2
        acc = np.zeros((num.n_symbols, num.n_subcarriers))
        trials = 150
        n = num.n_symbols * (num.body_samples + num.cp_samples)
        for s in range(trials):
            noise = add_awgn(np.zeros(n, dtype=complex), 0.0, n0 * num.rate, 500 + s)
            acc += np.abs(demodulate_ofdm(TdSignal(noise, num.rate, -num.cp_samples), num)) ** 2
        var = acc / trials
        assert var.mean() == pytest.approx(n0, rel=0.02)
        assert var.std() / var.mean() < 0.15


class TestIoMatrix:
    def test_zero_doppler_diagonal(self):
        chan = draw_veh_a(ChannelDrawConfig(nu_max=0.0, rng_seed=4, delay_scale=1.0))
        H = compute_ofdm_io_matrix(chan, make_numerology(15e3), 3)
        off = H - np.diag(np.diag(H))
        assert np.abs(off).max() < 1e-12

    def test_half_spacing_doppler_value(self):
        num = make_numerology(15e3)
        chan = DDSpreadingFunction(((1.0, 0.0, num.scs / 2),))
        H = compute_ofdm_io_matrix(chan, num, 0)
        m = 5
        assert H[m, m] == pytest.approx(1j * 2 / math.pi, abs=1e-12)

    def test_row_energy_invariant_under_delay(self):
        num = make_numerology(15e3)
        nu = 700.0
        h0 = compute_ofdm_io_matrix(DDSpreadingFunction(((1.0, 0.0, nu),)), num, 0)
        h1 = compute_ofdm_io_matrix(DDSpreadingFunction(((1.0, 2.2e-6, nu),)), num, 0)
        e0 = np.sum(np.abs(h0) ** 2, axis=1)
        e1 = np.sum(np.abs(h1) ** 2, axis=1)
        np.testing.assert_allclose(e0, e1, rtol=1e-10)

    def test_diagonal_dominance_decays_with_doppler(self):
        num = make_numerology(15e3)
        T = num.symbol_body
        fracs = [ici_energy_fraction(x / T, T) for x in (0.0, 0.1, 0.25, 0.5)]
        assert fracs == sorted(fracs)
        assert fracs[0] == 0.0
        # diagonal magnitude matches sinc^2 exactly
        for x in (0.1, 0.25, 0.5):
            H = compute_ofdm_io_matrix(
                DDSpreadingFunction(((1.0, 0.0, x / T),)), num, 0
            )
            m = 20
            assert abs(H[m, m]) ** 2 == pytest.approx(np.sinc(x) ** 2, abs=1e-10)

    def test_td_cross_validation(self):
        num = make_numerology(15e3)
        chan = draw_veh_a(
            ChannelDrawConfig(nu_max=800.0, rng_seed=8, delay_scale=4.7 / 2.51)
        )
        X = rand_grid(num, 9)
        Y = demodulate_ofdm(apply_channel_td(modulate_ofdm(X, num), chan), num)
        Yp = np.stack(
            [
                compute_ofdm_io_matrix(chan, num, s, kernel="sampled") @ X[s]
                for s in range(num.n_symbols)
            ]
        )
        assert np.linalg.norm(Y - Yp) / np.linalg.norm(Yp) <= 1e-3


class TestDmrsEstimation:
    def _run(self, chan, num, dmrs, seed=0):
        rng = np.random.default_rng(seed)
        n_sym, n_sub = num.n_symbols, num.n_subcarriers
        sc = dmrs.pilot_subcarriers(n_sub)
        grid = rand_grid(num, seed)
        pilot_values = {}
        for s in dmrs.time_positions:
            vals = np.exp(2j * np.pi * rng.random(len(sc)))
            grid[s, sc] = vals
            pilot_values[s] = vals
        rx = demodulate_ofdm(apply_channel_td(modulate_ofdm(grid, num), chan), num)
        est = estimate_channel_dmrs(rx, dmrs, pilot_values, num)
        truth = np.stack(
            [
                np.diag(compute_ofdm_io_matrix(chan, num, s, kernel="sampled"))
                for s in range(n_sym)
            ]
        )
        return est, truth

    def test_flat_static_channel_exact(self):
        num = make_numerology(15e3)
        dmrs = make_dmrs(num, (2,), 2)
        chan = DDSpreadingFunction(((0.6 + 0.1j, 0.0, 0.0),))
        est, truth = self._run(chan, num, dmrs)
        np.testing.assert_allclose(est, truth, atol=2e-4)

    def test_frequency_selective_interpolation(self):
        num = make_numerology(15e3)
        dmrs = make_dmrs(num, (2,), 2)
        chan = draw_veh_a(ChannelDrawConfig(nu_max=0.0, rng_seed=11, delay_scale=1.15 / 2.51))
        est, truth = self._run(chan, num, dmrs)
        nmse = np.sum(np.abs(est - truth) ** 2) / np.sum(np.abs(truth) ** 2)
        assert 10 * math.log10(nmse) <= -25.0

    def test_time_selectivity_degrades_single_symbol(self):
        num = make_numerology(15e3)
        dmrs = make_dmrs(num, (2,), 2)
        out = {}
        for nu_max in (100.0, 2000.0):
            chan = draw_veh_a(ChannelDrawConfig(nu_max=nu_max, rng_seed=13, delay_scale=1.0))
            est, truth = self._run(chan, num, dmrs, seed=5)
            nmse = np.sum(np.abs(est - truth) ** 2) / np.sum(np.abs(truth) ** 2)
            out[nu_max] = 10 * math.log10(nmse)
        assert out[2000.0] - out[100.0] >= 10.0

    def test_requires_pilots(self):
        with pytest.raises(ValueError):
            DmrsConfig(())


class TestMmse:
    def test_noiseless_exact_inverse(self):
        rng = np.random.default_rng(3)
        rx_clean = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        h = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        x = mmse_equalize_per_carrier(rx_clean * h, h, 0.0)
        np.testing.assert_allclose(x, rx_clean, atol=1e-12)

    def test_residual_tracks_ici_floor(self):
        # at high Doppler the post-equalization error approaches the ICI
        # power predicted by the off-diagonal rows
        num = make_numerology(15e3)
        nu = 2000.0
        chan = DDSpreadingFunction(((1.0, 0.0, nu),))
        X = rand_grid(num, 21)
        Y = demodulate_ofdm(apply_channel_td(modulate_ofdm(X, num), chan), num)
        truth = np.stack(
            [
                np.diag(compute_ofdm_io_matrix(chan, num, s, kernel="sampled"))
                for s in range(num.n_symbols)
            ]
        )
        xhat = mmse_equalize_per_carrier(Y, truth, 0.0)
        err = np.mean(np.abs(xhat - X) ** 2)
        floor = ici_energy_fraction(nu, num.symbol_body) / np.mean(np.abs(truth) ** 2)
        assert 10 * math.log10(err) <= 10 * math.log10(floor) + 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mmse_equalize_per_carrier(np.zeros((2, 3)), np.zeros((3, 2)), 0.1)


class TestOverheads:
    def test_cp_fraction_example(self):
        num = make_numerology(15e3)
        cp, _, _ = ofdm_overheads(num, None)
        assert cp == pytest.approx(0.066, abs=5e-4)

    def test_zero_everything(self):
        num = OfdmNumerology(15e3, 48, 14, 0.0, False)
        cp, pf, tot = ofdm_overheads(num, None)
        assert cp == 0.0 and pf == 0.0 and tot == 0.0

    def test_pilot_fraction_counts_res(self):
        num = make_numerology(15e3)
        dmrs = make_dmrs(num, (2, 7, 11), 2)
        _, pf, _ = ofdm_overheads(num, dmrs)
        assert pf == pytest.approx(3 * 24 / (14 * 48))

    def test_declared_policy_curve(self):
        # ascending, endpoints near the reference 7.68% -> 26.4%
        tots = []
        for nu_s in (1e3, 2e3, 3e3, 4e3):
            num, dmrs = declared_overhead_policy(nu_s, 1.15e-6)
            tots.append(ofdm_overheads(num, dmrs)[2])
        assert all(b > a for a, b in zip(tots, tots[1:]))
        assert abs(tots[0] - 0.0768) <= 0.01
        assert abs(tots[-1] - 0.264) <= 0.01
