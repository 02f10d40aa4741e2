import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zaklink.dd_core import (
    DiscreteDDFilter,
    FrameDims,
    QuasiPeriodicGrid,
    compose_filters,
    discrete_twisted_convolve,
    discrete_zak_transform,
    identity_filter,
    inverse_discrete_zak_transform,
)


def dims_for(M, N, B=8e3):
    T = M * N / B
    return FrameDims(M, N, B, T, M / B, B / M)


DIMS_84 = dims_for(8, 4)


def rand_grid(dims, seed=0):
    rng = np.random.default_rng(seed)
    cells = rng.standard_normal((dims.M, dims.N)) + 1j * rng.standard_normal(
        (dims.M, dims.N)
    )
    return QuasiPeriodicGrid(dims, cells)


class TestFrameDims:
    def test_valid(self):
        d = FrameDims.from_doppler_period(672e3, 1e-3, 12e3)
        assert (d.M, d.N) == (56, 12)
        assert d.tau_p * d.nu_p == pytest.approx(1.0, abs=1e-15)

    def test_rejects_non_integer_products(self):
        with pytest.raises(ValueError):
            FrameDims(5, 4, 8e3, 4e-3, 1.1e-3, 1 / 1.1e-3)

    def test_rejects_bad_period_product(self):
        with pytest.raises(ValueError):
            FrameDims(8, 4, 8e3, 4e-3, 1e-3, 1.5e3)


class TestZakTransformPair:
    def test_single_cell_identity(self):
        d = dims_for(1, 1)
        g = discrete_zak_transform(np.array([2.0 - 1.0j]), d)
        assert g.cells[0, 0] == pytest.approx(2.0 - 1.0j)

    def test_impulse_maps_to_flat_column(self):
        d = DIMS_84
        k0 = 3
        td = np.zeros(d.n_cells, dtype=complex)
        td[k0] = 1.0
        g = discrete_zak_transform(td, d)
        expected = np.zeros((d.M, d.N), dtype=complex)
        expected[k0, :] = 1.0 / np.sqrt(d.N)
        np.testing.assert_allclose(g.cells, expected, atol=1e-15)

    def test_single_cell_inverse_value(self):
        # one grid cell at (0,0) for M=2, N=2 spreads into two pulses
        d = dims_for(2, 2)
        g = QuasiPeriodicGrid.zeros(d)
        g.cells[0, 0] = 1.0
        td = inverse_discrete_zak_transform(g)
        np.testing.assert_allclose(
            td, np.array([1 / np.sqrt(2), 0, 1 / np.sqrt(2), 0]), atol=1e-15
        )

    @pytest.mark.parametrize("M,N", [(2, 2), (8, 4), (56, 12), (336, 2)])
    def test_round_trips_and_unitarity(self, M, N):
        d = dims_for(M, N, B=672e3 if M * N == 672 else 8e3)
        rng = np.random.default_rng(M * 100 + N)
        td = rng.standard_normal(M * N) + 1j * rng.standard_normal(M * N)
        g = discrete_zak_transform(td, d)
        assert np.abs(inverse_discrete_zak_transform(g) - td).max() < 1e-12
        assert g.norm_sq() == pytest.approx(np.sum(np.abs(td) ** 2), rel=1e-12)
        g2 = rand_grid(d, seed=M + N)
        fwd = discrete_zak_transform(inverse_discrete_zak_transform(g2), d)
        assert np.abs(fwd.cells - g2.cells).max() < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            discrete_zak_transform(np.zeros(7), DIMS_84)


class TestQuasiPeriodicExtension:
    @given(
        n=st.integers(-3, 3),
        m=st.integers(-3, 3),
        k=st.integers(0, 7),
        l=st.integers(0, 3),
    )
    @settings(max_examples=60, deadline=None)
    def test_extension_rule(self, n, m, k, l):
        g = rand_grid(DIMS_84, seed=1)
        lhs = g.ext(k + n * 8, l + m * 4)
        rhs = np.exp(2j * np.pi * n * l / 4) * g.cells[k, l]
        assert abs(lhs - rhs) < 1e-12


class TestTwistedConvolution:
    def test_identity_filter(self):
        g = rand_grid(DIMS_84, seed=2)
        out = discrete_twisted_convolve(identity_filter(), g)
        np.testing.assert_array_equal(out.cells, g.cells)

    def test_hand_shift_example(self):
        d = dims_for(2, 2)
        x = QuasiPeriodicGrid.zeros(d)
        x.cells[0, 0] = 1.0
        out = discrete_twisted_convolve(DiscreteDDFilter({(1, 0): 1.0}), x)
        expected = np.zeros((2, 2), dtype=complex)
        expected[1, 0] = 1.0
        np.testing.assert_allclose(out.cells, expected, atol=1e-15)

    def test_matches_scalar_reference(self):
        # direct per-cell evaluation through the accessor
        d = DIMS_84
        rng = np.random.default_rng(3)
        filt = DiscreteDDFilter(
            {
                (int(rng.integers(-9, 10)), int(rng.integers(-6, 7))): complex(
                    rng.standard_normal(), rng.standard_normal()
                )
                for _ in range(6)
            }
        )
        x = rand_grid(d, seed=4)
        out = discrete_twisted_convolve(filt, x)
        for k in range(d.M):
            for l in range(d.N):
                acc = 0.0
                for (dk, dl), gain in filt.taps.items():
                    acc += (
                        gain
                        * x.ext(k - dk, l - dl)
                        * np.exp(2j * np.pi * dl * (k - dk) / d.n_cells)
                    )
                assert abs(out.cells[k, l] - acc) < 1e-12

    def test_output_is_quasi_periodic(self):
        d = DIMS_84
        filt = DiscreteDDFilter({(3, -2): 0.7 + 0.2j, (-1, 5): -0.3j, (9, 1): 1.1})
        out = discrete_twisted_convolve(filt, rand_grid(d, seed=5))
        kk = np.arange(d.M)[:, None] - 2 * d.M
        ll = np.arange(d.N)[None, :] + d.N
        wrapped = out.ext(kk, ll)
        phases = np.exp(2j * np.pi * (-2) * np.arange(d.N)[None, :] / d.N)
        np.testing.assert_allclose(wrapped, phases * out.cells, atol=1e-12)

    @given(a=st.complex_numbers(max_magnitude=5), b=st.complex_numbers(max_magnitude=5))
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, a, b):
        d = dims_for(4, 2)
        filt = DiscreteDDFilter({(1, 1): 1.0 - 0.5j, (0, -1): 0.25})
        x = rand_grid(d, seed=6)
        y = rand_grid(d, seed=7)
        mixed = QuasiPeriodicGrid(d, a * x.cells + b * y.cells)
        lhs = discrete_twisted_convolve(filt, mixed).cells
        rhs = (
            a * discrete_twisted_convolve(filt, x).cells
            + b * discrete_twisted_convolve(filt, y).cells
        )
        scale = max(1.0, np.abs(rhs).max())
        assert np.abs(lhs - rhs).max() < 1e-12 * scale


class TestComposeFilters:
    def test_identity_neutral(self):
        d = DIMS_84
        h = DiscreteDDFilter({(2, 1): 0.5 + 1j, (0, -2): -0.25})
        for left, right in ((identity_filter(), h), (h, identity_filter())):
            comp = compose_filters(left, right, d)
            assert set(comp.taps) == set(h.taps)
            for key, val in h.taps.items():
                assert comp.taps[key] == pytest.approx(val)

    def test_single_tap_phase_and_noncommutativity(self):
        d = DIMS_84
        a = DiscreteDDFilter({(0, 1): 1.0})
        b = DiscreteDDFilter({(1, 0): 1.0})
        ab = compose_filters(a, b, d)
        ba = compose_filters(b, a, d)
        assert ab.taps[(1, 1)] == pytest.approx(np.exp(2j * np.pi / d.n_cells))
        assert ba.taps[(1, 1)] == pytest.approx(1.0)
        assert abs(ab.taps[(1, 1)] - ba.taps[(1, 1)]) > 1e-4

    @pytest.mark.parametrize("seed", range(10))
    def test_associativity_against_grid_action(self, seed):
        d = dims_for(4, 4, B=4e3)
        rng = np.random.default_rng(seed)

        def rand_filter():
            return DiscreteDDFilter(
                {
                    (int(rng.integers(-4, 5)), int(rng.integers(-4, 5))): complex(
                        rng.standard_normal(), rng.standard_normal()
                    )
                    for _ in range(3)
                }
            )

        h1, h2 = rand_filter(), rand_filter()
        x = rand_grid(d, seed=seed + 50)
        lhs = discrete_twisted_convolve(compose_filters(h1, h2, d), x).cells
        rhs = discrete_twisted_convolve(h1, discrete_twisted_convolve(h2, x)).cells
        assert np.abs(lhs - rhs).max() < 1e-10 * max(1.0, np.abs(rhs).max())
