import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ges2n import (
    VARIANT_NAMES,
    BandSpec,
    ConfigError,
    DegenerateObjectiveError,
    Ges2nError,
    build_denominator,
    build_grid,
    build_numerator_base,
    build_weighting,
    evaluate_objective,
    process_numerator,
    variant_config,
)
from ges2n.objective import SparseRows


def selected(rows, grid, r):
    return grid.alpha[rows.indices[r]]


class TestVariants:
    def test_ranges(self):
        nf = variant_config("GES2N-Mean-Nf", 2.0, 10)
        np_ = variant_config("GES2N-Max-Np", 2.0, 10)
        ics = variant_config("GES2N-ICS2", 2.0, 10)
        assert (nf.alpha_n_min, nf.alpha_n_max, nf.numerator_mode) == (0.0, 22.0, "mean")
        assert (np_.alpha_n_min, np_.alpha_n_max, np_.numerator_mode) == (0.5, 22.0, "max")
        assert (ics.alpha_n_min, ics.alpha_n_max) == (0.0, 0.0)

    def test_unknown_name_lists_all_variants(self):
        with pytest.raises(ConfigError) as err:
            variant_config("GES2N-Median-Np", 1.0)
        for name in VARIANT_NAMES:
            assert name in str(err.value)

    def test_bandspec_validation(self):
        for kwargs in ({"alpha_c": 0}, {"alpha_c": 1, "n_h": 0}, {"alpha_c": 1, "band_width": -1}):
            with pytest.raises(ConfigError):
                BandSpec(**kwargs)


class TestNumerator:
    def test_two_bands_inclusive_edges(self):
        grid = build_grid(0.05, 3.0)
        base = build_numerator_base(BandSpec(1.0, 2, 0.1), grid)
        np.testing.assert_allclose(selected(base, grid, 0), [0.95, 1.0, 1.05])
        np.testing.assert_allclose(selected(base, grid, 1), [1.95, 2.0, 2.05])
        assert all(set(v) == {1.0} for v in base.values)

    def test_first_band_centred_on_alpha_c(self):
        grid = build_grid(0.01, 12.0)
        base = build_numerator_base(BandSpec(1.0), grid)
        assert base.n_rows == 10
        assert np.mean(selected(base, grid, 0)) == pytest.approx(1.0)

    def test_empty_band_rejected(self):
        with pytest.raises(Ges2nError):
            build_numerator_base(BandSpec(1.05, 1, 0.01), build_grid(0.1, 3.0))

    def test_mean_normalises_globally(self):
        grid = build_grid(0.05, 3.0)
        base = build_numerator_base(BandSpec(1.0, 2, 0.1), grid)
        mean = process_numerator(base, None, "mean")
        assert all(np.all(v == 1 / 6) for v in mean.values)
        assert mean.total() == pytest.approx(1.0)

    def test_max_picks_the_largest_bin(self):
        grid = build_grid(0.05, 2.0)
        base = build_numerator_base(BandSpec(1.0, 1, 0.1), grid)
        b = np.zeros(grid.n_f)
        b[base.indices[0]] = [5.0, 3.0, 1.0]
        mx = process_numerator(base, b, "max")
        assert grid.alpha[mx.indices[0][0]] == pytest.approx(0.95)
        np.testing.assert_array_equal(mx.values[0], [1.0])

    def test_max_ties_go_to_lowest_order(self):
        grid = build_grid(0.05, 2.0)
        base = build_numerator_base(BandSpec(1.0, 1, 0.1), grid)
        mx = process_numerator(base, np.full(grid.n_f, 2.0), "max")
        assert mx.indices[0][0] == base.indices[0][0]

    def test_unknown_mode(self):
        base = SparseRows((np.array([1]),), (np.ones(1),), 3)
        with pytest.raises(ConfigError):
            process_numerator(base, None, "median")


class TestDenominator:
    grid = build_grid(0.05, 11.0)
    spec = BandSpec(1.0, 10, 0.1)

    def support(self, name):
        base = build_numerator_base(self.spec, self.grid)
        c_n = build_denominator(variant_config(name, 1.0, 10), base, self.grid)
        return c_n, base

    def test_np_is_range_minus_bands(self):
        c_n, base = self.support("GES2N-Mean-Np")
        alpha = self.grid.alpha
        expected = np.flatnonzero((alpha >= 0.5 - 1e-12) & (alpha <= 11.0 + 1e-12) & ~base.support())
        np.testing.assert_array_equal(c_n.indices[0], expected)
        assert c_n.total() == pytest.approx(1.0)

    def test_nf_adds_the_low_orders(self):
        nf, _ = self.support("GES2N-Max-Nf")
        np_, _ = self.support("GES2N-Max-Np")
        extra = np.setdiff1d(nf.indices[0], np_.indices[0])
        assert np.all(self.grid.alpha[extra] < 0.5)
        assert 0 in extra

    def test_ics2_selects_the_zero_bin(self):
        c_n, _ = self.support("GES2N-ICS2")
        np.testing.assert_array_equal(c_n.indices[0], [0])
        np.testing.assert_array_equal(c_n.values[0], [1.0])

    def test_empty_support_rejected(self):
        grid = build_grid(0.5, 1.5)
        base = build_numerator_base(BandSpec(1.0, 1, 1.0), grid)
        with pytest.raises(Ges2nError):
            build_denominator(variant_config("GES2N-Mean-Np", 0.4, 2), base, grid)


class TestEvaluate:
    grid = build_grid(0.05, 11.0)
    spec = BandSpec(1.0, 10, 0.1)

    def ws(self, name):
        return build_weighting(variant_config(name, 1.0, 10), self.spec, self.grid)

    @pytest.mark.parametrize("name", ["GES2N-Mean-Nf", "GES2N-Mean-Np"])
    def test_flat_spectrum_gives_one(self, name):
        assert evaluate_objective(np.full(self.grid.n_f, 3.7), self.ws(name)).psi == pytest.approx(1.0, rel=1e-14)

    def test_single_spike_max_mode(self):
        spec = BandSpec(1.0, 1, 0.1)
        grid = build_grid(0.05, 2.0)
        ws = build_weighting(variant_config("GES2N-Max-Np", 1.0, 1), spec, grid)
        b = np.full(grid.n_f, 0.2)
        b[20] = 2.0
        val = evaluate_objective(b, ws)
        assert val.psi == pytest.approx(10.0, rel=1e-14)
        assert val.log_psi == pytest.approx(np.log(10.0), rel=1e-14)

    def test_degenerate_denominator(self):
        b = np.zeros(self.grid.n_f)
        with pytest.raises(DegenerateObjectiveError):
            evaluate_objective(b, self.ws("GES2N-Mean-Np"))

    @given(st.sampled_from(VARIANT_NAMES), st.floats(1e-6, 1e6), st.integers(0, 2**32 - 1))
    def test_scale_free_in_b(self, name, c, seed):
        b = np.random.default_rng(seed).exponential(size=self.grid.n_f)
        ws = self.ws(name)
        assert evaluate_objective(c * b, ws).psi == pytest.approx(evaluate_objective(b, ws).psi, rel=1e-12)

    @given(st.sampled_from(VARIANT_NAMES), st.integers(0, 2**32 - 1),
           arrays(np.float64, 200, elements=st.floats(0, 1e3)))
    def test_numerator_bins_never_move_the_denominator(self, name, seed, bump):
        ws = self.ws(name)
        b = np.random.default_rng(seed).exponential(size=self.grid.n_f)
        mask = ws.c_s_base.support()
        b2 = b.copy()
        b2[mask] += bump[: mask.sum()]
        assert evaluate_objective(b2, ws).denominator == evaluate_objective(b, ws).denominator

    @given(st.integers(0, 2**32 - 1))
    def test_mean_and_sum_differ_by_a_constant(self, seed):
        ws = self.ws("GES2N-Mean-Np")
        total = ws.c_s_base.total()
        b = np.random.default_rng(seed).exponential(size=self.grid.n_f)
        mean_psi = evaluate_objective(b, ws).psi
        sum_psi = ws.c_s_base.row_sums(b).sum() / ws.c_n.row_sums(b).sum()
        assert sum_psi / mean_psi == pytest.approx(total, rel=1e-12)

    def test_max_mode_refreshes_selection(self):
        ws = self.ws("GES2N-Max-Np")
        b = np.ones(self.grid.n_f)
        b[21] = 4.0
        val = evaluate_objective(b, ws)
        assert val.weighting.selection()[0] == 21
        assert ws.selection()[0] != 21  # the input weighting is not mutated
