import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ges2n import (
    CyclicGrid,
    Ges2nError,
    SesResult,
    VibrationRecord,
    VsDftOperator,
    build_grid,
    default_resolution,
    integrate_angle,
    squared_envelope_spectrum,
    vs_dft,
)

from conftest import ramp_record


def dense_vs_dft_matrix(omega, theta, fs, alpha, l_y):
    n = np.arange(l_y)
    return omega[n] * np.exp(-1j * np.outer(alpha, theta[n])) / (fs * theta[l_y - 1])


def folded_dft(s):
    """Uniform-angle DFT over N = len(s) - 1 points; the last sample lands on angle 2 pi."""
    e = np.array(s[:-1], dtype=np.float64)
    e[0] += s[-1]
    return np.fft.fft(e) / len(e)


class TestResolutionAndGrid:
    def test_ten_revolutions(self):
        theta = np.linspace(0, 20 * math.pi, 11)
        assert default_resolution(theta, 11) == pytest.approx(0.1, rel=1e-15)

    def test_one_revolution(self):
        assert default_resolution(np.linspace(0, 2 * math.pi, 5), 5) == pytest.approx(1.0, rel=1e-15)

    def test_ramp_uses_integrated_angle(self):
        rec = VibrationRecord(np.zeros(101), 100.0, 10 + 10 * np.arange(101) / 100.0)
        theta = integrate_angle(rec).theta
        assert default_resolution(theta, 90) == pytest.approx(2 * math.pi / theta[89], rel=1e-15)

    def test_rejects_bad_length(self):
        with pytest.raises(Ges2nError):
            default_resolution(np.linspace(0, 1, 5), 6)
        with pytest.raises(Ges2nError):
            default_resolution(np.linspace(0, 1, 5), 1)

    def test_grid_examples(self):
        np.testing.assert_allclose(build_grid(0.5, 2.0).alpha, [0, 0.5, 1.0, 1.5, 2.0])
        assert build_grid(0.025, 11.0).n_f == 441
        np.testing.assert_allclose(build_grid(0.1, 0.1).alpha, [0, 0.1])

    def test_grid_rejects(self):
        for args in ((0.0, 1.0), (0.1, -1.0), (0.5, 0.2)):
            with pytest.raises(Ges2nError):
                build_grid(*args)

    @given(st.floats(1e-3, 1.0), st.floats(1.0, 50.0))
    def test_grid_invariants(self, delta, top):
        g = build_grid(delta, top)
        assert g.alpha[0] == 0.0
        assert g.n_f == len(g.alpha) == math.floor(top / delta + 1e-9) + 1
        np.testing.assert_array_equal(g.alpha, np.arange(g.n_f) * delta)

    def test_from_alpha_rejects_nonuniform(self):
        with pytest.raises(Ges2nError):
            CyclicGrid.from_alpha([0, 1, 3])


class TestVsDft:
    def test_dc_bin_is_weighted_speed_sum(self):
        rec = ramp_record(n=300, fs=300.0)
        theta = integrate_angle(rec).theta
        out = vs_dft(np.ones(200), rec.omega, theta, rec.fs, build_grid(0.5, 2.0))
        expected = rec.omega[:200].sum() / (rec.fs * theta[199])
        assert out[0].real == pytest.approx(expected, rel=1e-12)
        assert abs(out[0].imag) < 1e-15

    def test_zero_signal(self):
        rec = ramp_record(n=100, fs=100.0)
        out = vs_dft(np.zeros(80), rec.omega, integrate_angle(rec).theta, rec.fs, build_grid(0.5, 5.0))
        assert not np.any(out)

    def test_rejects_zero_span(self):
        with pytest.raises(Ges2nError):
            VsDftOperator(np.ones(4), np.zeros(4), 1.0, build_grid(1.0, 2.0), 4)

    @given(st.integers(16, 256), st.integers(2, 64), st.integers(1, 40), st.integers(0, 2**32 - 1))
    def test_matches_dense_matrix(self, l_y, n_f, block, seed):
        rng = np.random.default_rng(seed)
        rec = ramp_record(n=l_y + 3, fs=512.0, seed=seed)
        theta = integrate_angle(rec).theta
        grid = build_grid(0.37, 0.37 * (n_f - 1))
        op = VsDftOperator(rec.omega, theta, rec.fs, grid, l_y, block=block)
        dense = dense_vs_dft_matrix(rec.omega, theta, rec.fs, grid.alpha, l_y)
        v = rng.standard_normal(l_y)
        c = rng.standard_normal(grid.n_f) + 1j * rng.standard_normal(grid.n_f)
        np.testing.assert_allclose(op.dense(), dense, rtol=0, atol=1e-12 * np.abs(dense).max())
        np.testing.assert_allclose(op.matvec(v), dense @ v, rtol=0, atol=1e-12 * np.abs(dense @ v).max())
        np.testing.assert_allclose(op.transpose_matvec(c), dense.T @ c, rtol=0,
                                   atol=1e-12 * np.abs(dense.T @ c).max())

    def test_blocking_drift_on_long_grid(self):
        # phase steps are reused across a block; drift stays far below 1e-9
        rec = ramp_record(n=4096, fs=4096.0)
        theta = integrate_angle(rec).theta
        grid = build_grid(0.05, 30.0)
        op = VsDftOperator(rec.omega, theta, rec.fs, grid, 4000)
        v = np.random.default_rng(5).standard_normal(4000)
        direct = dense_vs_dft_matrix(rec.omega, theta, rec.fs, grid.alpha, 4000) @ v
        assert np.max(np.abs(op.matvec(v) - direct)) < 1e-9 * np.max(np.abs(direct))

    def test_constant_speed_is_a_uniform_angle_dft(self):
        fs, w0, l_y = 1000.0, 2 * math.pi * 10, 513
        rec = VibrationRecord(np.zeros(l_y), fs, np.full(l_y, w0))
        theta = integrate_angle(rec).theta
        n = l_y - 1
        grid = build_grid(default_resolution(theta, l_y), (n - 1) * 2 * math.pi / theta[-1])
        s = np.random.default_rng(0).standard_normal(l_y)
        np.testing.assert_allclose(vs_dft(s, rec.omega, theta, fs, grid), folded_dft(s)[:grid.n_f],
                                   rtol=0, atol=1e-9)


class TestSes:
    def test_zero_signal(self):
        rec = ramp_record(n=64, fs=64.0)
        ses = squared_envelope_spectrum(np.zeros(60), rec.omega, integrate_angle(rec).theta, rec.fs,
                                        build_grid(1.0, 4.0))
        assert not np.any(ses.b)

    def test_am_tone_peaks_at_modulation_order(self):
        fs, w0, n = 4096.0, 2 * math.pi * 8, 8192
        rec = VibrationRecord(np.zeros(n), fs, np.full(n, w0))
        theta = integrate_angle(rec).theta
        t = np.arange(n) / fs
        y = (1 + 0.5 * np.cos(1.0 * theta)) * np.sin(2 * math.pi * 700 * t)
        grid = build_grid(default_resolution(theta, n), 5.0)
        ses = squared_envelope_spectrum(y, rec.omega, theta, fs, grid)
        above = grid.alpha > 0.5
        peak = grid.alpha[above][np.argmax(ses.b[above])]
        assert peak == grid.alpha[np.argmin(np.abs(grid.alpha - 1.0))]

    @given(st.floats(-100, 100).filter(lambda c: abs(c) > 1e-3), st.integers(0, 2**32 - 1))
    def test_quartic_homogeneity(self, c, seed):
        rec = ramp_record(n=200, fs=200.0, seed=seed)
        theta = integrate_angle(rec).theta
        grid = build_grid(0.5, 8.0)
        y = rec.x[:180]
        b1 = squared_envelope_spectrum(y, rec.omega, theta, rec.fs, grid).b
        bc = squared_envelope_spectrum(c * y, rec.omega, theta, rec.fs, grid).b
        np.testing.assert_allclose(bc, c**4 * b1, rtol=1e-10, atol=1e-12 * c**4 * b1.max())

    @given(st.integers(0, 2**32 - 1))
    def test_nonnegative_and_matches_spectrum(self, seed):
        rec = ramp_record(n=150, fs=150.0, seed=seed)
        ses = squared_envelope_spectrum(rec.x[:140], rec.omega, integrate_angle(rec).theta, rec.fs,
                                        build_grid(0.25, 6.0))
        assert np.all(ses.b >= 0)
        np.testing.assert_allclose(ses.b, np.abs(ses.spectrum) ** 2, rtol=1e-12)

    def test_from_amplitudes_checks_lengths(self):
        with pytest.raises(Ges2nError):
            SesResult.from_amplitudes([0, 1, 2], [1.0, 2.0])
