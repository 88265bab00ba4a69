import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcwave.dsp import ComplexSignal
from mcwave.experiments import analytic_curve, simulate_psd
from mcwave.spectral import (
    AnalyticPsdConfig,
    PsdEstimate,
    aliased_sinc,
    analytic_gap_db,
    analytic_psd,
    analytic_psd_linear,
    averaged_periodogram,
    interpolation_filter,
    max_pairwise_gap,
    oversample_truncate,
    peak_normalize,
    periodogram_psd,
)


def direct_psd(f, K, L, oversample=6):
    """Carrier-by-carrier sum with math.sin, no vectorization."""
    total = 0.0
    La = oversample * L
    for i in range(K):
        fc = (i - (K - 1) / 2) / K
        x = (f - fc) / oversample
        total += (math.sin(math.pi * La * x) / (La * math.sin(math.pi * x))) ** 2
    return total


class TestAliasedSinc:
    @pytest.mark.parametrize("L", [1, 2, 160, 1184])
    def test_zero(self, L):
        assert aliased_sinc(0.0, L) == 1.0

    def test_first_null(self):
        assert abs(aliased_sinc(1 / 160, 160)) < 1e-12

    def test_quarter(self):
        assert aliased_sinc(0.25, 2) == pytest.approx(1 / math.sqrt(2), abs=1e-5)

    def test_integer_limit(self):
        # (-1)^(x (L - 1)): L even flips sign at odd integers
        assert aliased_sinc(1.0, 4) == -1.0
        assert aliased_sinc(1.0, 5) == 1.0
        assert aliased_sinc(1.0 + 1e-9, 4) == pytest.approx(-1.0, abs=1e-6)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            aliased_sinc(0.1, 0)

    @settings(max_examples=300)
    @given(st.floats(-5, 5, allow_nan=False), st.integers(1, 2000))
    def test_bounded(self, x, L):
        assert abs(aliased_sinc(x, L)) <= 1 + 1e-9


class TestAnalyticPsd:
    def test_gap_at_two_fs(self):
        # K=128, L=160 against M=9, L'=1184 with equal multipliers
        gap = analytic_gap_db(AnalyticPsdConfig(K=128, L=160, n_guard=32, M=9), 2.0)
        assert abs(gap - 7.8) <= 0.3

    def test_equal_se_length(self):
        assert AnalyticPsdConfig(K=128, L=160, n_guard=32, M=9).L_equal == 1184

    def test_single_carrier(self):
        f = np.linspace(-0.5, 0.5, 101)
        psd = analytic_psd(AnalyticPsdConfig(K=1, L=16, n_guard=0), f)
        assert psd.values_db[50] == 0.0
        assert np.argmax(psd.values_db) == 50
        ref = aliased_sinc(f / 6, 96) ** 2
        np.testing.assert_allclose(10 ** (psd.values_db / 10), ref, rtol=1e-12, atol=1e-300)

    def test_direct_summation(self):
        cfg = AnalyticPsdConfig(K=128, L=160, n_guard=32)
        ours = analytic_psd_linear(cfg, [0.75])[0]
        assert 10 * math.log10(ours) == pytest.approx(10 * math.log10(direct_psd(0.75, 128, 160)), abs=1e-9)

    def test_even(self):
        f = np.linspace(0.01, 3, 300)
        for cfg in (AnalyticPsdConfig(), AnalyticPsdConfig(n_occupied=76)):
            for eq in (False, True):
                a = analytic_psd(cfg, f, eq).values_db
                b = analytic_psd(cfg, -f, eq).values_db
                assert np.max(np.abs(a - b)) < 1e-9

    def test_guards_lower_oob(self):
        f = np.array([0.0, 2.0])
        plain = analytic_psd_linear(AnalyticPsdConfig(), f)
        guarded = analytic_psd_linear(AnalyticPsdConfig(n_occupied=76), f)
        assert guarded[1] / guarded[0] < plain[1] / plain[0]

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            analytic_psd(AnalyticPsdConfig(), [])

    def test_non_finite(self):
        with pytest.raises(ValueError):
            analytic_psd(AnalyticPsdConfig(), [0.0, np.nan])

    def test_bad_config(self):
        with pytest.raises(ValueError):
            AnalyticPsdConfig(L=32, n_guard=32)

    def test_reference_normalization(self):
        f = np.array([0.0, 2.0])
        cfg = AnalyticPsdConfig()
        psd = analytic_psd(cfg, f, reference=1.0)
        assert not psd.peak_normalized
        np.testing.assert_allclose(psd.values_db, 10 * np.log10(analytic_psd_linear(cfg, f)))


class TestOversampleTruncate:
    def test_factor_one(self, rng):
        x = ComplexSignal(rng.standard_normal(50) + 1j * rng.standard_normal(50))
        np.testing.assert_array_equal(oversample_truncate(x, 1).samples, x.samples)

    def test_length(self, rng):
        x = ComplexSignal(rng.standard_normal(1184) + 0j)
        y = oversample_truncate(x, 6)
        assert len(y) == 7104 and y.sample_rate == 6.0

    def test_filter_taps(self):
        h = interpolation_filter(6)
        assert h.size == 6 * 81 + 1
        assert np.sum(h) == pytest.approx(6.0)
        assert np.argmax(h) == 243
        np.testing.assert_allclose(h, h[::-1])

    def test_tone(self):
        n = np.arange(1184)
        x = ComplexSignal(np.exp(2j * np.pi * 0.1 * n))
        y = oversample_truncate(x, 6).samples
        mid = y[1000:6000]
        # same absolute frequency: 0.1 F_s is 0.1/6 of the new rate
        spec = np.abs(np.fft.fft(y)) ** 2
        freqs = np.fft.fftfreq(y.size, d=1 / 6)
        assert freqs[np.argmax(spec)] == pytest.approx(0.1, abs=6 / y.size)
        assert np.max(np.abs(np.abs(mid) - 1)) < 0.01

    def test_nyquist_pulse_keeps_original_samples(self, rng):
        # RC taps vanish at nonzero multiples of the factor, so y[6n] ~ x[n] in the interior
        x = rng.standard_normal(400) + 1j * rng.standard_normal(400)
        y = oversample_truncate(x, 6)
        h = interpolation_filter(6)
        scale = h[243]
        np.testing.assert_allclose(y[6 * 50:6 * 350:6], scale * x[50:350], atol=1e-12)

    def test_batched_rows(self, rng):
        x = rng.standard_normal((3, 200)) + 0j
        y = oversample_truncate(x, 6)
        np.testing.assert_allclose(y[1], oversample_truncate(x[1], 6))

    def test_too_short(self):
        with pytest.raises(ValueError):
            oversample_truncate(np.ones(10), 6)

    def test_even_span(self):
        with pytest.raises(ValueError):
            oversample_truncate(np.ones(1000), 6, filt_symbol_span=80)

    def test_bad_factor(self):
        with pytest.raises(ValueError):
            oversample_truncate(np.ones(1000), 0)


class TestPeriodogram:
    def test_tone_peak(self):
        n = np.arange(256)
        psd = periodogram_psd([ComplexSignal(np.exp(2j * np.pi * 32 * n / 256))])
        assert psd.values_db.max() == 0.0
        assert psd.freqs[np.argmax(psd.values_db)] == pytest.approx(32 / 256)

    def test_parseval(self, rng):
        frames = rng.standard_normal((5, 100)) + 1j * rng.standard_normal((5, 100))
        p = averaged_periodogram(frames)
        assert np.sum(p) == pytest.approx(np.mean(np.sum(np.abs(frames) ** 2, axis=1)), rel=1e-10)

    def test_white_noise_flat(self, rng):
        frames = (rng.standard_normal((300, 1024)) + 1j * rng.standard_normal((300, 1024))) / np.sqrt(2)
        psd = periodogram_psd(frames)
        assert np.std(psd.values_db) < 0.5

    def test_symmetric_grid(self, rng):
        psd = periodogram_psd(rng.standard_normal((2, 7104)) + 0j, sample_rate=6)
        assert psd.freqs[0] == -3.0 and psd.freqs[-1] == 3.0
        np.testing.assert_allclose(psd.freqs, -psd.freqs[::-1])
        assert np.all(np.diff(psd.freqs) > 0)
        assert psd.values_db[0] == psd.values_db[-1]

    def test_odd_length_grid(self, rng):
        psd = periodogram_psd(rng.standard_normal((2, 99)) + 0j)
        np.testing.assert_allclose(psd.freqs, -psd.freqs[::-1])

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            periodogram_psd([ComplexSignal(np.ones(4)), ComplexSignal(np.ones(5))])

    def test_rate_from_signal(self):
        psd = periodogram_psd([ComplexSignal(np.ones(8), 6.0)])
        assert psd.freqs[-1] == 3.0

    def test_peak_normalize_idempotent(self, rng):
        psd = periodogram_psd(rng.standard_normal((3, 64)) + 0j)
        again = peak_normalize(psd)
        np.testing.assert_array_equal(again.values_db, psd.values_db)
        assert again.values_db.max() == 0.0


class TestPsdEstimate:
    def test_neighbourhood_mean_is_linear(self):
        f = np.array([-1.0, 0.0, 0.99, 1.0, 1.01])
        psd = PsdEstimate(f, np.array([0.0, 0.0, -10.0, -20.0, -30.0]))
        expected = 10 * np.log10(np.mean([0.1, 0.01, 0.001, 1.0]))
        assert psd.at(1.0, 0.05) == pytest.approx(expected)
        assert psd.at(1.0, 0.05, both_sides=False) == pytest.approx(10 * np.log10(0.037))

    def test_no_bins(self):
        with pytest.raises(ValueError):
            PsdEstimate(np.array([0.0, 1.0]), np.zeros(2)).at(0.5, 0.01)

    def test_pairwise_gap(self):
        f = np.linspace(-3, 3, 601)
        a = PsdEstimate(f, -np.abs(f) * 10)
        b = PsdEstimate(f, -np.abs(f) * 10 - 2.0)
        assert max_pairwise_gap([a, b], 1.5, 3.0) == pytest.approx(2.0)
        assert max_pairwise_gap([a, a], 1.5, 3.0) == 0.0


class TestSimulatedAgainstClosedForm:
    @staticmethod
    @pytest.fixture(scope="class")
    def curves():
        sim = simulate_psd("ofdm", "plain", False, mc_runs=300, seed=1)
        return sim, analytic_curve("plain", False, sim.freqs)

    def test_in_band(self, curves):
        sim, ana = curves
        for c in np.arange(0.0, 0.401, 0.05):
            assert abs(sim.at(c, 0.025) - ana.at(c, 0.025)) <= 1.0

    @pytest.mark.xfail(strict=True, reason="per-symbol truncation leaves a smaller edge step than a "
                                           "rectangular pulse, so the simulated tails sit ~3-4 dB low")
    def test_out_of_band_within_two_db(self, curves):
        sim, ana = curves
        for c in np.arange(0.5, 2.001, 0.05):
            assert abs(sim.at(c, 0.025) - ana.at(c, 0.025)) <= 2.0

    def test_out_of_band_same_shape(self, curves):
        # the offset is a constant level shift between 1 and 2 F_s
        sim, ana = curves
        d = [sim.at(c, 0.025) - ana.at(c, 0.025) for c in np.arange(1.0, 2.001, 0.05)]
        assert np.ptp(d) < 0.5
