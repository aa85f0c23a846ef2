import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdeeg import preprocess as pp
from pdeeg.bdf import Recording, Subject
from pdeeg.errors import (
    AllEpochsDropped,
    EmptySelection,
    InvalidBand,
    SignalTooShort,
    UnknownChannel,
    UpsampleUnsupported,
)

STOPBAND_CEILING = 10 ** (-53 / 20)  # 53 dB down


def tone(freq, rate, seconds, amp=1.0, phase=0.0):
    t = np.arange(int(rate * seconds)) / rate
    return amp * np.sin(2 * np.pi * freq * t + phase)


class TestAverageChannels:
    def test_opposite_channels_cancel(self):
        rec = Recording(rate_hz=100.0, labels=("a", "b"),
                        data=np.vstack([np.ones(100), -np.ones(100)]))
        out = pp.average_channels(rec, ["a", "b"])
        assert out.data.shape == (1, 100)
        np.testing.assert_array_equal(out.data[0], 0.0)

    def test_single_channel_identity(self, rng):
        x = rng.normal(size=50)
        rec = Recording(rate_hz=100.0, labels=("a",), data=x[np.newaxis])
        np.testing.assert_array_equal(pp.average_channels(rec, ["a"]).data[0], x)

    def test_averaging_reduces_variance(self, small_cohort):
        rec = small_cohort[0]
        labels = rec.eeg_labels()
        out = pp.average_channels(rec, labels)
        rows = [rec.labels.index(l) for l in labels]
        assert np.var(out.data[0]) < np.mean(np.var(rec.data[rows], axis=1))

    def test_unknown_channel(self, rng):
        rec = Recording(rate_hz=100.0, labels=("a",), data=np.zeros((1, 10)))
        with pytest.raises(UnknownChannel):
            pp.average_channels(rec, ["a", "zz"])

    def test_empty_selection(self):
        rec = Recording(rate_hz=100.0, labels=("a",), data=np.zeros((1, 10)))
        with pytest.raises(EmptySelection):
            pp.average_channels(rec, [])


class TestResample:
    def test_constant_preserved(self):
        out = pp.resample(np.full(2048, 3.7), 512.0, 250.0)
        interior = out[50:-50]
        np.testing.assert_allclose(interior, 3.7, rtol=1e-6)

    def test_length_arithmetic(self):
        out = pp.resample(np.zeros(2048), 512.0, 250.0)
        assert out.shape[0] == 1000  # ceil(2048 * 125/256)

    def test_tone_survives(self):
        x = tone(10.0, 512.0, 4.0)
        out = pp.resample(x, 512.0, 250.0)
        # DFT oracle: dominant bin at 10 Hz
        spectrum = np.abs(np.fft.rfft(out))
        freqs = np.fft.rfftfreq(out.shape[0], d=1 / 250.0)
        assert abs(freqs[np.argmax(spectrum)] - 10.0) < 0.3
        assert np.std(out[100:-100]) == pytest.approx(np.std(x) , rel=0.02)

    def test_upsample_rejected(self):
        with pytest.raises(UpsampleUnsupported):
            pp.resample(np.zeros(100), 250.0, 512.0)

    def test_equal_rate_passthrough(self, rng):
        x = rng.normal(size=100)
        np.testing.assert_array_equal(pp.resample(x, 250.0, 250.0), x)


class TestFilterDesign:
    def test_reference_tap_count(self):
        filt = pp.design_fir_bandpass(0.5, 4.5, 250.0, 0.5)
        assert filt.n_taps == 1651  # smallest odd n >= 3.3 * 250 / 0.5

    def test_taps_symmetric(self):
        filt = pp.design_fir_bandpass(8.5, 11.5, 250.0)
        np.testing.assert_allclose(filt.taps, filt.taps[::-1], atol=1e-12)

    @pytest.mark.parametrize("band", list(pp.BAND_EDGES_HZ.values()))
    def test_passband_ripple(self, band):
        low, high = band
        filt = pp.design_fir_bandpass(low, high, 250.0, 0.5)
        freqs, mag = pp.frequency_response(filt, 4096)
        center = np.sqrt(low * high)  # geometric band center
        idx = np.argmin(np.abs(freqs - center))
        assert abs(mag[idx] - 1.0) <= 0.0194
        interior = (freqs >= low + 0.5) & (freqs <= high - 0.5)
        assert np.abs(mag[interior] - 1.0).max() <= 0.0194

    @pytest.mark.parametrize("band", list(pp.BAND_EDGES_HZ.values()))
    def test_stopband_attenuation(self, band):
        low, high = band
        filt = pp.design_fir_bandpass(low, high, 250.0, 0.5)
        freqs, mag = pp.frequency_response(filt, 4096)
        stop = (freqs <= low - 0.5) | (freqs >= high + 0.5)
        assert mag[stop].max() <= STOPBAND_CEILING

    def test_minus_6db_at_edges(self):
        filt = pp.design_fir_bandpass(8.5, 11.5, 250.0)
        freqs, mag = pp.frequency_response(filt, 8192)
        for edge in (8.5, 11.5):
            idx = np.argmin(np.abs(freqs - edge))
            assert mag[idx] == pytest.approx(0.5, abs=0.02)

    def test_dc_gain_below_stopband_bound(self):
        filt = pp.design_fir_bandpass(0.5, 4.5, 250.0)
        assert abs(np.sum(filt.taps)) < STOPBAND_CEILING

    def test_invalid_bands(self):
        for low, high in [(0.0, 4.0), (5.0, 4.0), (10.0, 130.0)]:
            with pytest.raises(InvalidBand):
                pp.design_fir_bandpass(low, high, 250.0)


class TestApplyZeroPhase:
    def test_impulse_peak_stays_put(self):
        filt = pp.design_fir_bandpass(8.5, 11.5, 250.0)
        x = np.zeros(5000)
        k = 2345
        x[k] = 1.0
        out = pp.apply_zero_phase(filt, x)
        assert out.shape == x.shape
        assert np.argmax(np.abs(out)) == k

    def test_inband_tone_amplitude_and_lag(self):
        filt = pp.design_fir_bandpass(8.5, 11.5, 250.0)
        x = tone(10.0, 250.0, 40.0)
        out = pp.apply_zero_phase(filt, x)
        core = slice(2000, -2000)
        assert np.std(out[core]) == pytest.approx(np.std(x[core]), rel=0.0194)
        # cross-correlation lag oracle: phase shift ~ 0
        lags = range(-5, 6)
        xc = [np.dot(out[3000:6000], x[3000 + l : 6000 + l]) for l in lags]
        assert list(lags)[int(np.argmax(xc))] == 0

    def test_out_of_band_rejection(self):
        filt = pp.design_fir_bandpass(8.5, 11.5, 250.0)
        x = tone(60.0, 250.0, 40.0)
        out = pp.apply_zero_phase(filt, x)
        core = slice(1000, -1000)
        assert np.sqrt(np.mean(out[core] ** 2)) <= STOPBAND_CEILING * np.sqrt(0.5)

    def test_linearity(self, rng):
        filt = pp.design_fir_bandpass(4.5, 8.5, 250.0)
        x, y = rng.normal(size=3000), rng.normal(size=3000)
        lhs = pp.apply_zero_phase(filt, 2.0 * x + 0.5 * y)
        rhs = 2.0 * pp.apply_zero_phase(filt, x) + 0.5 * pp.apply_zero_phase(filt, y)
        assert np.abs(lhs - rhs).max() / np.abs(rhs).max() < 1e-9

    def test_signal_too_short(self):
        filt = pp.design_fir_bandpass(8.5, 11.5, 250.0)
        with pytest.raises(SignalTooShort):
            pp.apply_zero_phase(filt, np.zeros(filt.n_taps))

    def test_inband_idempotence(self):
        filt = pp.design_fir_bandpass(8.5, 11.5, 250.0)
        x = tone(10.0, 250.0, 40.0) + 0.5 * tone(9.5, 250.0, 40.0) + 0.5 * tone(10.5, 250.0, 40.0)
        once = pp.apply_zero_phase(filt, x)
        twice = pp.apply_zero_phase(filt, once)
        core = slice(2000, -2000)
        rms1 = np.sqrt(np.mean(once[core] ** 2))
        rms2 = np.sqrt(np.mean(twice[core] ** 2))
        assert abs(rms2 - rms1) / rms1 < 2 * 0.0194


class TestSplitBands:
    def test_alpha_tone_lands_in_alpha(self):
        bands = pp.split_bands(tone(10.0, 250.0, 40.0))
        core = slice(2000, -2000)
        rms = {k: np.sqrt(np.mean(v[core] ** 2)) for k, v in bands.bands.items()}
        for name in ("delta", "theta", "beta", "gamma"):
            assert rms["alpha"] / rms[name] >= 100.0  # >= 40 dB

    def test_delta_tone_lands_in_delta(self):
        bands = pp.split_bands(tone(3.0, 250.0, 40.0))
        core = slice(2000, -2000)
        rms = {k: np.sqrt(np.mean(v[core] ** 2)) for k, v in bands.bands.items()}
        for name in ("theta", "alpha", "beta", "gamma"):
            assert rms["delta"] / rms[name] >= 100.0

    def test_zero_signal(self):
        bands = pp.split_bands(np.zeros(3000))
        assert set(bands.bands) == set(pp.BAND_ORDER)
        for sig in bands.bands.values():
            np.testing.assert_allclose(sig, 0.0, atol=1e-12)


class TestEpoch:
    def test_three_minutes_gives_44(self):
        es = pp.epoch(np.zeros(45000), 250.0)
        assert es.n_kept == 44

    def test_exact_one_epoch(self):
        assert pp.epoch(np.zeros(1250), 250.0).n_kept == 1

    def test_one_short(self):
        with pytest.raises(SignalTooShort):
            pp.epoch(np.zeros(1249), 250.0)

    def test_views_share_memory(self):
        x = np.arange(3000, dtype=float)
        es = pp.epoch(x, 250.0)
        assert np.shares_memory(es.epochs, x)
        np.testing.assert_array_equal(es.epochs[1], x[1000:2250])

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(1250, 20000))
    def test_count_matches_window_enumeration(self, n):
        es = pp.epoch(np.zeros(n), 250.0)
        # brute-force enumeration of stride-1000 window starts
        count = sum(1 for start in range(0, n, 1000) if start + 1250 <= n)
        assert es.n_kept == count


class TestDropBadEpochs:
    def test_zero_epochs_survive(self):
        es = pp.epoch(np.zeros(5000), 250.0)
        out = pp.drop_bad_epochs(es, 150.0)
        assert out.n_kept == es.n_kept

    def test_spike_epoch_dropped(self, rng):
        x = rng.normal(0, 1.0, 6000)
        x[3500] += 1500.0  # lands only in epoch index 3 (samples 3000..4250)
        es = pp.epoch(x, 250.0)
        out = pp.drop_bad_epochs(es, 150.0)
        dropped = np.flatnonzero(~out.kept_mask)
        assert list(dropped) == [3]
        assert out.n_kept == es.n_kept - 1

    def test_infinite_limit_is_identity(self, rng):
        es = pp.epoch(rng.normal(size=5000), 250.0)
        out = pp.drop_bad_epochs(es, np.inf)
        np.testing.assert_array_equal(out.epochs, es.epochs)

    def test_all_dropped(self):
        es = pp.epoch(np.sin(np.arange(2500)) * 1e4, 250.0)
        with pytest.raises(AllEpochsDropped):
            pp.drop_bad_epochs(es, 1.0)
