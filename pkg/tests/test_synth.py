import json

import numpy as np
import pytest

from pdeeg import synth
from pdeeg.bdf import read_bdf
from pdeeg.errors import ConfigError, NyquistViolation
from pdeeg.spectral import periodogram


def band_power(x, rate, low, high):
    """Independent oracle: integrated periodogram density over [low, high]."""
    psd = periodogram(x, rate, window="rectangular")
    mask = (psd.freqs_hz >= low) & (psd.freqs_hz <= high)
    return float(np.sum(psd.power[mask]) * psd.df_hz)


class TestSinusoid:
    def test_pure_tone_variance(self):
        spec = synth.SynthSpec(
            rate_hz=250.0, duration_s=5.0, components=((10.0, 1.0, 0.0),)
        )
        rec = synth.sinusoid(spec)
        assert rec.n_samples == 1250
        assert np.var(rec.data[0]) == pytest.approx(0.5, rel=0.01)

    def test_zero_components_zero_noise(self):
        rec = synth.sinusoid(synth.SynthSpec(rate_hz=100.0, duration_s=1.0))
        assert np.all(rec.data == 0.0)

    def test_seed_determinism(self):
        spec = synth.SynthSpec(
            rate_hz=100.0, duration_s=1.0, components=((5.0, 1.0, 0.2),),
            noise_std_uv=1.0, seed=42,
        )
        a = synth.sinusoid(spec).data
        b = synth.sinusoid(spec).data
        np.testing.assert_array_equal(a, b)

    def test_distinct_seeds_differ(self):
        kw = dict(rate_hz=100.0, duration_s=1.0, noise_std_uv=1.0)
        a = synth.sinusoid(synth.SynthSpec(seed=1, **kw)).data
        b = synth.sinusoid(synth.SynthSpec(seed=2, **kw)).data
        assert np.abs(a - b).max() > 0

    def test_nyquist_violation(self):
        with pytest.raises(NyquistViolation):
            synth.SynthSpec(rate_hz=100.0, duration_s=1.0, components=((60.0, 1.0, 0.0),))


def tiny_spec(contrast, seed=0, **kw):
    defaults = dict(
        n_hc=2, n_pd=2, contrast_uv2=contrast, seed=seed,
        duration_s=8.0, rate_hz=128.0, n_eeg_channels=4,
    )
    defaults.update(kw)
    return synth.CohortSpec(**defaults)


class TestCohort:
    def test_counts_and_labels(self):
        recs = synth.cohort(1, 1, contrast_uv2=5.0, seed=0,
                            duration_s=4.0, rate_hz=128.0, n_eeg_channels=2)
        assert len(recs) == 2
        assert {r.subject.group for r in recs} == {"HC", "PD"}

    def test_zero_contrast_classes_match_in_expectation(self):
        # the shared/individual cross term fluctuates per clip, so compare
        # class means over a fair number of channels
        recs = list(synth.iter_cohort(tiny_spec(0.0, seed=5, duration_s=40.0)))
        powers = {"HC": [], "PD": []}
        for rec in recs:
            for ch in rec.data:
                powers[rec.subject.group].append(
                    band_power(ch, rec.rate_hz, 8.5, 11.5)
                )
        hc, pd = np.mean(powers["HC"]), np.mean(powers["PD"])
        assert abs(hc - pd) / hc < 0.10

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_contrast_raises_alpha_power(self, seed):
        recs = list(synth.iter_cohort(tiny_spec(30.0, seed=seed)))
        means = {"HC": [], "PD": []}
        for rec in recs:
            avg = rec.data[: tiny_spec(0).n_eeg_channels].mean(axis=0)
            means[rec.subject.group].append(band_power(avg, rec.rate_hz, 8.5, 11.5))
        assert np.mean(means["PD"]) > np.mean(means["HC"])

    def test_determinism(self):
        a = list(synth.iter_cohort(tiny_spec(10.0, seed=9)))
        b = list(synth.iter_cohort(tiny_spec(10.0, seed=9)))
        for ra, rb in zip(a, b):
            np.testing.assert_array_equal(ra.data, rb.data)

    def test_base_amplitude_calibrated(self):
        # component powers are exact; the mix only fluctuates via the
        # shared/individual cross term
        for rec in synth.iter_cohort(tiny_spec(0.0)):
            stds = rec.data.std(axis=1)
            np.testing.assert_allclose(stds, 20.0, rtol=0.15)

    def test_recording_invariants(self):
        for rec in synth.iter_cohort(tiny_spec(10.0)):
            assert rec.data.shape == (6, int(8.0 * 128.0))  # 4 EEG + 2 refs
            assert rec.rate_hz == 128.0
            assert np.isfinite(rec.data).all()

    def test_validation(self):
        with pytest.raises(ConfigError):
            synth.CohortSpec(n_hc=0, n_pd=1, contrast_uv2=0.0)
        with pytest.raises(ConfigError):
            synth.CohortSpec(n_hc=1, n_pd=1, contrast_uv2=-1.0)


class TestWriteCohort:
    def test_manifest_and_files(self, tmp_path):
        manifest_path = synth.write_cohort(tiny_spec(5.0, seed=2), tmp_path)
        manifest = json.loads(manifest_path.read_text())
        assert manifest["seed"] == 2
        assert len(manifest["files"]) == 4
        for name, meta in manifest["files"].items():
            rec = read_bdf(tmp_path / name)
            assert rec.subject.group == meta["group"]
            assert rec.subject.id == meta["subject"]


def test_pink_spectrum_slope():
    """log-log PSD slope of the pink base is close to -1."""
    spec = tiny_spec(0.0, duration_s=60.0, rate_hz=256.0, n_eeg_channels=1,
                     include_references=False)
    rec = next(synth.iter_cohort(spec))
    psd = periodogram(rec.data[0], rec.rate_hz, window="rectangular")
    mask = (psd.freqs_hz >= 1.0) & (psd.freqs_hz <= 40.0)
    slope = np.polyfit(np.log(psd.freqs_hz[mask]), np.log(psd.power[mask]), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.15)
