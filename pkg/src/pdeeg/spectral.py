"""Frequency-domain estimators: periodogram, segment-averaged (Welch) PSD,
spectral entropy, and a short-time spectrogram.

PSD scaling is one-sided density (power per Hz) with window-power
correction, so the integral of the PSD recovers the windowed signal's
mean power; no implicit zero-padding or detrending is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptySignal, SignalShorterThanSegment, ZeroSpectrum


def window_samples(name: str, length: int) -> np.ndarray:
    """Periodic analysis window by name."""
    k = np.arange(length)
    if name in ("rectangular", "boxcar"):
        return np.ones(length)
    if name == "hamming":
        return 0.54 - 0.46 * np.cos(2 * np.pi * k / length)
    if name == "hann":
        return 0.5 - 0.5 * np.cos(2 * np.pi * k / length)
    raise ConfigError(f"unknown window {name!r}")


@dataclass(frozen=True)
class WelchConfig:
    """Segmentation recipe for the averaged PSD (defaults: 5 s segments
    with 1 s overlap at 250 Hz)."""

    rate_hz: float
    segment_len: int = 1250
    overlap_len: int = 250
    window: str = "hamming"

    def __post_init__(self):
        if self.segment_len < 1:
            raise ConfigError(f"segment_len must be >= 1, got {self.segment_len}")
        if not 0 <= self.overlap_len < self.segment_len:
            raise ConfigError(
                f"overlap {self.overlap_len} must be in [0, {self.segment_len})"
            )
        if self.rate_hz <= 0:
            raise ConfigError(f"rate_hz must be positive, got {self.rate_hz}")

    @property
    def step(self) -> int:
        return self.segment_len - self.overlap_len

    def segment_count(self, n_samples: int) -> int:
        return (n_samples - self.segment_len) // self.step + 1


@dataclass(frozen=True)
class PsdEstimate:
    freqs_hz: np.ndarray
    power: np.ndarray  # uV^2 / Hz, one-sided
    config: WelchConfig

    @property
    def df_hz(self) -> float:
        return float(self.freqs_hz[1] - self.freqs_hz[0]) if self.freqs_hz.size > 1 else 0.0

    def total_power(self) -> float:
        return float(np.sum(self.power) * self.df_hz)

    def band_mean(self, low_hz: float, high_hz: float) -> float:
        """Mean density over bins with low <= f <= high (0 if no bins)."""
        mask = (self.freqs_hz >= low_hz) & (self.freqs_hz <= high_hz)
        return float(self.power[mask].mean()) if mask.any() else 0.0


def _segment_psd(segments: np.ndarray, rate_hz: float, window: str) -> np.ndarray:
    """One-sided PSD of each row of `segments`."""
    m = segments.shape[-1]
    w = window_samples(window, m)
    spectra = np.fft.rfft(segments * w, axis=-1)
    psd = (spectra.real**2 + spectra.imag**2) / (rate_hz * np.sum(w**2))
    if m % 2 == 0:
        psd[..., 1:-1] *= 2.0
    else:
        psd[..., 1:] *= 2.0
    return psd


def periodogram(x: np.ndarray, rate_hz: float, window: str = "hamming") -> PsdEstimate:
    """Windowed squared-magnitude DFT, scaled so sum(power)*df equals the
    window-corrected mean power of the signal."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptySignal("cannot estimate a spectrum from zero samples")
    psd = _segment_psd(x[np.newaxis, :], rate_hz, window)[0]
    freqs = np.fft.rfftfreq(x.size, d=1.0 / rate_hz)
    cfg = WelchConfig(rate_hz=rate_hz, segment_len=x.size, overlap_len=0, window=window)
    return PsdEstimate(freqs_hz=freqs, power=psd, config=cfg)


def welch_psd(x: np.ndarray, cfg: WelchConfig) -> PsdEstimate:
    """Mean of per-segment periodograms over overlapping segments."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < cfg.segment_len:
        raise SignalShorterThanSegment(
            f"{x.size} samples < segment of {cfg.segment_len}"
        )
    segments = np.lib.stride_tricks.sliding_window_view(x, cfg.segment_len)[:: cfg.step]
    psd = _segment_psd(segments, cfg.rate_hz, cfg.window).mean(axis=0)
    freqs = np.fft.rfftfreq(cfg.segment_len, d=1.0 / cfg.rate_hz)
    return PsdEstimate(freqs_hz=freqs, power=psd, config=cfg)


def spectral_entropy(psd: PsdEstimate) -> float:
    """Shannon entropy (nats) of the normalized PSD."""
    total = float(np.sum(psd.power))
    if total <= 0.0:
        raise ZeroSpectrum("spectrum has no power to normalize")
    p = psd.power / total
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


@dataclass(frozen=True)
class Spectrogram:
    freqs_hz: np.ndarray
    times_s: np.ndarray
    power: np.ndarray  # (n_bins, n_segments)


def spectrogram(
    x: np.ndarray,
    rate_hz: float,
    seg_len: int,
    overlap: int,
    window: str = "hamming",
) -> Spectrogram:
    """Per-segment periodograms as time-frequency columns."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < seg_len:
        raise SignalShorterThanSegment(f"{x.size} samples < segment of {seg_len}")
    if not 0 <= overlap < seg_len:
        raise ConfigError(f"overlap {overlap} must be in [0, {seg_len})")
    step = seg_len - overlap
    segments = np.lib.stride_tricks.sliding_window_view(x, seg_len)[::step]
    psd = _segment_psd(segments, rate_hz, window)
    starts = np.arange(segments.shape[0]) * step
    return Spectrogram(
        freqs_hz=np.fft.rfftfreq(seg_len, d=1.0 / rate_hz),
        times_s=(starts + seg_len / 2.0) / rate_hz,
        power=psd.T,
    )
