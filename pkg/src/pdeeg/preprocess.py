"""Signal conditioning: channel averaging, rational resampling to 250 Hz,
hamming windowed-sinc band-pass filtering into five clinical bands, and
overlapping epoch extraction with amplitude-based rejection.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy.signal import fftconvolve, resample_poly

from .bdf import Recording
from .errors import (
    AllEpochsDropped,
    ConfigError,
    EmptySelection,
    InvalidBand,
    SignalTooShort,
    UnknownChannel,
    UpsampleUnsupported,
)

# Clinical band edges in Hz. Beta deliberately starts at 15.5 Hz, leaving
# 11.5-15.5 Hz uncovered; the edges are used verbatim.
BAND_EDGES_HZ: dict[str, tuple[float, float]] = {
    "delta": (0.5, 4.5),
    "theta": (4.5, 8.5),
    "alpha": (8.5, 11.5),
    "beta": (15.5, 30.0),
    "gamma": (30.0, 45.0),
}
BAND_ORDER = tuple(BAND_EDGES_HZ)

TARGET_RATE_HZ = 250.0
EPOCH_S = 5.0
OVERLAP_S = 1.0
DEFAULT_P2P_LIMIT_UV = 150.0

# Empirical length rule for hamming windowed-sinc designs: the ripple-to-
# ripple transition spans ~3.3/N of the sampling rate.
_HAMMING_WIDTH_FACTOR = 3.3


@dataclass(frozen=True)
class FirFilter:
    """Linear-phase band-pass kernel with its design metadata."""

    taps: np.ndarray
    band: tuple[float, float]
    transition_hz: float
    design_rate_hz: float
    window_name: str = "hamming"

    @property
    def n_taps(self) -> int:
        return self.taps.shape[0]


@dataclass
class BandSet:
    """One band-filtered copy of a signal per clinical band, common rate."""

    rate_hz: float
    bands: dict[str, np.ndarray]

    def __post_init__(self):
        lengths = {v.shape[0] for v in self.bands.values()}
        if len(lengths) > 1:
            raise ConfigError(f"band signals have mixed lengths {sorted(lengths)}")


@dataclass
class EpochSet:
    """Fixed-length overlapping segments of one band signal.

    `epochs` holds only the kept rows; `kept_mask` indexes the original
    epoch grid so drop decisions stay auditable.
    """

    epochs: np.ndarray  # (n_kept, epoch_len)
    kept_mask: np.ndarray  # (n_original,) bool
    rate_hz: float
    band: str = ""
    subject_id: str = ""

    @property
    def n_kept(self) -> int:
        return self.epochs.shape[0]

    @property
    def n_original(self) -> int:
        return self.kept_mask.shape[0]


def average_channels(rec: Recording, labels) -> Recording:
    """Arithmetic mean of the selected channels, as a 1-channel Recording."""
    labels = list(labels)
    if not labels:
        raise EmptySelection("no channels selected for averaging")
    missing = [l for l in labels if l not in rec.labels]
    if missing:
        raise UnknownChannel(f"channels {missing} not in recording {list(rec.labels)}")
    rows = [rec.labels.index(l) for l in labels]
    mean = rec.data[rows].mean(axis=0)
    return Recording(
        rate_hz=rec.rate_hz,
        labels=("avg",),
        data=mean[np.newaxis, :],
        subject=rec.subject,
    )


def _rational_ratio(target_hz: float, source_hz: float) -> Fraction:
    ratio = Fraction(target_hz / source_hz).limit_denominator(10_000)
    if abs(float(ratio) - target_hz / source_hz) > 1e-12:
        raise ConfigError(f"no small rational ratio for {source_hz} -> {target_hz} Hz")
    return ratio


def _windowed_sinc_lowpass(cutoff_norm: float, n_taps: int) -> np.ndarray:
    """Hamming windowed-sinc low-pass; cutoff as a fraction of Nyquist."""
    m = np.arange(n_taps) - (n_taps - 1) / 2.0
    h = cutoff_norm * np.sinc(cutoff_norm * m)
    h *= np.hamming(n_taps)
    return h / h.sum()


def resample(x: np.ndarray, source_hz: float, target_hz: float = TARGET_RATE_HZ) -> np.ndarray:
    """Polyphase rational resampling with an anti-alias low-pass.

    Only downsampling (or rate identity) is supported. Output length is
    ceil(n * target / source). The anti-alias cutoff sits at 0.9x the
    target Nyquist to keep the passband clean of aliasing skirts.
    """
    x = np.asarray(x, dtype=np.float64)
    if target_hz > source_hz:
        raise UpsampleUnsupported(f"{source_hz} -> {target_hz} Hz would upsample")
    if target_hz == source_hz:
        return x.copy()
    ratio = _rational_ratio(target_hz, source_hz)
    up, down = ratio.numerator, ratio.denominator
    max_rate = max(up, down)
    taps = _windowed_sinc_lowpass(0.9 / max_rate, 20 * max_rate + 1)
    return resample_poly(x, up, down, window=taps)


def design_fir_bandpass(
    low_hz: float,
    high_hz: float,
    rate_hz: float,
    transition_hz: float = 0.5,
) -> FirFilter:
    """Hamming windowed-sinc band-pass with -6 dB points at the band edges.

    The tap count is the smallest odd integer >= 3.3 * rate / transition,
    which makes the ripple-to-ripple transition span `transition_hz` and
    yields the hamming window's ~0.0019 passband ripple / 53 dB stopband.
    """
    if not (0 < low_hz < high_hz < rate_hz / 2):
        raise InvalidBand(f"need 0 < {low_hz} < {high_hz} < {rate_hz / 2}")
    if transition_hz <= 0:
        raise InvalidBand(f"transition width {transition_hz} must be positive")

    n_taps = int(np.ceil(_HAMMING_WIDTH_FACTOR * rate_hz / transition_hz))
    if n_taps % 2 == 0:
        n_taps += 1

    nyq = rate_hz / 2.0
    f1, f2 = low_hz / nyq, high_hz / nyq
    m = np.arange(n_taps) - (n_taps - 1) / 2.0
    h = f2 * np.sinc(f2 * m) - f1 * np.sinc(f1 * m)
    h *= np.hamming(n_taps)

    # Normalize gain to exactly 1 at the band midpoint.
    fc = (low_hz + high_hz) / 2.0
    response = np.sum(h * np.exp(-2j * np.pi * fc / rate_hz * np.arange(n_taps)))
    h /= np.abs(response)

    return FirFilter(
        taps=h,
        band=(low_hz, high_hz),
        transition_hz=transition_hz,
        design_rate_hz=rate_hz,
    )


def frequency_response(filt: FirFilter, n_grid: int = 4096):
    """Magnitude response on an `n_grid`-point grid from 0 to Nyquist."""
    n_fft = 2 * (n_grid - 1)
    mag = np.abs(np.fft.rfft(filt.taps, n_fft))
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / filt.design_rate_hz)
    return freqs, mag


def apply_zero_phase(filt: FirFilter, x: np.ndarray) -> np.ndarray:
    """Single-pass filtering with the (N-1)/2 group delay removed.

    Valid because the kernel is linear-phase; edges are reflection-padded
    so the output keeps the input length without amplitude collapse.
    """
    x = np.asarray(x, dtype=np.float64)
    n_taps = filt.n_taps
    if x.shape[0] <= n_taps:
        raise SignalTooShort(f"signal of {x.shape[0]} samples needs > {n_taps}")
    pad = (n_taps - 1) // 2
    padded = np.pad(x, pad, mode="reflect")
    return fftconvolve(padded, filt.taps, mode="valid")


def split_bands(
    x: np.ndarray,
    rate_hz: float = TARGET_RATE_HZ,
    bands: dict[str, tuple[float, float]] | None = None,
    transition_hz: float = 0.5,
) -> BandSet:
    """Filter one signal into every configured band."""
    edges = BAND_EDGES_HZ if bands is None else bands
    out = {}
    for name, (low, high) in edges.items():
        filt = design_fir_bandpass(low, high, rate_hz, transition_hz)
        out[name] = apply_zero_phase(filt, x)
    return BandSet(rate_hz=rate_hz, bands=out)


def epoch(
    x: np.ndarray,
    rate_hz: float = TARGET_RATE_HZ,
    epoch_s: float = EPOCH_S,
    overlap_s: float = OVERLAP_S,
    band: str = "",
    subject_id: str = "",
) -> EpochSet:
    """Cut overlapping fixed-length epochs (views into the signal)."""
    x = np.asarray(x, dtype=np.float64)
    epoch_len = int(round(epoch_s * rate_hz))
    overlap_len = int(round(overlap_s * rate_hz))
    if epoch_len < 1 or not 0 <= overlap_len < epoch_len:
        raise ConfigError(f"bad epoch geometry: len {epoch_len}, overlap {overlap_len}")
    if x.shape[0] < epoch_len:
        raise SignalTooShort(f"{x.shape[0]} samples < one {epoch_len}-sample epoch")
    stride = epoch_len - overlap_len
    windows = np.lib.stride_tricks.sliding_window_view(x, epoch_len)[::stride]
    return EpochSet(
        epochs=windows,
        kept_mask=np.ones(windows.shape[0], dtype=bool),
        rate_hz=rate_hz,
        band=band,
        subject_id=subject_id,
    )


def drop_bad_epochs(es: EpochSet, p2p_limit_uv: float = DEFAULT_P2P_LIMIT_UV) -> EpochSet:
    """Drop epochs whose peak-to-peak amplitude exceeds the limit."""
    if not p2p_limit_uv > 0:
        raise ConfigError(f"p2p limit must be positive, got {p2p_limit_uv}")
    if es.n_kept == 0:
        raise AllEpochsDropped("epoch set is already empty")
    p2p = es.epochs.max(axis=1) - es.epochs.min(axis=1)
    keep = p2p <= p2p_limit_uv
    if not keep.any():
        raise AllEpochsDropped(
            f"all {es.n_kept} epochs exceed {p2p_limit_uv} uV peak-to-peak"
        )
    new_mask = es.kept_mask.copy()
    new_mask[np.flatnonzero(es.kept_mask)[~keep]] = False
    return replace(es, epochs=np.ascontiguousarray(es.epochs[keep]), kept_mask=new_mask)
