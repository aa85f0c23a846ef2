"""Deterministic synthetic resting-EEG generation for fixtures and cohorts.

Cohort recordings are built from random-phase pink noise: the magnitude
spectrum is a fixed 1/f envelope and only phases are drawn, so band powers
are matched across subjects and the two classes differ only through the
injected alpha rhythm. Channels mix a shared component with per-channel
noise so that channel averaging raises SNR without erasing the rhythm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bdf import Recording, Subject, write_bdf
from .errors import ConfigError, NyquistViolation

# BioSemi 32-electrode cap labels, frontal to occipital order.
EEG_LABELS_32 = (
    "Fp1", "AF3", "F7", "F3", "FC1", "FC5", "T7", "C3",
    "CP1", "CP5", "P7", "P3", "Pz", "PO3", "O1", "Oz",
    "O2", "PO4", "P4", "P8", "CP6", "CP2", "C4", "T8",
    "FC6", "FC2", "F4", "F8", "AF4", "Fp2", "Fz", "Cz",
)
REFERENCE_LABELS = ("EXG1", "EXG2")

ALPHA_TONES_HZ = (9.0, 10.0, 11.0)  # inside the 8.5-11.5 Hz band


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a sum-of-sinusoids test signal."""

    rate_hz: float
    duration_s: float
    components: tuple[tuple[float, float, float], ...] = ()  # (freq, amp, phase)
    noise_std_uv: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rate_hz <= 0 or self.duration_s <= 0:
            raise ConfigError("rate_hz and duration_s must be positive")
        if self.noise_std_uv < 0:
            raise ConfigError("noise_std_uv must be >= 0")
        for f, _, _ in self.components:
            if f <= 0:
                raise ConfigError(f"component frequency {f} must be positive")
            if 2 * f >= self.rate_hz:
                raise NyquistViolation(
                    f"{f} Hz needs a rate above {2 * f} Hz, got {self.rate_hz}"
                )

    @property
    def n_samples(self) -> int:
        return int(round(self.rate_hz * self.duration_s))


def sinusoid(spec: SynthSpec) -> Recording:
    """Seeded sum of sinusoids plus white noise, as a 1-channel Recording."""
    t = np.arange(spec.n_samples) / spec.rate_hz
    x = np.zeros(spec.n_samples)
    for freq, amp, phase in spec.components:
        x += amp * np.sin(2 * np.pi * freq * t + phase)
    if spec.noise_std_uv > 0:
        rng = np.random.default_rng(spec.seed)
        x += rng.normal(0.0, spec.noise_std_uv, spec.n_samples)
    return Recording(
        rate_hz=spec.rate_hz,
        labels=("synth",),
        data=x[np.newaxis, :],
        subject=Subject(id="synth"),
    )


def _pink_envelope(n: int, rate_hz: float, floor_hz: float = 0.5) -> np.ndarray:
    """One-sided magnitude envelope with power density proportional to 1/f."""
    freqs = np.fft.rfftfreq(n, d=1.0 / rate_hz)
    env = np.zeros_like(freqs)
    env[1:] = np.maximum(freqs[1:], floor_hz) ** -0.5
    if n % 2 == 0:
        env[-1] = 0.0  # keep Nyquist bin real/empty
    return env


def _phase_noise(env: np.ndarray, n: int, std_uv: float, rng: np.random.Generator) -> np.ndarray:
    """Time series with magnitude spectrum `env`, random phases, exact power."""
    phases = rng.uniform(0.0, 2 * np.pi, env.shape[0])
    spectrum = env * np.exp(1j * phases)
    spectrum[0] = 0.0
    # Parseval for the one-sided layout: mean power = 2*sum|Z|^2 / n^2.
    power = 2.0 * np.sum(env**2) / n**2
    if power > 0:
        spectrum *= std_uv / np.sqrt(power)
    return np.fft.irfft(spectrum, n=n)


@dataclass(frozen=True)
class CohortSpec:
    """Parameters of the two-class synthetic cohort."""

    n_hc: int
    n_pd: int
    contrast_uv2: float  # extra alpha-band power injected into PD subjects
    seed: int = 0
    rate_hz: float = 512.0
    duration_s: float = 180.0
    n_eeg_channels: int = 32
    include_references: bool = True
    base_std_uv: float = 20.0
    shared_fraction: float = 0.6
    noise_floor_hz: float = 0.5

    def __post_init__(self):
        if self.n_hc < 1 or self.n_pd < 1:
            raise ConfigError("need at least one subject per class")
        if self.contrast_uv2 < 0:
            raise ConfigError("contrast must be >= 0")
        if not 1 <= self.n_eeg_channels <= len(EEG_LABELS_32):
            raise ConfigError(f"n_eeg_channels must be in [1, {len(EEG_LABELS_32)}]")
        if not 0.0 <= self.shared_fraction < 1.0:
            raise ConfigError("shared_fraction must be in [0, 1)")
        if 2 * max(ALPHA_TONES_HZ) >= self.rate_hz:
            raise NyquistViolation(f"rate {self.rate_hz} too low for the alpha rhythm")

    @property
    def labels(self) -> tuple[str, ...]:
        labels = EEG_LABELS_32[: self.n_eeg_channels]
        return labels + REFERENCE_LABELS if self.include_references else labels

    @property
    def n_samples(self) -> int:
        return int(round(self.rate_hz * self.duration_s))


def _subject_recording(spec: CohortSpec, subject: Subject, ss: np.random.SeedSequence,
                       with_rhythm: bool) -> Recording:
    rng = np.random.default_rng(ss)
    n = spec.n_samples
    env = _pink_envelope(n, spec.rate_hz, spec.noise_floor_hz)
    rho = spec.shared_fraction

    common = _phase_noise(env, n, spec.base_std_uv * np.sqrt(rho), rng)
    if with_rhythm and spec.contrast_uv2 > 0:
        amp = np.sqrt(2.0 * spec.contrast_uv2 / len(ALPHA_TONES_HZ))
        t = np.arange(n) / spec.rate_hz
        for freq in ALPHA_TONES_HZ:
            common += amp * np.sin(2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))

    labels = spec.labels
    data = np.empty((len(labels), n))
    indiv_std = spec.base_std_uv * np.sqrt(1.0 - rho)
    for c in range(len(labels)):
        data[c] = common + _phase_noise(env, n, indiv_std, rng)
    return Recording(rate_hz=spec.rate_hz, labels=labels, data=data, subject=subject)


def iter_cohort(spec: CohortSpec):
    """Yield HC then PD recordings, each from an independent seeded stream."""
    root = np.random.SeedSequence(spec.seed)
    children = root.spawn(spec.n_hc + spec.n_pd)
    idx = 0
    for i in range(spec.n_hc):
        subject = Subject(id=f"HC{i + 1:02d}", group="HC", session="rest")
        yield _subject_recording(spec, subject, children[idx], with_rhythm=False)
        idx += 1
    for i in range(spec.n_pd):
        subject = Subject(id=f"PD{i + 1:02d}", group="PD", session="rest")
        yield _subject_recording(spec, subject, children[idx], with_rhythm=True)
        idx += 1


def cohort(n_hc: int, n_pd: int, contrast_uv2: float, seed: int = 0, **kwargs) -> list[Recording]:
    """Materialize the full cohort; see CohortSpec for knobs."""
    spec = CohortSpec(n_hc=n_hc, n_pd=n_pd, contrast_uv2=contrast_uv2, seed=seed, **kwargs)
    return list(iter_cohort(spec))


def write_cohort(spec: CohortSpec, out_dir, quantization: tuple[float, float] = (-1000.0, 1000.0)) -> Path:
    """Write one BDF per subject plus a label manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for rec in iter_cohort(spec):
        name = f"{rec.subject.id.lower()}.bdf"
        (out / name).write_bytes(write_bdf(rec, quantization))
        files[name] = {"group": rec.subject.group, "subject": rec.subject.id}
    manifest = {
        "seed": spec.seed,
        "contrast_uv2": spec.contrast_uv2,
        "files": files,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
