"""Per-epoch feature extraction (eight features per band) and assembly of
the labeled feature matrix.

Column layout is band-major, feature-minor: for each of the five bands in
order, the eight features in FEATURE_NAMES order, giving 40 named columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    EmptyCohort,
    EmptyEpoch,
    EpochTooShort,
    InconsistentBands,
    ZeroSpectrum,
)
from .preprocess import BAND_EDGES_HZ, BAND_ORDER, EpochSet
from .spectral import PsdEstimate, WelchConfig, spectral_entropy, welch_psd
from .wavelet import approximate_entropy, dwt_db4, wavelet_energy

FEATURE_NAMES = (
    "mean",
    "std",
    "band_power",
    "spectral_entropy",
    "energy",
    "approx_entropy",
    "hjorth_activity",
    "hjorth_mobility",
)

GROUP_LABELS = {"HC": 0, "PD": 1}  # PD is the positive class


def feature_columns(bands=BAND_ORDER) -> tuple[str, ...]:
    return tuple(f"{band}_{feat}" for band in bands for feat in FEATURE_NAMES)


@dataclass(frozen=True)
class FeatureVector:
    mean: float
    std: float
    band_power: float
    spectral_entropy: float
    energy: float
    approx_entropy: float
    hjorth_activity: float
    hjorth_mobility: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.mean,
                self.std,
                self.band_power,
                self.spectral_entropy,
                self.energy,
                self.approx_entropy,
                self.hjorth_activity,
                self.hjorth_mobility,
            ]
        )


def time_stats(epoch: np.ndarray) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation."""
    epoch = np.asarray(epoch, dtype=np.float64)
    if epoch.size == 0:
        raise EmptyEpoch("cannot compute statistics of an empty epoch")
    return float(epoch.mean()), float(epoch.std())


def hjorth(epoch: np.ndarray, rate_hz: float = 1.0) -> tuple[float, float]:
    """Activity (variance) and mobility (sqrt of derivative-variance over
    variance), with the derivative taken as the rate-scaled first
    difference. A flat epoch has mobility 0 by convention."""
    epoch = np.asarray(epoch, dtype=np.float64)
    if epoch.size < 2:
        raise EpochTooShort(f"need >= 2 samples, got {epoch.size}")
    activity = float(np.var(epoch))
    if activity == 0.0:
        return 0.0, 0.0
    deriv = np.diff(epoch) * rate_hz
    return activity, float(np.sqrt(np.var(deriv) / activity))


def extract_epoch_features(
    epoch: np.ndarray,
    rate_hz: float,
    band_edges: tuple[float, float],
    welch: WelchConfig | None = None,
    apen_m: int = 2,
    apen_r_factor: float = 0.2,
) -> FeatureVector:
    """All eight features of one band-filtered epoch."""
    epoch = np.asarray(epoch, dtype=np.float64)
    mean, std = time_stats(epoch)

    cfg = welch if welch is not None else WelchConfig(rate_hz=rate_hz)
    psd = welch_psd(epoch, cfg)
    band_power = psd.band_mean(*band_edges)
    try:
        entropy = spectral_entropy(psd)
    except ZeroSpectrum:
        entropy = 0.0  # degenerate epoch, normally dropped upstream

    dec = dwt_db4(epoch)
    energy = wavelet_energy(dec)
    apen = approximate_entropy(dec.cA, m=apen_m, r_factor=apen_r_factor)

    activity, mobility = hjorth(epoch, rate_hz)
    return FeatureVector(
        mean=mean,
        std=std,
        band_power=band_power,
        spectral_entropy=entropy,
        energy=energy,
        approx_entropy=apen,
        hjorth_activity=activity,
        hjorth_mobility=mobility,
    )


@dataclass
class SubjectEpochs:
    """One subject's kept epochs for every band, row-aligned across bands."""

    subject_id: str
    group: str  # "HC" or "PD"
    band_epochs: dict[str, EpochSet]

    def __post_init__(self):
        if self.group not in GROUP_LABELS:
            raise DataError(f"{self.subject_id}: group {self.group!r} not in HC/PD")
        counts = {b: es.n_kept for b, es in self.band_epochs.items()}
        if len(set(counts.values())) > 1:
            raise InconsistentBands(f"{self.subject_id}: epoch counts differ {counts}")

    @property
    def label(self) -> int:
        return GROUP_LABELS[self.group]

    @property
    def n_epochs(self) -> int:
        return next(iter(self.band_epochs.values())).n_kept


@dataclass
class FeatureMatrix:
    """Rows = kept epochs; 40 feature columns plus label and subject id."""

    X: np.ndarray
    y: np.ndarray
    subject_ids: list[str]
    columns: tuple[str, ...] = field(default_factory=feature_columns)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.columns):
            raise DataError(
                f"matrix width {self.X.shape} != {len(self.columns)} columns"
            )
        if self.X.shape[0] != self.y.shape[0] or self.X.shape[0] != len(self.subject_ids):
            raise DataError("row count mismatch between X, y, and subject ids")
        if len(set(self.columns)) != len(self.columns):
            raise DataError("duplicate column names")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject_id", "label", *self.columns])
            for sid, label, row in zip(self.subject_ids, self.y, self.X):
                writer.writerow([sid, int(label), *(repr(float(v)) for v in row)])

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[:2] != ["subject_id", "label"]:
                raise DataError(f"{path}: not a feature matrix CSV")
            columns = tuple(header[2:])
            ids, labels, rows = [], [], []
            for rec in reader:
                ids.append(rec[0])
                labels.append(int(rec[1]))
                rows.append([float(v) for v in rec[2:]])
        if not rows:
            raise DataError(f"{path}: no feature rows")
        return cls(
            X=np.array(rows), y=np.array(labels), subject_ids=ids, columns=columns
        )


def build_feature_matrix(
    subjects: list[SubjectEpochs],
    rate_hz: float = 250.0,
    band_edges: dict[str, tuple[float, float]] | None = None,
    welch: WelchConfig | None = None,
    apen_m: int = 2,
    apen_r_factor: float = 0.2,
) -> FeatureMatrix:
    """Extract every subject's per-epoch features into one labeled matrix."""
    if not subjects:
        raise EmptyCohort("no subjects to extract features from")
    edges = BAND_EDGES_HZ if band_edges is None else band_edges
    bands = tuple(edges)
    expected = set(bands)
    cfg = welch if welch is not None else WelchConfig(rate_hz=rate_hz)

    columns = feature_columns(bands)
    rows, labels, ids = [], [], []
    for subj in subjects:
        if set(subj.band_epochs) != expected:
            raise InconsistentBands(
                f"{subj.subject_id}: bands {sorted(subj.band_epochs)} != {sorted(expected)}"
            )
        per_band = [subj.band_epochs[b] for b in bands]
        for e in range(subj.n_epochs):
            row = np.concatenate(
                [
                    extract_epoch_features(
                        es.epochs[e], rate_hz, edges[band], cfg, apen_m, apen_r_factor
                    ).as_array()
                    for band, es in zip(bands, per_band)
                ]
            )
            rows.append(row)
            labels.append(subj.label)
            ids.append(subj.subject_id)

    X = np.array(rows)
    bad = ~np.isfinite(X)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise DataError(
            f"non-finite feature {columns[c]} for subject {ids[r]} (row {r})"
        )
    return FeatureMatrix(X=X, y=np.array(labels), subject_ids=ids, columns=columns)
