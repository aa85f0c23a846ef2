"""End-to-end orchestration of the per-subject preprocessing chain and
cohort feature extraction. Pure functions over Recordings; file handling
lives in the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bdf import Recording
from .config import PipelineConfig
from .errors import AllEpochsDropped
from .features import FeatureMatrix, SubjectEpochs, build_feature_matrix
from .preprocess import EpochSet, average_channels, epoch, resample, split_bands
from .spectral import WelchConfig


@dataclass
class SubjectDiagnostics:
    subject_id: str
    group: str
    n_epochs: int
    n_kept: int

    @property
    def n_dropped(self) -> int:
        return self.n_epochs - self.n_kept


def prepare_subject(rec: Recording, cfg: PipelineConfig) -> tuple[SubjectEpochs, SubjectDiagnostics]:
    """Average -> resample -> band-split -> epoch -> reject.

    The peak-to-peak rejection mask is computed per band and intersected,
    so every band keeps the same rows and the feature matrix stays
    rectangular.
    """
    averaged = average_channels(rec, cfg.channels)
    signal = averaged.data[0]
    if rec.rate_hz != cfg.resample_hz:
        signal = resample(signal, rec.rate_hz, cfg.resample_hz)
    bands = split_bands(signal, cfg.resample_hz, cfg.bands, cfg.transition_hz)

    band_sets: dict[str, EpochSet] = {}
    common_keep = None
    for name, sig in bands.bands.items():
        es = epoch(sig, cfg.resample_hz, cfg.epoch_s, cfg.overlap_s,
                   band=name, subject_id=rec.subject.id)
        p2p = es.epochs.max(axis=1) - es.epochs.min(axis=1)
        keep = p2p <= cfg.p2p_limit_uv
        common_keep = keep if common_keep is None else (common_keep & keep)
        band_sets[name] = es

    if not common_keep.any():
        raise AllEpochsDropped(
            f"{rec.subject.id}: every epoch exceeds {cfg.p2p_limit_uv} uV in some band"
        )
    kept = {
        name: EpochSet(
            epochs=np.ascontiguousarray(es.epochs[common_keep]),
            kept_mask=common_keep.copy(),
            rate_hz=es.rate_hz,
            band=name,
            subject_id=es.subject_id,
        )
        for name, es in band_sets.items()
    }
    subject = SubjectEpochs(
        subject_id=rec.subject.id, group=rec.subject.group, band_epochs=kept
    )
    diag = SubjectDiagnostics(
        subject_id=rec.subject.id,
        group=rec.subject.group,
        n_epochs=int(common_keep.shape[0]),
        n_kept=int(common_keep.sum()),
    )
    return subject, diag


def extract_features(recordings, cfg: PipelineConfig) -> tuple[FeatureMatrix, list[SubjectDiagnostics]]:
    """Feature matrix for an iterable of Recordings (order preserved)."""
    subjects, diagnostics = [], []
    for rec in recordings:
        subj, diag = prepare_subject(rec, cfg)
        subjects.append(subj)
        diagnostics.append(diag)
    welch = WelchConfig(
        rate_hz=cfg.resample_hz,
        segment_len=cfg.welch.segment_len,
        overlap_len=cfg.welch.overlap_len,
        window=cfg.welch.window,
    )
    fm = build_feature_matrix(
        subjects,
        rate_hz=cfg.resample_hz,
        band_edges=cfg.bands,
        welch=welch,
        apen_m=cfg.apen.m,
        apen_r_factor=cfg.apen.r_factor,
    )
    return fm, diagnostics
