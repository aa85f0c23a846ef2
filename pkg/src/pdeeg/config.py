"""Declarative pipeline configuration with strict validation.

Configs are JSON documents with a versioned schema; unknown keys anywhere
are fatal (silent typos in analysis configs are a known hazard). All
defaults reproduce the pipeline's reference constants: 250 Hz, the five
band table, 5 s / 1 s epochs, 1250/250 hamming Welch segments, the four
classifiers with their tuned hyperparameters, and 10-fold CV.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .models import ForestParams, KnnParams, SvmParams
from .preprocess import BAND_EDGES_HZ
from .synth import EEG_LABELS_32

SCHEMA_VERSION = 1


def _check_keys(d: dict, allowed, where: str):
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class WelchSettings:
    segment_len: int = 1250
    overlap_len: int = 250
    window: str = "hamming"


@dataclass(frozen=True)
class ApenSettings:
    m: int = 2
    r_factor: float = 0.2


@dataclass(frozen=True)
class CvSettings:
    k: int = 10
    seed: int = 0
    grouped_by_subject: bool = False


@dataclass(frozen=True)
class ClassifierSettings:
    kind: str
    params: object  # ForestParams | SvmParams | KnnParams

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierSettings":
        if "kind" not in d:
            raise ConfigError("classifier entry needs a 'kind'")
        kind = d["kind"]
        rest = {k: v for k, v in d.items() if k != "kind"}
        try:
            if kind in ("rf", "et"):
                params = ForestParams(**rest)
            elif kind == "svm":
                params = SvmParams(**rest)
            elif kind == "knn":
                params = KnnParams(**rest)
            else:
                raise ConfigError(f"unknown classifier kind {kind!r}")
        except TypeError as exc:
            raise ConfigError(f"classifier {kind!r}: {exc}") from None
        return cls(kind=kind, params=params)

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return {"kind": self.kind, **asdict(self.params)}


def default_classifiers() -> tuple[ClassifierSettings, ...]:
    return (
        ClassifierSettings("rf", ForestParams()),
        ClassifierSettings("et", ForestParams()),
        ClassifierSettings("svm", SvmParams()),
        ClassifierSettings("knn", KnnParams()),
    )


@dataclass(frozen=True)
class GridSearchSettings:
    mode: str = "nested"  # "nested" (per training fold) or "flat" (whole matrix)
    n_draws: int = 10
    k: int = 5
    space: dict = field(default_factory=dict)  # kind -> {param: [values]}

    def __post_init__(self):
        if self.mode not in ("nested", "flat"):
            raise ConfigError(f"grid search mode must be nested|flat, got {self.mode!r}")


@dataclass
class PipelineConfig:
    input_dir: str = "."
    manifest: str = "manifest.json"
    output_dir: str = "out"
    channels: tuple[str, ...] = EEG_LABELS_32
    resample_hz: float = 250.0
    bands: dict = field(default_factory=lambda: dict(BAND_EDGES_HZ))
    transition_hz: float = 0.5
    epoch_s: float = 5.0
    overlap_s: float = 1.0
    p2p_limit_uv: float = 150.0
    welch: WelchSettings = field(default_factory=WelchSettings)
    apen: ApenSettings = field(default_factory=ApenSettings)
    classifiers: tuple[ClassifierSettings, ...] = field(default_factory=default_classifiers)
    cv: CvSettings = field(default_factory=CvSettings)
    grid_search: GridSearchSettings | None = None
    save_models: bool = True

    def __post_init__(self):
        for name, value in (
            ("resample_hz", self.resample_hz),
            ("transition_hz", self.transition_hz),
            ("epoch_s", self.epoch_s),
            ("p2p_limit_uv", self.p2p_limit_uv),
        ):
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.overlap_s < 0 or self.overlap_s >= self.epoch_s:
            raise ConfigError("overlap_s must be in [0, epoch_s)")
        for band, edges in self.bands.items():
            low, high = edges
            if not 0 < low < high:
                raise ConfigError(f"band {band}: bad edges {edges}")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "input_dir": self.input_dir,
            "manifest": self.manifest,
            "output_dir": self.output_dir,
            "channels": list(self.channels),
            "resample_hz": self.resample_hz,
            "bands": {k: list(v) for k, v in self.bands.items()},
            "transition_hz": self.transition_hz,
            "epoch_s": self.epoch_s,
            "overlap_s": self.overlap_s,
            "p2p_limit_uv": self.p2p_limit_uv,
            "welch": {
                "segment_len": self.welch.segment_len,
                "overlap_len": self.welch.overlap_len,
                "window": self.welch.window,
            },
            "apen": {"m": self.apen.m, "r_factor": self.apen.r_factor},
            "classifiers": [c.to_dict() for c in self.classifiers],
            "cv": {
                "k": self.cv.k,
                "seed": self.cv.seed,
                "grouped_by_subject": self.cv.grouped_by_subject,
            },
            "grid_search": (
                None
                if self.grid_search is None
                else {
                    "mode": self.grid_search.mode,
                    "n_draws": self.grid_search.n_draws,
                    "k": self.grid_search.k,
                    "space": self.grid_search.space,
                }
            ),
            "save_models": self.save_models,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        _check_keys(
            d,
            {
                "schema_version", "input_dir", "manifest", "output_dir", "channels",
                "resample_hz", "bands", "transition_hz", "epoch_s", "overlap_s",
                "p2p_limit_uv", "welch", "apen", "classifiers", "cv", "grid_search",
                "save_models",
            },
            "config",
        )
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}")
        kwargs = {}
        for key in ("input_dir", "manifest", "output_dir", "resample_hz",
                    "transition_hz", "epoch_s", "overlap_s", "p2p_limit_uv",
                    "save_models"):
            if key in d:
                kwargs[key] = d[key]
        if "channels" in d:
            kwargs["channels"] = tuple(d["channels"])
        if "bands" in d:
            kwargs["bands"] = {k: (float(v[0]), float(v[1])) for k, v in d["bands"].items()}
        if "welch" in d:
            _check_keys(d["welch"], {"segment_len", "overlap_len", "window"}, "welch")
            kwargs["welch"] = WelchSettings(**d["welch"])
        if "apen" in d:
            _check_keys(d["apen"], {"m", "r_factor"}, "apen")
            kwargs["apen"] = ApenSettings(**d["apen"])
        if "classifiers" in d:
            kwargs["classifiers"] = tuple(
                ClassifierSettings.from_dict(c) for c in d["classifiers"]
            )
        if "cv" in d:
            _check_keys(d["cv"], {"k", "seed", "grouped_by_subject"}, "cv")
            kwargs["cv"] = CvSettings(**d["cv"])
        if d.get("grid_search") is not None:
            _check_keys(d["grid_search"], {"mode", "n_draws", "k", "space"}, "grid_search")
            kwargs["grid_search"] = GridSearchSettings(**d["grid_search"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(canonical_json(self.to_dict()) + "\n")

    def hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()[:16]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
