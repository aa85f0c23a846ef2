"""Shared model plumbing: fit dispatch by kind, label/score prediction,
and a versioned JSON document format for trained models."""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from ..errors import ConfigError, DataError
from .knn import KnnModel, KnnParams, fit_knn
from .svm import SvmModel, SvmParams, fit_linear_svm
from .trees import ForestModel, ForestParams, Tree, fit_extra_trees, fit_random_forest

MODEL_FORMAT = "pdeeg-model"
MODEL_FORMAT_VERSION = 1

CLASSIFIER_KINDS = ("rf", "et", "svm", "knn")


def default_params(kind: str):
    if kind in ("rf", "et"):
        return ForestParams()
    if kind == "svm":
        return SvmParams()
    if kind == "knn":
        return KnnParams()
    raise ConfigError(f"unknown classifier kind {kind!r}")


def fit_classifier(kind: str, X, y, params=None, seed: int = 0, columns=None):
    """Fit any of the four classifier kinds with its parameter object."""
    if kind == "rf":
        return fit_random_forest(X, y, params, seed=seed, columns=columns)
    if kind == "et":
        return fit_extra_trees(X, y, params, seed=seed, columns=columns)
    if kind == "svm":
        return fit_linear_svm(X, y, params, columns=columns)
    if kind == "knn":
        return fit_knn(X, y, params, columns=columns)
    raise ConfigError(f"unknown classifier kind {kind!r}")


def predict(model, X) -> tuple[np.ndarray, np.ndarray]:
    """(labels, scores) for any trained model.

    Scores are vote fractions for forests and KNN and signed decision
    values for the SVM; labels apply each model's own threshold rule.
    """
    scores = model.scores(X)
    return model.labels_from_scores(scores), scores


def model_to_json(model) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "n_features": model.n_features,
        "columns": list(model.columns) if model.columns else None,
        "params": asdict(model.params),
    }
    if isinstance(model, ForestModel):
        doc["seed"] = model.seed
        doc["degenerate"] = model.degenerate
        doc["constant_score"] = model.constant_score
        doc["trees"] = [t.to_dict() for t in model.trees]
    elif isinstance(model, SvmModel):
        doc["w"] = model.w.tolist()
        doc["b"] = model.b
        doc["gap"] = model.gap
        doc["sweeps"] = model.sweeps
        doc["converged"] = model.converged
    elif isinstance(model, KnnModel):
        doc["X_train"] = model.X_train.tolist()
        doc["y_train"] = model.y_train.tolist()
    else:
        raise ConfigError(f"cannot serialize {type(model).__name__}")
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def model_from_json(text: str):
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_FORMAT_VERSION:
        raise DataError("not a recognized model document")
    kind = doc["kind"]
    columns = tuple(doc["columns"]) if doc.get("columns") else None
    if kind in ("rf", "et"):
        model = ForestModel(
            kind=kind,
            params=ForestParams(**doc["params"]),
            seed=doc["seed"],
            n_features=doc["n_features"],
            columns=columns,
            degenerate=doc["degenerate"],
            constant_score=doc["constant_score"],
        )
        model.trees = [Tree.from_dict(t) for t in doc["trees"]]
        return model
    if kind == "svm":
        return SvmModel(
            params=SvmParams(**doc["params"]),
            w=np.array(doc["w"]),
            b=doc["b"],
            n_features=doc["n_features"],
            gap=doc["gap"],
            sweeps=doc["sweeps"],
            converged=doc.get("converged", True),
            columns=columns,
        )
    if kind == "knn":
        return KnnModel(
            params=KnnParams(**doc["params"]),
            X_train=np.array(doc["X_train"]),
            y_train=np.array(doc["y_train"]),
            n_features=doc["n_features"],
            columns=columns,
        )
    raise DataError(f"unknown model kind {kind!r}")
