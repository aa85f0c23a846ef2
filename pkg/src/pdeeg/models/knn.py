"""k-nearest-neighbor classifier over Euclidean distance.

The neighbor count is clamped to the training size (the requested value
may exceed a CV fold); distance ties resolve to the lowest training row
index and vote ties to the negative class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, EmptyTrainingSet
from .trees import _check_matrix, _check_training


@dataclass(frozen=True)
class KnnParams:
    n_neighbors: int = 1000

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise ConfigError(f"n_neighbors must be >= 1, got {self.n_neighbors}")


@dataclass
class KnnModel:
    params: KnnParams
    X_train: np.ndarray
    y_train: np.ndarray
    n_features: int
    columns: tuple[str, ...] | None = None
    kind: str = "knn"
    threshold: float = 0.5

    @property
    def effective_k(self) -> int:
        return min(self.params.n_neighbors, self.X_train.shape[0])

    @property
    def k_clamped(self) -> bool:
        return self.effective_k < self.params.n_neighbors

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Positive fraction among the k nearest training points."""
        X = _check_matrix(X, self.n_features)
        k = self.effective_k
        out = np.empty(X.shape[0])
        # chunked so the distance matrix stays modest
        chunk = max(1, 20_000_000 // max(1, self.X_train.shape[0]))
        for start in range(0, X.shape[0], chunk):
            q = X[start : start + chunk]
            d2 = ((q[:, None, :] - self.X_train[None, :, :]) ** 2).sum(axis=2)
            order = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[start : start + chunk] = self.y_train[order].mean(axis=1)
        return out

    def labels_from_scores(self, scores: np.ndarray) -> np.ndarray:
        # strictly greater: an even split of neighbor votes stays negative
        return (scores > self.threshold).astype(np.int64)


def fit_knn(X, y, params: KnnParams | None = None, columns=None) -> KnnModel:
    params = params or KnnParams()
    X, y = _check_training(X, y)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    return KnnModel(
        params=params,
        X_train=X.copy(),
        y_train=y.copy(),
        n_features=X.shape[1],
        columns=columns,
    )
