"""Random search over a discrete hyperparameter grid, scored by mean
k-fold cross-validated accuracy."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import EmptySpace
from .base import default_params, fit_classifier, predict


@dataclass(frozen=True)
class SearchSpace:
    kind: str
    grid: dict[str, tuple]  # parameter name -> candidate values

    def __post_init__(self):
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise EmptySpace(f"empty search space for {self.kind!r}")


def _cv_accuracy(kind, params, X, y, k_folds, seed) -> float:
    from ..eval import kfold_split  # local import; eval depends on models

    folds = kfold_split(X.shape[0], k=k_folds, seed=seed, stratify_labels=y)
    accs = []
    all_rows = np.arange(X.shape[0])
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_rows, test_idx)
        fold_seed = int(np.random.SeedSequence(entropy=seed, spawn_key=(f,)).generate_state(1)[0])
        model = fit_classifier(kind, X[train_idx], y[train_idx], params, seed=fold_seed)
        labels, _ = predict(model, X[test_idx])
        accs.append(float(np.mean(labels == y[test_idx])))
    return float(np.mean(accs))


def random_grid_search(
    space: SearchSpace,
    X,
    y,
    k_folds: int = 5,
    n_draws: int = 10,
    seed: int = 0,
):
    """Sample configurations uniformly; return the parameter object with
    the best mean CV accuracy (ties keep the earliest draw)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    names = sorted(space.grid)
    base = default_params(space.kind)

    best_params = None
    best_acc = -np.inf
    scored: dict[tuple, float] = {}
    for _ in range(n_draws):
        choice = tuple(
            (name, space.grid[name][int(rng.integers(len(space.grid[name])))])
            for name in names
        )
        if choice in scored:
            acc = scored[choice]
        else:
            params = replace(base, **dict(choice))
            acc = _cv_accuracy(space.kind, params, X, y, k_folds, seed)
            scored[choice] = acc
        if acc > best_acc:
            best_acc = acc
            best_params = replace(base, **dict(choice))
    return best_params
