"""CART-style tree ensembles: bagged forests with best-Gini splits and
extremely randomized forests with uniform random thresholds.

Trees grow best-first (largest impurity decrease next), which is what a
leaf budget semantically requires; depth and leaf caps are enforced
together. Per-tree RNG streams are derived from (seed, tree_index) so any
execution order reproduces the same forest.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, EmptyTrainingSet, WidthMismatch
from ._split import grow_tree


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 1000
    max_leaf_nodes: int = 100
    max_depth: int = 10
    min_samples_split: int = 2

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ConfigError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.max_leaf_nodes < 2:
            raise ConfigError(f"max_leaf_nodes must be >= 2, got {self.max_leaf_nodes}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")


@dataclass
class Tree:
    """One fitted tree in flat arrays; leaves have left = right = -1."""

    feature: np.ndarray
    threshold: np.ndarray
    improvement: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_samples: np.ndarray
    pos_fraction: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def leaf_scores(self, X: np.ndarray) -> np.ndarray:
        """Leaf positive fraction for every row of X."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.left[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active[idx] = self.left[node[idx]] >= 0
        return self.pos_fraction[node]

    def depth(self, node: int = 0) -> int:
        if self.left[node] < 0:
            return 0
        return 1 + max(self.depth(self.left[node]), self.depth(self.right[node]))

    def leaf_count(self) -> int:
        return int(np.sum(self.left < 0))

    def importances(self, n_features: int) -> np.ndarray:
        out = np.zeros(n_features)
        internal = self.left >= 0
        np.add.at(out, self.feature[internal], self.improvement[internal])
        return out

    def to_dict(self, node: int = 0) -> dict:
        d = {"n": int(self.n_samples[node]), "p": float(self.pos_fraction[node])}
        if self.left[node] >= 0:
            d["f"] = int(self.feature[node])
            d["t"] = float(self.threshold[node])
            d["i"] = float(self.improvement[node])
            d["l"] = self.to_dict(self.left[node])
            d["r"] = self.to_dict(self.right[node])
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "Tree":
        feature, threshold, improvement = [], [], []
        left, right, n_samples, pos_fraction = [], [], [], []

        def add(d: dict) -> int:
            i = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            improvement.append(0.0)
            left.append(-1)
            right.append(-1)
            n_samples.append(d["n"])
            pos_fraction.append(d["p"])
            if "f" in d:
                feature[i] = d["f"]
                threshold[i] = d["t"]
                improvement[i] = d["i"]
                left[i] = add(d["l"])
                right[i] = add(d["r"])
            return i

        add(doc)
        return cls(
            feature=np.array(feature, dtype=np.int64),
            threshold=np.array(threshold),
            improvement=np.array(improvement),
            left=np.array(left, dtype=np.int64),
            right=np.array(right, dtype=np.int64),
            n_samples=np.array(n_samples, dtype=np.int64),
            pos_fraction=np.array(pos_fraction),
        )


def tree_depth(tree: Tree) -> int:
    return tree.depth()


def tree_leaf_count(tree: Tree) -> int:
    return tree.leaf_count()


@dataclass
class ForestModel:
    kind: str  # "rf" or "et"
    params: ForestParams
    seed: int
    n_features: int
    trees: list[Tree] = field(default_factory=list)
    columns: tuple[str, ...] | None = None
    degenerate: bool = False
    constant_score: float = 0.0
    threshold: float = 0.5

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting for the positive class."""
        X = _check_matrix(X, self.n_features)
        if self.degenerate:
            return np.full(X.shape[0], self.constant_score)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.leaf_scores(X) >= 0.5
        return votes / len(self.trees)

    def labels_from_scores(self, scores: np.ndarray) -> np.ndarray:
        return (scores >= self.threshold).astype(np.int64)

    def feature_importances(self) -> np.ndarray:
        """Mean per-tree impurity decrease per column, normalized to sum 1."""
        if self.degenerate:
            return np.zeros(self.n_features)
        total = np.zeros(self.n_features)
        for tree in self.trees:
            per_tree = tree.importances(self.n_features)
            s = per_tree.sum()
            if s > 0:
                total += per_tree / s
        s = total.sum()
        return total / s if s > 0 else total


def _check_training(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyTrainingSet(f"need a nonempty 2-D matrix, got shape {X.shape}")
    if y.shape[0] != X.shape[0]:
        raise WidthMismatch(f"{y.shape[0]} labels for {X.shape[0]} rows")
    labels = set(np.unique(y).tolist())
    if not labels <= {0, 1}:
        raise ConfigError(f"labels must be 0/1, got {sorted(labels)}")
    return np.ascontiguousarray(X), y.astype(np.float64)


def _check_matrix(X, n_features):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.shape[1] != n_features:
        raise WidthMismatch(f"expected {n_features} columns, got {X.shape[1]}")
    return X


def _fit_forest(kind, X, y, params, seed, columns, bootstrap, random_thresholds):
    X, y = _check_training(X, y)
    n, d = X.shape
    model = ForestModel(
        kind=kind, params=params, seed=int(seed), n_features=d, columns=columns
    )
    classes = np.unique(y)
    if classes.shape[0] == 1:
        model.degenerate = True
        model.constant_score = float(classes[0])
        warnings.warn(f"{kind}: single-class labels, fitting a constant predictor")
        return model

    max_features = max(1, int(np.sqrt(d)))
    max_evals = 2 * params.max_leaf_nodes - 1
    streams = np.random.SeedSequence(int(seed)).spawn(params.n_estimators)
    all_rows = np.arange(n, dtype=np.int64)
    for t in range(params.n_estimators):
        rng = np.random.default_rng(streams[t])
        rows = rng.integers(0, n, n, dtype=np.int64) if bootstrap else all_rows
        # candidate feature subsets and thresholds for every possible node,
        # pre-drawn so the kernel stays RNG-free
        feats = np.argsort(rng.random((max_evals, d)), axis=1)[:, :max_features]
        feats = np.ascontiguousarray(feats)
        uniforms = rng.random((max_evals, max_features))
        arrays = grow_tree(
            X, y, rows, params.max_depth, params.max_leaf_nodes,
            params.min_samples_split, feats, uniforms, random_thresholds,
        )
        feature, threshold, improvement, left, right, n_node, pos_frac, n_nodes = arrays
        model.trees.append(
            Tree(
                feature=feature[:n_nodes].copy(),
                threshold=threshold[:n_nodes].copy(),
                improvement=improvement[:n_nodes].copy(),
                left=left[:n_nodes].copy(),
                right=right[:n_nodes].copy(),
                n_samples=n_node[:n_nodes].copy(),
                pos_fraction=pos_frac[:n_nodes].copy(),
            )
        )
    return model


def fit_random_forest(X, y, params: ForestParams | None = None, seed: int = 0,
                      columns=None) -> ForestModel:
    """Bagged trees, sqrt(d) feature candidates, best-Gini thresholds."""
    return _fit_forest(
        "rf", X, y, params or ForestParams(), seed, columns,
        bootstrap=True, random_thresholds=False,
    )


def fit_extra_trees(X, y, params: ForestParams | None = None, seed: int = 0,
                    columns=None) -> ForestModel:
    """Full-sample trees with uniform random thresholds per candidate."""
    return _fit_forest(
        "et", X, y, params or ForestParams(), seed, columns,
        bootstrap=False, random_thresholds=True,
    )
