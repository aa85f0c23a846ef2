"""Cross-validated evaluation: stratified folds, confusion-matrix metrics,
ROC/PR curves, forest feature importance, band correlation matrix, and
per-feature OLS significance statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _scipy_stats

from .errors import (
    ConfigError,
    EmptyConfusion,
    KTooLarge,
    SingleClassTruth,
    UnsupportedModel,
)
from .models import ForestModel, fit_classifier, predict
from .models.base import default_params


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ConfigError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            tn=self.tn + other.tn,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
        )

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionMatrix":
        y_true = np.asarray(y_true).astype(int)
        y_pred = np.asarray(y_pred).astype(int)
        return cls(
            tp=int(np.sum((y_true == 1) & (y_pred == 1))),
            tn=int(np.sum((y_true == 0) & (y_pred == 0))),
            fp=int(np.sum((y_true == 0) & (y_pred == 1))),
            fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        )

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    undefined: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "undefined": list(self.undefined),
        }


def metrics(cm: ConfusionMatrix) -> MetricSet:
    """Accuracy, precision, recall, F1 from confusion counts; 0/0 ratios
    are reported as 0 and flagged in `undefined`."""
    if cm.total == 0:
        raise EmptyConfusion("confusion matrix has no counts")
    undefined = []
    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp > 0:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        undefined.append("precision")
    if cm.tp + cm.fn > 0:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        undefined.append("recall")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        undefined.append("f1")
    return MetricSet(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        undefined=tuple(undefined),
    )


def kfold_split(n_rows: int, k: int = 10, seed: int = 0, stratify_labels=None):
    """k disjoint, exhaustive test-index sets with sizes within one of
    each other; label-stratified when labels are given."""
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    if k > n_rows:
        raise KTooLarge(f"k={k} folds but only {n_rows} rows")
    rng = np.random.default_rng(seed)
    if stratify_labels is None:
        perm = rng.permutation(n_rows)
        return [np.sort(chunk) for chunk in np.array_split(perm, k)]

    labels = np.asarray(stratify_labels)
    if labels.shape[0] != n_rows:
        raise ConfigError(f"{labels.shape[0]} labels for {n_rows} rows")
    folds = [[] for _ in range(k)]
    totals = np.zeros(k, dtype=int)
    for value in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == value))
        counts = np.full(k, idx.shape[0] // k)
        remainder = idx.shape[0] % k
        if remainder:
            # put the spare rows on the currently smallest folds
            counts[np.argsort(totals, kind="stable")[:remainder]] += 1
        start = 0
        for f in range(k):
            folds[f].extend(idx[start : start + counts[f]].tolist())
            start += counts[f]
        totals += counts
    return [np.sort(np.array(f, dtype=int)) for f in folds]


def grouped_kfold(subject_ids, labels, k: int = 10, seed: int = 0):
    """Fold split that keeps all rows of a subject in the same fold,
    stratified by the subject's label."""
    subject_ids = np.asarray(subject_ids)
    labels = np.asarray(labels)
    subjects, first_rows = np.unique(subject_ids, return_index=True)
    if k > subjects.shape[0]:
        raise KTooLarge(f"k={k} folds but only {subjects.shape[0]} subjects")
    subject_folds = kfold_split(
        subjects.shape[0], k=k, seed=seed, stratify_labels=labels[first_rows]
    )
    out = []
    for fold in subject_folds:
        members = set(subjects[fold].tolist())
        out.append(np.flatnonzero(np.isin(subject_ids, list(members))))
    return out


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float


def roc_curve(y_true, scores) -> RocCurve:
    """Threshold sweep over distinct scores (ties grouped); AUC by
    trapezoid, which credits ties with half weight."""
    y_true = np.asarray(y_true).astype(int)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassTruth("ROC needs both classes in y_true")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_true = y_true[order]
    # last index of each tied group
    boundary = np.r_[np.flatnonzero(np.diff(sorted_scores)), sorted_scores.shape[0] - 1]
    ctp = np.cumsum(sorted_true)[boundary]
    cfp = (boundary + 1) - ctp
    tpr = np.r_[0.0, ctp / n_pos]
    fpr = np.r_[0.0, cfp / n_neg]
    thresholds = np.r_[np.inf, sorted_scores[boundary]]
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc)


@dataclass(frozen=True)
class PrCurve:
    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray


def pr_curve(y_true, scores) -> PrCurve:
    """Precision/recall at every distinct score threshold (predict
    positive when score >= threshold), ordered by increasing recall."""
    y_true = np.asarray(y_true).astype(int)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(np.sum(y_true == 1))
    if n_pos == 0 or n_pos == y_true.shape[0]:
        raise SingleClassTruth("PR curve needs both classes in y_true")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_true = y_true[order]
    boundary = np.r_[np.flatnonzero(np.diff(sorted_scores)), sorted_scores.shape[0] - 1]
    tp = np.cumsum(sorted_true)[boundary]
    predicted = boundary + 1.0
    return PrCurve(
        recall=tp / n_pos,
        precision=tp / predicted,
        thresholds=sorted_scores[boundary],
    )


@dataclass
class ImportanceReport:
    columns: dict[str, float]
    bands: dict[str, float]
    feature_types: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "columns": self.columns,
            "bands": self.bands,
            "feature_types": self.feature_types,
        }


def _importance_report(values: np.ndarray, column_names) -> ImportanceReport:
    columns = {name: float(v) for name, v in zip(column_names, values)}
    bands: dict[str, float] = {}
    feature_types: dict[str, float] = {}
    for name, v in columns.items():
        band, _, feat = name.partition("_")
        bands[band] = bands.get(band, 0.0) + v
        feature_types[feat] = feature_types.get(feat, 0.0) + v
    return ImportanceReport(columns=columns, bands=bands, feature_types=feature_types)


def feature_importance(model, column_names=None) -> ImportanceReport:
    """Impurity-decrease importance per column, summed into per-band and
    per-feature-type scores (each normalized family sums to 1)."""
    if not isinstance(model, ForestModel):
        raise UnsupportedModel(
            f"importances are defined for forests, not {type(model).__name__}"
        )
    names = column_names or model.columns
    if names is None:
        names = tuple(f"f{i}" for i in range(model.n_features))
    if len(names) != model.n_features:
        raise ConfigError(f"{len(names)} names for {model.n_features} features")
    return _importance_report(model.feature_importances(), names)


@dataclass
class CVReport:
    kind: str
    params: dict
    k: int
    seed: int
    fold_confusions: list[ConfusionMatrix]
    fold_metrics: list[MetricSet]
    fold_test_indices: list[np.ndarray]
    aggregate: dict[str, float]
    pooled: dict[str, float]
    roc: RocCurve
    pr: PrCurve
    scores: np.ndarray  # pooled out-of-fold scores, row-aligned
    predictions: np.ndarray
    y: np.ndarray
    importance: ImportanceReport | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "k": self.k,
            "seed": self.seed,
            "folds": [
                {
                    "fold": i,
                    "test_indices": idx.tolist(),
                    "confusion": cm.to_dict(),
                    "metrics": ms.to_dict(),
                }
                for i, (idx, cm, ms) in enumerate(
                    zip(self.fold_test_indices, self.fold_confusions, self.fold_metrics)
                )
            ],
            "aggregate": self.aggregate,
            "pooled": self.pooled,
            "roc": {
                "fpr": self.roc.fpr.tolist(),
                "tpr": self.roc.tpr.tolist(),
                "auc": self.roc.auc,
            },
            "pr": {
                "recall": self.pr.recall.tolist(),
                "precision": self.pr.precision.tolist(),
            },
            "scores": self.scores.tolist(),
            "predictions": self.predictions.tolist(),
            "y": self.y.tolist(),
            "importance": self.importance.to_dict() if self.importance else None,
            "warnings": self.warnings,
        }


def _fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(fold,)).generate_state(1)[0])


def cross_validate(
    kind: str,
    X,
    y,
    params=None,
    k: int = 10,
    seed: int = 0,
    columns=None,
    groups=None,
    tuner=None,
) -> CVReport:
    """Stratified k-fold evaluation of one classifier.

    Aggregate metrics are the mean of per-fold metrics; a pooled-confusion
    variant is also reported. ROC/PR are built from the pooled
    out-of-fold scores. `tuner`, when given, is called per fold on the
    training rows and must return a parameter object (leak-free search).
    `groups` switches to subject-grouped folds.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(int)
    if np.unique(y).shape[0] < 2:
        raise SingleClassTruth("cross-validation needs both classes present")
    if params is None:
        params = default_params(kind)

    if groups is not None:
        folds = grouped_kfold(groups, y, k=k, seed=seed)
    else:
        folds = kfold_split(X.shape[0], k=k, seed=seed, stratify_labels=y)

    n = X.shape[0]
    all_rows = np.arange(n)
    pooled_scores = np.zeros(n)
    pooled_preds = np.zeros(n, dtype=int)
    fold_cms, fold_ms, warns = [], [], []
    importance_sum = np.zeros(X.shape[1]) if kind in ("rf", "et") else None
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_rows, test_idx)
        if np.unique(y[train_idx]).shape[0] < 2:
            warns.append(f"fold {f}: training rows are single-class")
        fold_params = tuner(X[train_idx], y[train_idx]) if tuner else params
        model = fit_classifier(
            kind, X[train_idx], y[train_idx], fold_params,
            seed=_fold_seed(seed, f), columns=columns,
        )
        labels, scores = predict(model, X[test_idx])
        pooled_scores[test_idx] = scores
        pooled_preds[test_idx] = labels
        fold_cms.append(ConfusionMatrix.from_predictions(y[test_idx], labels))
        fold_ms.append(metrics(fold_cms[-1]))
        if importance_sum is not None:
            importance_sum += model.feature_importances()
        if kind == "knn" and model.k_clamped:
            warns.append(
                f"fold {f}: k={model.params.n_neighbors} clamped to {model.effective_k}"
            )
        if kind == "svm" and not model.converged:
            warns.append(f"fold {f}: svm stopped at sweep cap (gap {model.gap:.3g})")

    roc = roc_curve(y, pooled_scores)
    pr = pr_curve(y, pooled_scores)
    aggregate = {
        "accuracy": float(np.mean([m.accuracy for m in fold_ms])),
        "precision": float(np.mean([m.precision for m in fold_ms])),
        "recall": float(np.mean([m.recall for m in fold_ms])),
        "f1": float(np.mean([m.f1 for m in fold_ms])),
        "roc_auc": roc.auc,
    }
    pooled_cm = sum(fold_cms[1:], fold_cms[0])
    pooled_m = metrics(pooled_cm)
    pooled = {
        "accuracy": pooled_m.accuracy,
        "precision": pooled_m.precision,
        "recall": pooled_m.recall,
        "f1": pooled_m.f1,
        "confusion": pooled_cm.to_dict(),
    }

    importance = None
    if importance_sum is not None:
        s = importance_sum.sum()
        vals = importance_sum / s if s > 0 else importance_sum
        names = columns or tuple(f"f{i}" for i in range(X.shape[1]))
        importance = _importance_report(vals, names)

    from dataclasses import asdict

    return CVReport(
        kind=kind,
        params=asdict(params),
        k=k,
        seed=seed,
        fold_confusions=fold_cms,
        fold_metrics=fold_ms,
        fold_test_indices=[np.asarray(f) for f in folds],
        aggregate=aggregate,
        pooled=pooled,
        roc=roc,
        pr=pr,
        scores=pooled_scores,
        predictions=pooled_preds,
        y=y,
        importance=importance,
        warnings=warns,
    )


@dataclass
class CorrelationMatrix:
    labels: tuple[str, ...]
    matrix: np.ndarray
    zero_variance: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": self.matrix.tolist(),
            "zero_variance": list(self.zero_variance),
        }


def correlation_matrix(fm) -> CorrelationMatrix:
    """Pearson correlations between per-band aggregate features and the
    diagnosis label.

    Each band's aggregate is the mean of its z-scored columns (raw means
    would be dominated by the largest-scale feature); zero-variance
    series correlate as 0 and are flagged.
    """
    if fm.n_rows < 2:
        raise ConfigError("need at least two rows for correlations")
    bands: dict[str, list[int]] = {}
    for i, name in enumerate(fm.columns):
        band = name.partition("_")[0]
        bands.setdefault(band, []).append(i)

    series = []
    labels = []
    for band, cols in bands.items():
        block = fm.X[:, cols]
        mu = block.mean(axis=0)
        sd = block.std(axis=0)
        safe = np.where(sd > 0, sd, 1.0)
        series.append(((block - mu) / safe).mean(axis=1))
        labels.append(band)
    series.append(fm.y.astype(np.float64))
    labels.append("diagnosis")

    k = len(series)
    mat = np.eye(k)
    flagged = []
    sds = [float(np.std(s)) for s in series]
    for i in range(k):
        if sds[i] == 0.0:
            flagged.append(labels[i])
    for i in range(k):
        for j in range(i + 1, k):
            if sds[i] == 0.0 or sds[j] == 0.0:
                r = 0.0
            else:
                a = series[i] - series[i].mean()
                b = series[j] - series[j].mean()
                r = float(np.dot(a, b) / (np.sqrt(np.dot(a, a)) * np.sqrt(np.dot(b, b))))
            mat[i, j] = mat[j, i] = r
    return CorrelationMatrix(
        labels=tuple(labels), matrix=mat, zero_variance=tuple(flagged)
    )


@dataclass
class OlsReport:
    p_values: dict[str, float]
    census: dict[str, int]
    r_squared: float | None
    log_likelihood: float | None
    rank_deficient: bool
    zero_variance: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "p_values": self.p_values,
            "census": self.census,
            "r_squared": self.r_squared,
            "log_likelihood": self.log_likelihood,
            "rank_deficient": self.rank_deficient,
            "zero_variance": list(self.zero_variance),
        }


def ols_stats(X, y, columns=None) -> OlsReport:
    """Univariate OLS slope t-test p-value per feature (linear probability
    model on the 0/1 label), plus a full-model R^2 and Gaussian
    log-likelihood when the design has full rank and more rows than
    columns. The census buckets are exclusive and partition the features.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if n <= 2:
        raise ConfigError("need more than two rows for univariate OLS")
    names = tuple(columns) if columns else tuple(f"f{i}" for i in range(d))

    p_values = {}
    flagged = []
    y_center = y - y.mean()
    for j in range(d):
        x = X[:, j]
        xc = x - x.mean()
        sxx = float(np.dot(xc, xc))
        if sxx == 0.0:
            p_values[names[j]] = 1.0
            flagged.append(names[j])
            continue
        beta = float(np.dot(xc, y_center)) / sxx
        resid = y_center - beta * xc
        dof = n - 2
        s2 = float(np.dot(resid, resid)) / dof
        if s2 <= 0.0:
            p_values[names[j]] = 0.0 if beta != 0.0 else 1.0
            continue
        t = beta / np.sqrt(s2 / sxx)
        p_values[names[j]] = float(2.0 * _scipy_stats.t.sf(abs(t), dof))

    census = {"p<0.001": 0, "p<0.01": 0, "p<0.05": 0, "p>=0.05": 0}
    for p in p_values.values():
        if p < 0.001:
            census["p<0.001"] += 1
        elif p < 0.01:
            census["p<0.01"] += 1
        elif p < 0.05:
            census["p<0.05"] += 1
        else:
            census["p>=0.05"] += 1

    r_squared = None
    log_likelihood = None
    rank_deficient = False
    if n > d:
        design = np.hstack([np.ones((n, 1)), X])
        if np.linalg.matrix_rank(design) < design.shape[1]:
            rank_deficient = True
        else:
            coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
            resid = y - design @ coef
            ss_res = float(np.dot(resid, resid))
            ss_tot = float(np.dot(y_center, y_center))
            r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
            sigma2 = max(ss_res / n, 1e-300)
            log_likelihood = float(-0.5 * n * (np.log(2 * np.pi * sigma2) + 1.0))
    else:
        rank_deficient = True

    return OlsReport(
        p_values=p_values,
        census=census,
        r_squared=r_squared,
        log_likelihood=log_likelihood,
        rank_deficient=rank_deficient,
        zero_variance=tuple(flagged),
    )
