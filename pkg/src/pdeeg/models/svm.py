"""Soft-margin linear SVM trained by dual coordinate descent (L1 hinge
loss), with the bias handled as an augmented constant feature.

No active-set shrinking is used: every pass sweeps all dual variables in
a fixed order, so fits are deterministic without a seed. Convergence is
declared when the largest projected gradient falls below the tolerance.
Hitting the sweep cap first raises NoConvergence in strict mode;
otherwise (the default, matching common solver behavior on badly scaled
data) the current iterate is returned with the final gap recorded and a
warning issued.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ConfigError, NoConvergence, SingleClass
from .trees import _check_matrix, _check_training


@dataclass(frozen=True)
class SvmParams:
    c: float = 1.0
    kernel: str = "linear"
    shrinking: bool = False
    tol: float = 0.1
    max_sweeps: int = 10_000
    strict_convergence: bool = False

    def __post_init__(self):
        if self.c <= 0:
            raise ConfigError(f"C must be positive, got {self.c}")
        if self.kernel != "linear":
            raise ConfigError(f"only the linear kernel is implemented, got {self.kernel!r}")
        if self.shrinking:
            raise ConfigError("the shrinking heuristic is intentionally not implemented")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be >= 1")


@njit(cache=True)
def _dual_cd(Xa, y_signed, c, tol, max_sweeps):
    n, d = Xa.shape
    alpha = np.zeros(n)
    w = np.zeros(d)
    q_diag = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += Xa[i, j] * Xa[i, j]
        q_diag[i] = s

    gap = np.inf
    for sweep in range(max_sweeps):
        max_pg = 0.0
        for i in range(n):
            g = 0.0
            for j in range(d):
                g += w[j] * Xa[i, j]
            g = y_signed[i] * g - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= c:
                pg = max(g, 0.0)
            else:
                pg = g
            if abs(pg) > max_pg:
                max_pg = abs(pg)
            if abs(pg) > 1e-14 and q_diag[i] > 0.0:
                a_new = a - g / q_diag[i]
                if a_new < 0.0:
                    a_new = 0.0
                elif a_new > c:
                    a_new = c
                delta = (a_new - a) * y_signed[i]
                if delta != 0.0:
                    alpha[i] = a_new
                    for j in range(d):
                        w[j] += delta * Xa[i, j]
        gap = max_pg
        if max_pg < tol:
            return w, alpha, gap, sweep + 1, True
    return w, alpha, gap, max_sweeps, False


@dataclass
class SvmModel:
    params: SvmParams
    w: np.ndarray
    b: float
    n_features: int
    gap: float
    sweeps: int
    converged: bool = True
    columns: tuple[str, ...] | None = None
    kind: str = "svm"
    threshold: float = 0.0

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Signed distance-proportional decision values."""
        X = _check_matrix(X, self.n_features)
        return X @ self.w + self.b

    def labels_from_scores(self, scores: np.ndarray) -> np.ndarray:
        return (scores >= self.threshold).astype(np.int64)


def fit_linear_svm(X, y, params: SvmParams | None = None, columns=None) -> SvmModel:
    """Train on 0/1 labels; exposes (w, b) and the final optimality gap."""
    params = params or SvmParams()
    X, y = _check_training(X, y)
    if np.unique(y).shape[0] < 2:
        raise SingleClass("SVM training needs both classes present")
    if not np.isfinite(X).all():
        raise ConfigError("features must be finite")

    y_signed = np.where(y > 0, 1.0, -1.0)
    Xa = np.ascontiguousarray(np.hstack([X, np.ones((X.shape[0], 1))]))
    w_aug, _, gap, sweeps, converged = _dual_cd(
        Xa, y_signed, params.c, params.tol, params.max_sweeps
    )
    if not converged:
        message = (
            f"dual coordinate descent: gap {gap:.3g} > tol {params.tol} "
            f"after {sweeps} sweeps"
        )
        if params.strict_convergence:
            raise NoConvergence(message, gap=gap)
        warnings.warn(message)
    return SvmModel(
        params=params,
        w=w_aug[:-1].copy(),
        b=float(w_aug[-1]),
        n_features=X.shape[1],
        gap=float(gap),
        sweeps=int(sweeps),
        converged=bool(converged),
        columns=columns,
    )
