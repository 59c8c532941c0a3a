"""Base predictors: least squares and L2-regularized multinomial logistic
regression over features augmented with the protected attribute.

Augmented layout is always ``[X columns..., attribute column(s), 1]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InvalidParameterError

__all__ = [
    "LinearModel",
    "LogisticModel",
    "FeatureMap",
    "Predictor",
    "augment",
    "fit_ols",
    "fit_logistic",
    "logistic_loss_grad",
    "predict_reg",
    "predict_proba",
    "softmax",
]


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    Z = Z - Z.max(axis=-1, keepdims=True)
    P = np.exp(Z)
    return P / P.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    rank_deficient: bool = False

    def predict(self, X_aug: np.ndarray) -> np.ndarray:
        X_aug = np.atleast_2d(X_aug)
        if X_aug.shape[1] != self.weights.shape[0]:
            raise InvalidParameterError(
                f"expected {self.weights.shape[0]} columns, got {X_aug.shape[1]}")
        return X_aug @ self.weights


@dataclass(frozen=True)
class LogisticModel:
    W: np.ndarray  # (K, p), last column is the intercept
    n_iter: int = 0
    grad_norm: float = 0.0

    @property
    def K(self) -> int:
        return self.W.shape[0]

    def predict_proba(self, X_aug: np.ndarray) -> np.ndarray:
        X_aug = np.atleast_2d(X_aug)
        if X_aug.shape[1] != self.W.shape[1]:
            raise InvalidParameterError(f"expected {self.W.shape[1]} columns, got {X_aug.shape[1]}")
        return softmax(X_aug @ self.W.T)


def predict_reg(m: LinearModel, x_aug) -> float:
    return float(m.predict(np.asarray(x_aug, dtype=np.float64).reshape(1, -1))[0])


def predict_proba(m: LogisticModel, x_aug) -> np.ndarray:
    return m.predict_proba(np.asarray(x_aug, dtype=np.float64).reshape(1, -1))[0]


def fit_ols(X_aug: np.ndarray, y: np.ndarray) -> LinearModel:
    """Least squares via SVD; rank-deficient designs get the minimum-norm
    solution and a ``RuntimeWarning``."""
    X_aug = np.asarray(X_aug, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X_aug.shape[0] != y.shape[0]:
        raise InvalidParameterError("X_aug and y disagree on the number of rows")
    w, _, rank, _ = np.linalg.lstsq(X_aug, y, rcond=None)
    deficient = rank < X_aug.shape[1]
    if deficient:
        warnings.warn(f"design matrix has rank {rank} < {X_aug.shape[1]}", RuntimeWarning)
    return LinearModel(weights=w, rank_deficient=bool(deficient))


def logistic_loss_grad(W: np.ndarray, X_aug: np.ndarray, y: np.ndarray, l2: float):
    """Summed multinomial cross-entropy plus ``l2/2 * ||W[:, :-1]||^2``.

    Returns ``(loss, grad, probs)``; the intercept column is not penalized.
    """
    n = X_aug.shape[0]
    Z = X_aug @ W.T
    Zmax = Z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(Z - Zmax).sum(axis=1, keepdims=True)) + Zmax
    P = np.exp(Z - logsum)
    Wp = W.copy()
    Wp[:, -1] = 0.0
    loss = float(logsum.sum() - Z[np.arange(n), y].sum() + 0.5 * l2 * np.sum(Wp**2))
    R = P.copy()
    R[np.arange(n), y] -= 1.0
    grad = R.T @ X_aug + l2 * Wp
    return loss, grad, P


def _hessian(P: np.ndarray, X_aug: np.ndarray, l2: float) -> np.ndarray:
    n, K = P.shape
    p = X_aug.shape[1]
    PX = (P[:, :, None] * X_aug[:, None, :]).reshape(n, K * p)
    H = -(PX.T @ PX)
    for k in range(K):
        blk = slice(k * p, (k + 1) * p)
        H[blk, blk] += X_aug.T @ (P[:, k:k + 1] * X_aug)
    reg = np.full(p, l2)
    reg[-1] = 0.0
    H[np.diag_indices_from(H)] += np.tile(reg, K)
    return H


def fit_logistic(X_aug: np.ndarray, y: np.ndarray, K: int, l2: float = 1.0,
                 max_iter: int = 1000, tol: float = 1e-6) -> LogisticModel:
    """Damped Newton iterations with Armijo backtracking.

    Stops once the gradient's infinity norm is at most ``tol`` or after
    ``max_iter`` iterations.
    """
    X_aug = np.asarray(X_aug, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, p = X_aug.shape
    if n < 1:
        raise InvalidParameterError("need at least one sample")
    if l2 < 0:
        raise InvalidParameterError(f"l2 must be non-negative, got {l2}")
    if y.min() < 0 or y.max() >= K:
        raise InvalidParameterError(f"labels must lie in 0..{K - 1}")
    W = np.zeros((K, p))
    loss, grad, P = logistic_loss_grad(W, X_aug, y, l2)
    it = 0
    damping = 1e-10
    while it < max_iter and np.max(np.abs(grad)) > tol:
        H = _hessian(P, X_aug, l2)
        g = grad.ravel()
        H[np.diag_indices_from(H)] += damping * (1.0 + np.abs(np.diag(H)))
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        if not g @ step > 0:
            step = g  # fall back to steepest descent
        step = step.reshape(K, p)
        slope = float(np.sum(grad * step))
        t = 1.0
        while True:
            W_new = W - t * step
            loss_new, grad_new, P_new = logistic_loss_grad(W_new, X_aug, y, l2)
            if np.isfinite(loss_new) and loss_new <= loss - 1e-4 * t * slope:
                break
            t *= 0.5
            if t < 1e-14:
                break
        if not np.isfinite(loss_new):
            raise DivergenceError(f"non-finite loss at iteration {it}")
        if t < 1e-14:
            break  # stalled at floating-point resolution
        W, loss, grad, P = W_new, loss_new, grad_new, P_new
        it += 1
    return LogisticModel(W=W, n_iter=it, grad_norm=float(np.max(np.abs(grad))))


def augment(X: np.ndarray, A=None, domain=None, encoding: str = "auto") -> np.ndarray:
    """Build ``[X, attribute column(s), 1]``.

    ``encoding='numeric'`` appends ``A`` as one column, ``'onehot'`` appends
    indicators for every domain value except the first, and ``'auto'`` picks
    numeric for binary domains and one-hot otherwise (so a single-valued
    domain adds no column). ``A=None`` drops the attribute entirely.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    cols = [X]
    if A is not None:
        A = np.asarray(A)
        if domain is None:
            domain = tuple(np.unique(A).tolist())
        if encoding == "auto":
            encoding = "numeric" if len(domain) == 2 else "onehot"
        if encoding == "numeric":
            cols.append(A.astype(np.float64)[:, None])
        elif encoding == "onehot":
            cols.append(np.stack([(A == a).astype(np.float64) for a in domain[1:]], axis=1)
                        if len(domain) > 1 else np.zeros((len(A), 0)))
        else:
            raise InvalidParameterError(f"unknown encoding {encoding!r}")
    cols.append(np.ones((X.shape[0], 1)))
    return np.hstack(cols)


@dataclass(frozen=True)
class FeatureMap:
    """How raw inputs become the augmented design matrix."""

    use_attr: bool = True
    domain: tuple | None = None
    encoding: str = "auto"

    def __call__(self, X, A=None):
        return augment(X, A if self.use_attr else None, self.domain, self.encoding)


@dataclass(frozen=True)
class Predictor:
    """A fitted model bundled with its feature map.

    ``predict`` returns real predictions for a :class:`LinearModel` and
    class-probability rows for a :class:`LogisticModel`.
    """

    model: LinearModel | LogisticModel
    features: FeatureMap

    @property
    def task(self) -> str:
        return "regression" if isinstance(self.model, LinearModel) else "classification"

    def predict(self, X, A=None) -> np.ndarray:
        Z = self.features(X, A)
        if isinstance(self.model, LinearModel):
            return self.model.predict(Z)
        return self.model.predict_proba(Z)

    @classmethod
    def fit(cls, X, A, y, task: str, features: FeatureMap, K: int | None = None,
            l2: float = 1.0, max_iter: int = 1000, tol: float = 1e-6) -> "Predictor":
        Z = features(X, A)
        if task == "regression":
            return cls(fit_ols(Z, y), features)
        return cls(fit_logistic(Z, y, K, l2=l2, max_iter=max_iter, tol=tol), features)
