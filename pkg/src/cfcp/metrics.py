"""Evaluation metrics for point predictors and prediction sets."""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError
from .sets import jaccard_distance, jaccard_distance_masks

__all__ = ["coverage", "avg_size", "csd", "total_effect", "mse", "accuracy"]


def _check_len(a, b):
    if len(a) != len(b):
        raise InvalidParameterError(f"length mismatch: {len(a)} vs {len(b)}")


def coverage(sets, y) -> float:
    """Fraction of rows whose label falls in its set (closed bounds)."""
    _check_len(sets, y)
    if isinstance(sets, np.ndarray):
        return float(sets[np.arange(len(y)), np.asarray(y, dtype=np.int64)].mean())
    return float(np.mean([yi in s for s, yi in zip(sets, y)]))


def avg_size(sets) -> float:
    """Mean cardinality (label masks) or mean total length (interval sets)."""
    if len(sets) == 0:
        raise InvalidParameterError("no sets to average")
    if isinstance(sets, np.ndarray):
        return float(sets.sum(axis=1).mean())
    return float(np.mean([s.measure for s in sets]))


def _jaccard_rows(a, b) -> np.ndarray:
    if isinstance(a, np.ndarray):
        return jaccard_distance_masks(a, b)
    return np.array([jaccard_distance(x, y) for x, y in zip(a, b)])


def csd(factual_sets, view_sets: dict, A) -> float:
    """Counterfactual set disparity.

    ``view_sets[v]`` holds the sets built from viewpoint ``v`` for every row.
    A row's disparity is the mean Jaccard distance between its factual set
    and its sets under every other attribute value; the result is the mean
    over rows.
    """
    A = np.asarray(A)
    n = len(A)
    _check_len(factual_sets, A)
    total = np.zeros(n)
    count = np.zeros(n)
    for v, sets in view_sets.items():
        other = A != v
        if not other.any():
            continue
        idx = np.nonzero(other)[0]
        if isinstance(sets, np.ndarray):
            dist = jaccard_distance_masks(factual_sets[idx], sets[idx])
        else:
            dist = np.array([jaccard_distance(factual_sets[i], sets[i]) for i in idx])
        total[idx] += dist
        count[idx] += 1
    has = count > 0
    if not has.any():
        return 0.0
    return float(np.mean(total[has] / count[has]))


def total_effect(factual_pred, view_preds: dict, A, task: str = "regression",
                 mode: str = "tv") -> float:
    """Mean change of a predictor's output under counterfactual attribute flips.

    Regression uses the absolute difference. Classification uses the total
    variation distance between probability rows (``mode='tv'``) or the rate
    at which the argmax label changes (``mode='flip'``).
    """
    A = np.asarray(A)
    factual_pred = np.asarray(factual_pred)
    total = np.zeros(len(A))
    count = np.zeros(len(A))
    for v, pred in view_preds.items():
        idx = np.nonzero(A != v)[0]
        if idx.size == 0:
            continue
        f, c = factual_pred[idx], np.asarray(pred)[idx]
        if task == "regression":
            diff = np.abs(c - f)
        elif mode == "tv":
            diff = 0.5 * np.abs(c - f).sum(axis=1)
        elif mode == "flip":
            diff = (np.argmax(c, axis=1) != np.argmax(f, axis=1)).astype(float)
        else:
            raise InvalidParameterError(f"unknown total-effect mode {mode!r}")
        total[idx] += diff
        count[idx] += 1
    has = count > 0
    if not has.any():
        return 0.0
    return float(np.mean(total[has] / count[has]))


def mse(pred, y) -> float:
    _check_len(pred, y)
    return float(np.mean((np.asarray(pred, dtype=np.float64) - np.asarray(y)) ** 2))


def accuracy(pred, y) -> float:
    """``pred`` may be labels or probability rows (argmax, lowest index on ties)."""
    _check_len(pred, y)
    pred = np.asarray(pred)
    labels = np.argmax(pred, axis=1) if pred.ndim == 2 else pred
    return float(np.mean(labels == np.asarray(y)))
