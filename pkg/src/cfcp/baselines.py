"""Counterfactually fair point predictors used as baselines.

Each one only changes what the model is fed; prediction sets come from the
ordinary split-CP routines in :mod:`cfcp.conformal`.

* CFU: fit on the exogenous variables ``U`` only.
* CFR: fit on the mean of the counterfactual features (attribute dropped).
* PCF: average the base model's counterfactual predictions, weighted by
  the attribute distribution.
"""

from __future__ import annotations

import numpy as np

from .dataset import View
from .errors import InvalidParameterError, UnsupportedOperationError

__all__ = ["cfu_features", "cfr_features", "pcf_predict", "estimate_pa"]


def cfu_features(view: View) -> np.ndarray:
    if view.U is None:
        raise UnsupportedOperationError("CFU needs the exogenous variables U")
    return view.U


def cfr_features(view: View) -> np.ndarray:
    if view.slots is None:
        raise UnsupportedOperationError("CFR needs counterfactual features")
    total = view.slots[0].copy()
    for s in view.slots[1:]:
        total = total + s
    return total / len(view.slots)


def pcf_predict(cf_predictions, p_a) -> np.ndarray:
    """``sum_a P(A=a) f(x_{A<-a}, a)`` over predictions in canonical order.

    Works for real predictions and for probability rows alike.
    """
    p_a = np.asarray(p_a, dtype=np.float64)
    if len(cf_predictions) != p_a.size:
        raise InvalidParameterError(
            f"{len(cf_predictions)} predictions for {p_a.size} attribute values")
    if np.any(p_a < 0) or abs(p_a.sum() - 1.0) > 1e-9:
        raise InvalidParameterError(f"p_a must be a probability vector, got {p_a}")
    out = p_a[0] * np.asarray(cf_predictions[0], dtype=np.float64)
    for w, pred in zip(p_a[1:], cf_predictions[1:]):
        out = out + w * np.asarray(pred, dtype=np.float64)
    return out


def estimate_pa(A, domain=None) -> np.ndarray:
    """Empirical attribute frequencies over the (sorted) domain."""
    A = np.asarray(A)
    if A.size == 0:
        raise InvalidParameterError("cannot estimate P(A) from no samples")
    domain = tuple(sorted(domain)) if domain is not None else tuple(np.unique(A).tolist())
    counts = np.array([np.sum(A == a) for a in domain], dtype=np.float64)
    return counts / A.size
