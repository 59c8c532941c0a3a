"""Split conformal calibration, prediction sets, CF-CP and the post-hoc union.

Classification sets are boolean masks of shape ``(n, K)``; regression sets
are lists of :class:`~cfcp.sets.IntervalSet`, one per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidParameterError, UnsupportedOperationError
from .scores import ScoreKind, aggregate, calibration_score, score_matrix, symmetrize
from .sets import IntervalSet

__all__ = [
    "Calibration",
    "calibrate",
    "quantile_rank",
    "sublevel_set",
    "predict_set_classification",
    "predict_set_regression",
    "slot_predictions",
    "split_cp",
    "cf_cp",
    "posthoc_union",
]


@dataclass(frozen=True)
class Calibration:
    q_hat: float
    alpha: float
    n_cal: int
    kind: ScoreKind | None = None
    agg: str | None = None

    @property
    def informative(self) -> bool:
        return math.isfinite(self.q_hat)


def quantile_rank(n_cal: int, alpha: float) -> int:
    """``ceil((n_cal + 1)(1 - alpha))``, guarded against float noise."""
    x = (n_cal + 1) * (1.0 - alpha)
    k = math.ceil(x)
    if k - x > 1 - 1e-9:  # x is an integer up to rounding
        k -= 1
    return k


def calibrate(scores, alpha: float, kind: ScoreKind | None = None, agg: str | None = None) -> Calibration:
    """Conformal threshold: the k-th smallest score with
    ``k = ceil((n+1)(1-alpha))``, or ``+inf`` when ``k > n``."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.size == 0:
        raise InvalidParameterError("calibration needs at least one score")
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    n = scores.size
    k = quantile_rank(n, alpha)
    q = math.inf if k > n else float(np.partition(scores, k - 1)[k - 1])
    return Calibration(q_hat=q, alpha=alpha, n_cal=n, kind=kind, agg=agg)


def sublevel_set(centers, q: float, agg: str | None = None) -> IntervalSet:
    """``{y : Agg_i |c_i - y| <= q}`` in closed form."""
    c = np.asarray(centers, dtype=np.float64).ravel()
    if math.isinf(q):
        return IntervalSet([(-math.inf, math.inf)])
    if q < 0:
        return IntervalSet()
    if c.size == 1 or agg is None:
        if c.size != 1:
            raise InvalidParameterError("several centers need an aggregator")
        return IntervalSet.single(c[0] - q, c[0] + q)
    if agg == "max":
        return IntervalSet.single(c.max() - q, c.min() + q)
    if agg == "min":
        return IntervalSet((ci - q, ci + q) for ci in c)
    if agg != "mean":
        raise InvalidParameterError(f"unknown aggregator {agg!r}")
    u, w = np.unique(c, return_counts=True)
    w = w / c.size
    # g(y) = sum_j w_j |u_j - y| is convex and piecewise linear with slope -1
    # left of u[0] and +1 right of u[-1]; its minimum sits on a breakpoint.
    g = np.abs(u[:, None] - u[None, :]) @ w
    j_min = int(np.argmin(g))
    if g[j_min] > q:
        return IntervalSet()
    j = int(np.argmax(g <= q))  # first breakpoint inside the set
    if j == 0:
        lo = u[0] - (q - g[0])
    else:
        lo = u[j - 1] + (g[j - 1] - q) / (g[j - 1] - g[j]) * (u[j] - u[j - 1])
    inside = np.nonzero(g <= q)[0]
    j = int(inside[-1])
    if j == u.size - 1:
        hi = u[-1] + (q - g[-1])
    else:
        hi = u[j] + (q - g[j]) / (g[j + 1] - g[j]) * (u[j + 1] - u[j])
    return IntervalSet.single(lo, hi)


def predict_set_classification(probs_per_intervention, cal: Calibration, kind: ScoreKind,
                               agg: str | None = None, factual_probs=None,
                               nonempty: bool = True, rescue: str = "if_empty") -> np.ndarray:
    """Label masks ``{y : score <= q_hat}``.

    With one probability matrix (or ``agg=None``) this is plain split CP.
    With several, the score of each label is aggregated across them first.

    When ``nonempty`` is set, the most probable label under ``factual_probs``
    (default: the first matrix) is added to rows that came out empty
    (``rescue='if_empty'``) or to every row whose set misses it
    (``rescue='argmax'``). The two rules coincide for plain LAC sets.
    """
    probs = [np.atleast_2d(p) for p in
             (probs_per_intervention if isinstance(probs_per_intervention, (list, tuple))
              else [probs_per_intervention])]
    if agg is None and len(probs) != 1:
        raise InvalidParameterError("several interventions need an aggregator")
    S = aggregate(agg or "mean", np.stack([score_matrix(kind, P) for P in probs]))
    mask = S <= cal.q_hat
    if nonempty:
        fp = probs[0] if factual_probs is None else np.atleast_2d(factual_probs)
        if rescue == "if_empty":
            empty = ~mask.any(axis=1)
        elif rescue == "argmax":
            empty = np.ones(mask.shape[0], dtype=bool)
        else:
            raise InvalidParameterError(f"unknown rescue rule {rescue!r}")
        if empty.any():
            rows = np.nonzero(empty)[0]
            mask[rows, np.argmax(fp[rows], axis=1)] = True
    return mask


def predict_set_regression(centers, cal: Calibration, agg: str | None = None) -> list:
    """Exact sublevel sets of the (aggregated) absolute-residual score.

    ``centers`` is a length-n vector (plain split CP) or an ``(n, m)``
    matrix / list of m vectors of per-intervention predictions.
    """
    if isinstance(centers, (list, tuple)):
        C = np.stack([np.asarray(c, dtype=np.float64).ravel() for c in centers], axis=1)
    else:
        C = np.asarray(centers, dtype=np.float64)
        if C.ndim == 1:
            C = C[:, None]
    q = cal.q_hat
    if C.shape[1] == 1:
        return [IntervalSet.single(c - q, c + q) if math.isfinite(q)
                else IntervalSet([(-math.inf, math.inf)]) for c in C[:, 0]]
    return [sublevel_set(row, q, agg) for row in C]


def slot_predictions(predictor, view) -> list:
    """Base-model outputs for each intervention slot of a viewpoint."""
    if view.slots is None:
        raise UnsupportedOperationError("counterfactual features are required")
    domain = predictor.features.domain
    return [predictor.predict(S, np.full(len(S), a)) for S, a in zip(view.slots, domain)]


def _sets_from(task, own, slots, cal, kind, agg, nonempty, rescue="if_empty"):
    if task == "regression":
        return predict_set_regression(own if slots is None else slots, cal, agg)
    return predict_set_classification(own if slots is None else slots, cal, kind, agg,
                                      factual_probs=own, nonempty=nonempty, rescue=rescue)


def split_cp(ds_cal: Dataset, ds_test: Dataset, predictor, kind: ScoreKind, alpha: float,
             nonempty: bool = True, view=None, rescue: str = "if_empty"):
    """Plain split CP. Returns ``(sets, calibration)`` for viewpoint ``view``."""
    vc = ds_cal.view(None)
    cal = calibrate(calibration_score(kind, predictor.predict(vc.X, vc.A), ds_cal.Y), alpha, kind)
    vt = ds_test.view(view)
    own = predictor.predict(vt.X, vt.A)
    return _sets_from(ds_test.task, own, None, cal, kind, None, nonempty, rescue), cal


def cf_cp(ds_cal: Dataset, ds_test: Dataset, predictor, kind: ScoreKind, agg: str,
          alpha: float, nonempty: bool = True, view=None, rescue: str = "if_empty"):
    """Split CP on the intervention-symmetrized score.

    Calibration scores aggregate the base score over every counterfactual
    slot of each calibration row; test sets threshold the same aggregate.
    Returns ``(sets, calibration)``.
    """
    if not ds_cal.has_cf or not ds_test.has_cf:
        raise UnsupportedOperationError("CF-CP needs counterfactual features on both splits")
    vc = ds_cal.view(None)
    cal = calibrate(symmetrize(kind, agg, slot_predictions(predictor, vc), ds_cal.Y,
                               inclusive=kind.inclusive_calibration), alpha, kind, agg)
    vt = ds_test.view(view)
    own = predictor.predict(vt.X, vt.A)
    slots = slot_predictions(predictor, vt)
    return _sets_from(ds_test.task, own, slots, cal, kind, agg, nonempty, rescue), cal


def union_sets(task, slot_preds, cal, kind, nonempty=True, rescue="if_empty"):
    """Union over interventions of per-intervention split-CP sets."""
    per = [_sets_from(task, p, None, cal, kind, None, nonempty, rescue) for p in slot_preds]
    if task == "classification":
        return np.logical_or.reduce(per)
    out = per[0]
    for sets in per[1:]:
        out = [a | b for a, b in zip(out, sets)]
    return out


def posthoc_union(ds_cal: Dataset, ds_test: Dataset, predictor, kind: ScoreKind, alpha: float,
                  nonempty: bool = True, view=None, rescue: str = "if_empty"):
    """Split-CP calibration on factual scores, then the union of the sets
    built at every intervention. Returns ``(sets, calibration)``."""
    if not ds_test.has_cf:
        raise UnsupportedOperationError("post-hoc union needs counterfactual features")
    vc = ds_cal.view(None)
    cal = calibrate(calibration_score(kind, predictor.predict(vc.X, vc.A), ds_cal.Y), alpha, kind)
    slots = slot_predictions(predictor, ds_test.view(view))
    return union_sets(ds_test.task, slots, cal, kind, nonempty, rescue), cal
