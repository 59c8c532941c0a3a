"""Conformity scores (smaller means the label conforms better) and their
symmetrization over attribute interventions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "ScoreKind",
    "AGGREGATORS",
    "aggregate",
    "score",
    "score_matrix",
    "calibration_score",
    "symmetrize",
    "rank_ties",
    "label_ranks",
]

AGGREGATORS = ("mean", "max", "min")
_KINDS = ("residual", "lac", "aps", "raps")


@dataclass(frozen=True)
class ScoreKind:
    """``residual`` for regression; ``lac``, ``aps`` or ``raps`` for classification.

    ``lam`` and ``k_reg`` only matter for ``raps``.

    ``greedy`` selects the usual deterministic set construction for the
    cumulative-mass scores (``aps``/``raps``): calibration uses the
    cumulative mass *including* the true label, while a test label is kept
    whenever the mass strictly ahead of it (plus any penalty) is within the
    threshold. That keeps the label which crosses the threshold, so sets are
    supersets of the plain ``score <= q_hat`` sets and overcover. With
    ``greedy=False`` both steps use the strict score.
    """

    name: str = "residual"
    lam: float = 0.5
    k_reg: int = 2
    greedy: bool = True

    def __post_init__(self):
        if self.name not in _KINDS:
            raise InvalidParameterError(f"unknown score {self.name!r}; expected one of {_KINDS}")
        if self.lam < 0 or self.k_reg < 0:
            raise InvalidParameterError("RAPS needs lam >= 0 and k_reg >= 0")

    @property
    def is_classification(self) -> bool:
        return self.name != "residual"

    @property
    def inclusive_calibration(self) -> bool:
        """True when calibration scores add the true label's own mass."""
        return self.greedy and self.name in ("aps", "raps")


def rank_ties(p) -> np.ndarray:
    """Labels sorted by descending probability; ties go to the lower index."""
    p = np.asarray(p, dtype=np.float64)
    return np.argsort(-p, kind="stable")


def label_ranks(P: np.ndarray) -> np.ndarray:
    """1-based rank of every label under :func:`rank_ties`, shape ``(n, K)``."""
    P = np.atleast_2d(P)
    K = P.shape[1]
    other = P[:, None, :]
    mine = P[:, :, None]
    lower_index = np.arange(K)[None, :] < np.arange(K)[:, None]  # [y, y'] -> y' < y
    ahead = (other > mine) | ((other == mine) & lower_index[None])
    return 1 + ahead.sum(axis=2)


def _aps_matrix(P: np.ndarray) -> np.ndarray:
    other = P[:, None, :]
    return np.where(other > P[:, :, None], other, 0.0).sum(axis=2)


def score_matrix(kind: ScoreKind, P: np.ndarray, inclusive: bool = False) -> np.ndarray:
    """Scores of every candidate label, shape ``(n, K)``, for probability rows ``P``.

    ``inclusive`` adds each label's own probability to the ``aps``/``raps``
    score (the calibration side of the greedy construction).
    """
    if not kind.is_classification:
        raise InvalidParameterError(f"{kind.name} is not a classification score")
    P = np.atleast_2d(np.asarray(P, dtype=np.float64))
    if kind.name == "lac":
        return 1.0 - P
    S = _aps_matrix(P)
    if inclusive:
        S = S + P
    if kind.name == "raps":
        S = S + kind.lam * np.maximum(label_ranks(P) - kind.k_reg, 0)
    return S


def score(kind: ScoreKind, pred, y, inclusive: bool = False) -> np.ndarray:
    """Score of label(s) ``y`` against prediction(s) ``pred``.

    ``pred`` is a real vector for ``residual`` and a ``(n, K)`` probability
    matrix otherwise. Scalar inputs give a 0-d result. ``inclusive`` is
    forwarded to :func:`score_matrix`.
    """
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y)
    if kind.name == "residual":
        if pred.ndim > 1 and pred.shape[-1] != 1:
            raise InvalidParameterError("residual score needs real-valued predictions")
        return np.abs(pred.reshape(y.shape) - y)
    if pred.ndim == 1:
        if y.ndim == 0:
            return score(kind, pred[None, :], y[None], inclusive)[0]
        raise InvalidParameterError(f"{kind.name} needs a (n, K) probability matrix")
    y = y.astype(np.int64)
    if y.min() < 0 or y.max() >= pred.shape[1]:
        raise InvalidParameterError(f"label out of range 0..{pred.shape[1] - 1}")
    return score_matrix(kind, pred, inclusive)[np.arange(len(y)), y]


def aggregate(agg: str, stacked: np.ndarray) -> np.ndarray:
    """Reduce over axis 0 (the intervention axis)."""
    stacked = np.asarray(stacked)
    if agg == "mean":
        total = stacked[0].copy()
        for s in stacked[1:]:
            total = total + s
        return total / stacked.shape[0]
    if agg == "max":
        return stacked.max(axis=0)
    if agg == "min":
        return stacked.min(axis=0)
    raise InvalidParameterError(f"unknown aggregator {agg!r}; expected one of {AGGREGATORS}")


def _canonical(preds, domain=None) -> list:
    if isinstance(preds, dict):
        keys = sorted(preds)
        if domain is not None and tuple(keys) != tuple(sorted(domain)):
            missing = sorted(set(domain) - set(keys))
            raise InvalidParameterError(f"missing intervention entries for {missing}")
        return [preds[k] for k in keys]
    return list(preds)


def calibration_score(kind: ScoreKind, pred, y) -> np.ndarray:
    """Score used on calibration rows (inclusive for greedy ``aps``/``raps``)."""
    return score(kind, pred, y, kind.inclusive_calibration)


def symmetrize(kind: ScoreKind, agg: str, per_intervention, y, domain=None,
               inclusive: bool = False) -> np.ndarray:
    """Aggregate the base score over all attribute interventions.

    ``per_intervention`` is either a list already in canonical domain order or
    a dict keyed by attribute value (which is put into canonical order first,
    so the result does not depend on insertion order).
    """
    preds = _canonical(per_intervention, domain)
    if not preds:
        raise InvalidParameterError("need at least one intervention")
    return aggregate(agg, np.stack([score(kind, p, y, inclusive) for p in preds]))
