"""Weighted fitness metrics.

Element-wise metrics are computed in two steps: a row-wise loss, then a
weighted mean of that loss. Correlation metrics use weighted means and
(co)variances normalized by the weight sum; Spearman is Pearson applied to
average-tie ranks.
"""

from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

__all__ = [
    "ConstantVectorError",
    "Metric",
    "population_fitness",
    "rank_vector",
    "raw_fitness",
    "row_loss",
    "sigmoid",
    "weighted_pearson",
]

PROB_CLIP = 1e-15


class ConstantVectorError(ValueError):
    pass


class Metric(str, Enum):
    MAE = "mae"
    MSE = "mse"
    RMSE = "rmse"
    LOGLOSS = "logloss"
    PEARSON = "pearson"
    SPEARMAN = "spearman"

    @property
    def higher_is_better(self) -> bool:
        return self in (Metric.PEARSON, Metric.SPEARMAN)

    @property
    def elementwise(self) -> bool:
        return not self.higher_is_better

    @classmethod
    def parse(cls, name) -> "Metric":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown metric {name!r}; valid: {valid}") from None


def sigmoid(x):
    return expit(x)


def row_loss(metric, y, y_pred):
    """Per-row loss for the element-wise metrics (vectorized)."""
    metric = Metric.parse(metric)
    y = np.asarray(y, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if metric is Metric.MAE:
        return np.abs(y - y_pred)
    if metric in (Metric.MSE, Metric.RMSE):
        d = y - y_pred
        return d * d
    if metric is Metric.LOGLOSS:
        p = np.clip(expit(y_pred), PROB_CLIP, 1.0 - PROB_CLIP)
        return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    raise ValueError(f"{metric.value} has no row-wise loss")


def rank_vector(values) -> np.ndarray:
    """Ranks 1..n in ascending order; ties share their average rank."""
    return rankdata(np.asarray(values, dtype=np.float64), method="average")


def _is_constant(v: np.ndarray, w: np.ndarray) -> bool:
    live = v[w > 0]
    return live.size == 0 or bool(np.all(live == live[0]))


def weighted_pearson(x, y, w) -> float:
    sw = np.sum(w)
    mx = np.sum(w * x) / sw
    my = np.sum(w * y) / sw
    dx = x - mx
    dy = y - my
    cov = np.sum(w * dx * dy) / sw
    vx = np.sum(w * dx * dx) / sw
    vy = np.sum(w * dy * dy) / sw
    if vx == 0 or vy == 0 or _is_constant(x, w) or _is_constant(y, w):
        raise ConstantVectorError("correlation undefined for a constant vector")
    r = cov / np.sqrt(vx * vy)
    return float(min(1.0, max(-1.0, r)))


def _check_inputs(metric: Metric, y, y_pred, w):
    y = np.ascontiguousarray(y, dtype=np.float64)
    y_pred = np.ascontiguousarray(y_pred, dtype=np.float64)
    w = np.ones_like(y) if w is None else np.ascontiguousarray(w, dtype=np.float64)
    if not (y.shape == y_pred.shape == w.shape) or y.ndim != 1:
        raise ValueError(f"shape mismatch: y{y.shape} y_pred{y_pred.shape} w{w.shape}")
    if y.size < 2:
        raise ValueError("need at least 2 rows")
    if np.any(w < 0) or not np.sum(w) > 0:
        raise ValueError("weights must be non-negative with a positive sum")
    if metric is Metric.LOGLOSS and not np.all((y == 0) | (y == 1)):
        raise ValueError("logloss targets must be 0 or 1")
    return y, y_pred, w


def raw_fitness(metric, y, y_pred, w=None) -> float:
    """Weighted fitness of one prediction vector.

    Parameters
    ----------
    metric : Metric or str
    y, y_pred : array-like of shape (n,)
    w : array-like of shape (n,), optional
        Non-negative sample weights; all-ones when omitted.

    Raises
    ------
    ConstantVectorError
        Pearson/Spearman with a constant ``y`` or ``y_pred``.
    """
    metric = Metric.parse(metric)
    y, y_pred, w = _check_inputs(metric, y, y_pred, w)
    return _raw(metric, y, y_pred, w, np.sum(w))


def _raw(metric: Metric, y, y_pred, w, sw) -> float:
    if metric is Metric.PEARSON:
        return weighted_pearson(y, y_pred, w)
    if metric is Metric.SPEARMAN:
        return weighted_pearson(rank_vector(y), rank_vector(y_pred), w)
    mean = float(np.sum(w * row_loss(metric, y, y_pred)) / sw)
    return float(np.sqrt(mean)) if metric is Metric.RMSE else mean


def population_fitness(metric, y, preds: np.ndarray, w=None,
                       constant_fitness: Optional[float] = 0.0) -> np.ndarray:
    """Raw fitness of every column of a (rows x programs) prediction matrix.

    Correlation metrics score a constant column as ``constant_fitness``
    (pass ``None`` to raise instead).
    """
    metric = Metric.parse(metric)
    y, _, w = _check_inputs(metric, y, preds[:, 0] if preds.shape[1] else y, w)
    sw = np.sum(w)
    out = np.empty(preds.shape[1])
    for j in range(preds.shape[1]):
        col = np.ascontiguousarray(preds[:, j])
        try:
            out[j] = _raw(metric, y, col, w, sw)
        except ConstantVectorError:
            if constant_fitness is None:
                raise
            out[j] = constant_fitness
    return out
