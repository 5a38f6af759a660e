"""Differentiable stand-ins for the ranking indicator and the training objective.

The objective for an updated model is::

    alpha * BCE(upd_scores, labels) + (1 - alpha) * (1 - soft_rbc(orig, upd))

where ``soft_rbc`` replaces each strict ranking indicator by a sigmoid of
``s`` times the score difference. The original model is frozen: only its
scores enter, never its parameters.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.special import expit

from rankcompat.errors import (
    DataError,
    InvalidConfig,
    LengthMismatch,
    NonFiniteScore,
    SingleClass,
)
from rankcompat.structures import Dataset, RiskModel

DEFAULT_SHARPNESS = 10.0
_BCE_EPS = 1e-12
_PAIR_CHUNK = 1 << 21


@dataclasses.dataclass(frozen=True)
class SurrogateConfig:
    s: float = DEFAULT_SHARPNESS
    alpha: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s > 0):
            raise InvalidConfig(f"sigmoid sharpness s must be positive, got {self.s}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidConfig(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclasses.dataclass(frozen=True)
class ObjectiveValue:
    total: float
    bce: float
    rank_loss: float


def rank_sigmoid(d, s: float = DEFAULT_SHARPNESS):
    """Smooth ranking indicator ``1 / (1 + exp(-s * d))`` of a score difference."""
    if not s > 0:
        raise InvalidConfig("s must be positive")
    return expit(s * np.asarray(d, dtype=np.float64))


def _finite(x, name):
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise NonFiniteScore(f"{name} contain NaN or infinite values")
    return x


def _pos_mask(labels, n):
    y = np.asarray(labels).reshape(-1)
    if y.shape[0] != n:
        raise LengthMismatch(f"{n} scores but {y.shape[0]} labels")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0 or 1")
    return y.astype(bool)


def _soft_sums(o, u, pos, s, want_coef=False):
    """Numerator and denominator of soft RBC over all (neg, pos) pairs.

    With ``want_coef`` also returns d(numerator)/d(u) per sample.
    """
    neg_idx = np.flatnonzero(~pos)
    pos_idx = np.flatnonzero(pos)
    o_pos, u_pos = o[pos_idx], u[pos_idx]
    num = den = 0.0
    coef = np.zeros_like(u) if want_coef else None
    step = max(1, _PAIR_CHUNK // max(1, pos_idx.size))
    for start in range(0, neg_idx.size, step):
        rows = neg_idx[start:start + step]
        a = expit(s * (o_pos[None, :] - o[rows, None]))
        b = expit(s * (u_pos[None, :] - u[rows, None]))
        num += float(np.sum(a * b))
        den += float(np.sum(a))
        if want_coef:
            w = a * (s * b * (1.0 - b))
            coef[pos_idx] += w.sum(axis=0)
            coef[rows] -= w.sum(axis=1)
    return num, den, coef


def rbc_soft(orig, upd, labels, s: float = DEFAULT_SHARPNESS) -> float:
    """Differentiable approximation of rank-based compatibility.

    Converges to :func:`rankcompat.metrics.rbc` as ``s`` grows on tie-free
    inputs.
    """
    o = _finite(orig, "original scores")
    u = _finite(upd, "updated scores")
    if o.shape != u.shape:
        raise LengthMismatch("score vectors differ in length")
    pos = _pos_mask(labels, o.size)
    if pos.all() or not pos.any():
        raise SingleClass("both label classes are required")
    if not s > 0:
        raise InvalidConfig("s must be positive")
    num, den, _ = _soft_sums(o, u, pos, s)
    return num / den


def bce(scores, labels) -> float:
    """Mean binary cross-entropy with scores clamped to [1e-12, 1 - 1e-12]."""
    p = np.clip(_finite(scores, "scores"), _BCE_EPS, 1.0 - _BCE_EPS)
    y = _pos_mask(labels, p.size)
    return float(-np.mean(np.where(y, np.log(p), np.log1p(-p))))


def objective(orig_scores, upd_scores, labels, cfg: SurrogateConfig) -> ObjectiveValue:
    """Weighted BCE plus incompatibility loss (``1 - rbc_soft``).

    With ``alpha == 1`` the rank term carries no weight; it is still
    reported when both classes are present and is NaN otherwise.
    """
    u = _finite(upd_scores, "updated scores")
    o = _finite(orig_scores, "original scores")
    if o.shape != u.shape:
        raise LengthMismatch("score vectors differ in length")
    pos = _pos_mask(labels, u.size)
    loss_bce = bce(u, pos)
    single = pos.all() or not pos.any()
    if single:
        if cfg.alpha < 1.0:
            raise SingleClass("rank loss needs both label classes")
        return ObjectiveValue(loss_bce, loss_bce, float("nan"))
    num, den, _ = _soft_sums(o, u, pos, cfg.s)
    rank_loss = 1.0 - num / den
    if cfg.alpha == 1.0:
        total = loss_bce
    elif cfg.alpha == 0.0:
        total = rank_loss
    else:
        total = cfg.alpha * loss_bce + (1.0 - cfg.alpha) * rank_loss
    return ObjectiveValue(total, loss_bce, rank_loss)


def objective_total(orig_scores, upd_scores, labels, cfg: SurrogateConfig) -> float:
    """``objective(...).total`` without computing terms that carry zero weight."""
    if cfg.alpha == 1.0:
        return bce(upd_scores, labels)
    return objective(orig_scores, upd_scores, labels, cfg).total


def _gradient(x, y, orig_scores, params, cfg, allow_single=False):
    """Gradient of the objective w.r.t. ``params`` = (weights, intercept).

    When ``allow_single`` is set a batch with one class contributes only the
    alpha-weighted BCE term instead of raising.
    """
    p = expit(x @ params[:-1] + params[-1])
    n = y.size
    pos = y.astype(bool)
    coef = np.zeros(n)
    if cfg.alpha > 0.0:
        coef += cfg.alpha * (p - y) / n
    if cfg.alpha < 1.0:
        if pos.all() or not pos.any():
            if not allow_single:
                raise SingleClass("rank loss needs both label classes")
        else:
            _, den, dnum = _soft_sums(orig_scores, p, pos, cfg.s, want_coef=True)
            coef -= (1.0 - cfg.alpha) * dnum * p * (1.0 - p) / den
    return np.append(x.T @ coef, coef.sum())


def objective_gradient(model: RiskModel, orig_scores, batch: Dataset,
                       cfg: SurrogateConfig) -> np.ndarray:
    """Analytic gradient of :func:`objective` for a logistic model.

    Returns a vector of length ``d + 1``: the weight gradient followed by the
    intercept derivative. ``orig_scores`` are held fixed.
    """
    x = model.check_features(batch.features)
    o = _finite(orig_scores, "original scores")
    if o.size != batch.n:
        raise LengthMismatch("orig_scores and batch differ in length")
    return _gradient(x, batch.labels.astype(np.float64), o, model.params, cfg)
