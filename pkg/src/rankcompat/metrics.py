"""Exact pair-counting metrics for a pair of risk models.

A *patient-pair* is an index pair ``(i, j)`` with ``labels[i] == 0`` and
``labels[j] == 1``. A model ranks the pair correctly iff
``scores[i] < scores[j]`` strictly; tied scores count as incorrect.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from rankcompat.errors import (
    DataError,
    LengthMismatch,
    NoOrderedPairs,
    NonFiniteScore,
    OriginalAllWrong,
    OriginalNoCorrectPairs,
    OutOfRegime,
    SingleClass,
)

# Upper bound on the number of booleans materialised per chunk of pairs.
_PAIR_CHUNK = 1 << 22


def _scores(x, name="scores") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise NonFiniteScore(f"{name} contain NaN or infinite values")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise DataError(f"{name} must lie in [0, 1]")
    return x


def _binary_labels(y, n) -> np.ndarray:
    y = np.asarray(y).reshape(-1)
    if y.shape[0] != n:
        raise LengthMismatch(f"{n} scores but {y.shape[0]} labels")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0 or 1")
    return y.astype(bool)


def _split_classes(labels, *score_vectors):
    """Return (negatives, positives) slices of each score vector."""
    n = score_vectors[0].shape[0]
    for s in score_vectors[1:]:
        if s.shape[0] != n:
            raise LengthMismatch("score vectors differ in length")
    pos = _binary_labels(labels, n)
    n1 = int(pos.sum())
    if n1 == 0 or n1 == n:
        raise SingleClass("both label classes are required")
    return [(s[~pos], s[pos]) for s in score_vectors]


def _correct_pair_count(neg, pos) -> int:
    """Number of pairs with neg < pos, in O(n log n)."""
    return int(np.searchsorted(np.sort(neg), pos, side="left").sum())


def _joint_correct_count(o_neg, o_pos, u_neg, u_pos) -> int:
    """Number of pairs ranked correctly by both models (chunked brute force)."""
    step = max(1, _PAIR_CHUNK // max(1, o_pos.size))
    total = 0
    for start in range(0, o_neg.size, step):
        sl = slice(start, start + step)
        both = (o_neg[sl, None] < o_pos[None, :]) & (u_neg[sl, None] < u_pos[None, :])
        total += int(np.count_nonzero(both))
    return total


def auroc(scores, labels) -> float:
    """Fraction of patient-pairs ranked correctly.

    >>> auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    0.75
    """
    s = _scores(scores)
    ((neg, pos),) = _split_classes(labels, s)
    return _correct_pair_count(neg, pos) / (neg.size * pos.size)


def predict_labels(scores, tau: float) -> np.ndarray:
    """Thresholded predictions: 1 iff score > tau."""
    return (np.asarray(scores, dtype=np.float64) > tau).astype(np.int64)


def accuracy(scores, labels, tau: float) -> float:
    s = _scores(scores)
    y = _binary_labels(labels, s.shape[0])
    return float(np.mean((s > tau) == y))


def btc(orig, upd, labels, tau_o: float, tau_u: float) -> float:
    """Backwards trust compatibility at fixed thresholds.

    Among patients the original model labels correctly, the fraction the
    updated model also labels correctly. Not symmetric in its arguments.
    """
    o = _scores(orig, "original scores")
    u = _scores(upd, "updated scores")
    if o.shape != u.shape:
        raise LengthMismatch("score vectors differ in length")
    y = _binary_labels(labels, o.shape[0])
    o_ok = (o > tau_o) == y
    denom = int(o_ok.sum())
    if denom == 0:
        raise OriginalAllWrong("original model labels no patient correctly")
    both = int(np.count_nonzero(o_ok & ((u > tau_u) == y)))
    return both / denom


@dataclasses.dataclass(frozen=True)
class PopTable:
    """Joint correctness counts over all patient-pairs.

    The first sign refers to the original model, the second to the updated
    one: ``m_pm`` counts pairs the original ranks correctly and the updated
    ranks incorrectly.
    """

    m_pp: int
    m_pm: int
    m_mp: int
    m_mm: int

    @property
    def m(self) -> int:
        return self.m_pp + self.m_pm + self.m_mp + self.m_mm

    @property
    def m_op(self) -> int:
        return self.m_pp + self.m_pm

    @property
    def m_up(self) -> int:
        return self.m_pp + self.m_mp

    @property
    def phi_pp(self) -> float:
        return self.m_pp / self.m

    @property
    def phi_pm(self) -> float:
        return self.m_pm / self.m

    @property
    def phi_mp(self) -> float:
        return self.m_mp / self.m

    @property
    def phi_mm(self) -> float:
        return self.m_mm / self.m

    @property
    def auroc_o(self) -> float:
        return self.m_op / self.m

    @property
    def auroc_u(self) -> float:
        return self.m_up / self.m

    def as_dict(self) -> dict:
        out = {"m": self.m}
        for name in ("m_pp", "m_pm", "m_mp", "m_mm", "phi_pp", "phi_pm",
                     "phi_mp", "phi_mm", "auroc_o", "auroc_u"):
            out[name] = getattr(self, name)
        return out


def pop_table(orig, upd, labels) -> PopTable:
    o = _scores(orig, "original scores")
    u = _scores(upd, "updated scores")
    (o_neg, o_pos), (u_neg, u_pos) = _split_classes(labels, o, u)
    m = o_neg.size * o_pos.size
    m_op = _correct_pair_count(o_neg, o_pos)
    m_up = _correct_pair_count(u_neg, u_pos)
    m_pp = _joint_correct_count(o_neg, o_pos, u_neg, u_pos)
    m_pm = m_op - m_pp
    m_mp = m_up - m_pp
    return PopTable(m_pp, m_pm, m_mp, m - m_op - m_mp)


def rbc_from_pop(pop: PopTable) -> float:
    if pop.m_op == 0:
        raise OriginalNoCorrectPairs("original model ranks no patient-pair correctly")
    return pop.m_pp / pop.m_op


def rbc(orig, upd, labels) -> float:
    """Rank-based compatibility of an update.

    Of the patient-pairs the original model ranks correctly, the fraction
    the updated model also ranks correctly.

    >>> rbc([0.2, 0.3, 0.5], [0.4, 0.6, 0.5], [0, 0, 1])
    0.5
    """
    return rbc_from_pop(pop_table(orig, upd, labels))


def rbc_general(orig, upd, labels) -> float:
    """Rank-based compatibility for ordinal labels.

    Every ordered pair ``(i, j)`` with ``labels[i] < labels[j]`` takes the
    place of a patient-pair. Reduces to :func:`rbc` on binary labels.
    """
    o = _scores(orig, "original scores")
    u = _scores(upd, "updated scores")
    y = np.asarray(labels).reshape(-1)
    if not (o.shape == u.shape == y.shape):
        raise LengthMismatch("scores and labels differ in length")
    if y.dtype.kind == "f" and not np.all(np.isfinite(y)):
        raise DataError("labels must be finite")
    if np.any(y < 0):
        raise DataError("ordinal labels must be non-negative")
    n = y.size
    step = max(1, _PAIR_CHUNK // max(1, n))
    num = den = n_pairs = 0
    for start in range(0, n, step):
        sl = slice(start, start + step)
        ordered = y[sl, None] < y[None, :]
        o_ok = ordered & (o[sl, None] < o[None, :])
        n_pairs += int(np.count_nonzero(ordered))
        den += int(np.count_nonzero(o_ok))
        num += int(np.count_nonzero(o_ok & (u[sl, None] < u[None, :])))
    if n_pairs == 0:
        raise NoOrderedPairs("no pair has distinct labels")
    if den == 0:
        raise OriginalNoCorrectPairs("original model ranks no label-ordered pair correctly")
    return num / den


@dataclasses.dataclass(frozen=True)
class BoundSet:
    """Feasible ranges of RBC and the POP proportions given both AUROCs."""

    rbc_lower: float
    phi_pp_lo: float
    phi_pp_hi: float
    phi_pm_hi: float
    phi_mp_hi: float
    phi_mm_hi: float

    def violations(self, pop: PopTable, atol: float = 1e-12) -> list[str]:
        """Names of the constraints ``pop`` breaks (empty when all hold)."""
        out = []
        if pop.m_op and rbc_from_pop(pop) < self.rbc_lower - atol:
            out.append("rbc_lower")
        if pop.phi_pp < self.phi_pp_lo - atol:
            out.append("phi_pp_lo")
        checks = [("phi_pp_hi", pop.phi_pp, self.phi_pp_hi),
                  ("phi_pm_hi", pop.phi_pm, self.phi_pm_hi),
                  ("phi_mp_hi", pop.phi_mp, self.phi_mp_hi),
                  ("phi_mm_hi", pop.phi_mm, self.phi_mm_hi)]
        out.extend(name for name, value, hi in checks if value > hi + atol)
        return out


def in_regime(auroc_o: float, auroc_u: float) -> bool:
    return 0.5 < auroc_o <= auroc_u <= 1.0


def bounds(auroc_o: float, auroc_u: float) -> BoundSet:
    """Analytic bounds for an update at least as discriminative as the original.

    Only defined for ``0.5 < auroc_o <= auroc_u <= 1``.

    >>> round(bounds(0.8, 0.9).rbc_lower, 12)
    0.875
    """
    if not in_regime(auroc_o, auroc_u):
        raise OutOfRegime(
            f"bounds need 0.5 < auroc_o <= auroc_u <= 1, got ({auroc_o}, {auroc_u})")
    # exact values never leave these ranges; clamp away rounding
    lo = min(auroc_o + auroc_u - 1.0, auroc_o)
    return BoundSet(
        rbc_lower=min(lo / auroc_o, 1.0),
        phi_pp_lo=lo,
        phi_pp_hi=auroc_o,
        phi_pm_hi=1.0 - auroc_u,
        phi_mp_hi=1.0 - auroc_o,
        phi_mm_hi=1.0 - auroc_u,
    )
