"""Counting joint ranking configurations of two models.

Given ``m`` patient-pairs, of which the original model ranks ``m_op`` and the
updated model ``m_up`` correctly, the number of ways exactly ``k`` pairs are
ranked correctly by both is the hypergeometric numerator::

    nu(k) = C(m_op, k) * C(m - m_op, m_up - k)

These counts overflow fixed-width integers almost immediately, so the
floating-point path works with natural logarithms throughout.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.special import gammaln

from rankcompat.errors import DataError, InfeasibleCounts


@dataclasses.dataclass(frozen=True)
class PairCountTriple:
    m: int
    m_op: int
    m_up: int

    def __post_init__(self):
        for name in ("m", "m_op", "m_up"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DataError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.m_op > self.m or self.m_up > self.m:
            raise DataError("m_op and m_up cannot exceed m")

    @property
    def k_range(self) -> tuple[int, int]:
        """Inclusive range of feasible joint-correct counts."""
        return max(0, self.m_op + self.m_up - self.m), min(self.m_op, self.m_up)


def _log_choose(n, k):
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def log_nu(t: PairCountTriple, k):
    """Natural log of ``nu(k)``; ``-inf`` outside the feasible range.

    ``k`` may be a scalar or an integer array.
    """
    k_arr = np.asarray(k)
    lo, hi = t.k_range
    kf = k_arr.astype(np.float64)
    ok = (k_arr >= lo) & (k_arr <= hi)
    safe = np.where(ok, kf, lo)
    val = _log_choose(t.m_op, safe) + _log_choose(t.m - t.m_op, t.m_up - safe)
    out = np.where(ok, val, -np.inf)
    return float(out) if out.ndim == 0 else out


def nu(t: PairCountTriple, k: int) -> int:
    """Exact integer ``nu(k)``."""
    lo, hi = t.k_range
    if not lo <= k <= hi:
        return 0
    return math.comb(t.m_op, k) * math.comb(t.m - t.m_op, t.m_up - k)


def k_star(t: PairCountTriple) -> int:
    """Joint-correct count with the most configurations (hypergeometric mode)."""
    if t.m < 1:
        raise DataError("k_star needs m >= 1")
    return (t.m_op + 1) * (t.m_up + 1) // (t.m + 2)


def counts_from_auroc(auroc: float, m: int) -> int:
    """Correct-pair count ``round(auroc * m)``, rejecting values off [0, m]."""
    if not (0.0 <= auroc <= 1.0) or m < 1:
        raise InfeasibleCounts(f"cannot convert AUROC {auroc} over m={m} pairs")
    c = int(np.rint(auroc * m))
    if not 0 <= c <= m:
        raise InfeasibleCounts(f"count {c} outside [0, {m}]")
    return c


@dataclasses.dataclass(frozen=True)
class NuCurve:
    auroc_u: float
    triple: PairCountTriple
    k: np.ndarray
    rbc: np.ndarray
    log_count: np.ndarray
    k_star: int

    @property
    def log10_count(self) -> np.ndarray:
        return self.log_count / math.log(10.0)

    @property
    def peak_rbc(self) -> float:
        return self.k_star / self.triple.m_op


def nu_curve(auroc_o: float, auroc_u_list, m: int) -> list[NuCurve]:
    """One configuration-count curve per updated-model AUROC.

    The abscissa is rescaled from ``k`` to RBC by dividing by ``m_op``.
    """
    m_op = counts_from_auroc(auroc_o, m)
    if m_op == 0:
        raise InfeasibleCounts("original model ranks no pair correctly; RBC undefined")
    curves = []
    for au in auroc_u_list:
        t = PairCountTriple(m, m_op, counts_from_auroc(au, m))
        lo, hi = t.k_range
        k = np.arange(lo, hi + 1)
        curves.append(NuCurve(float(au), t, k, k / m_op, log_nu(t, k), k_star(t)))
    return curves


def curves_to_rows(curves) -> tuple[list[str], list[list]]:
    header = ["auroc_u", "k", "rbc", "log10_count"]
    rows = []
    for c in curves:
        for k, r, lc in zip(c.k, c.rbc, c.log10_count):
            rows.append([c.auroc_u, int(k), float(r), float(lc)])
    return header, rows
