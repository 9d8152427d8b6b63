"""Sensitivity, specificity and the empirical Youden index.

Scores at or above the cut-point are called positive, matching sign(0) = +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .loss import check_labels


def _split(scores, labels):
    s = np.asarray(scores, dtype=float).ravel()
    y = check_labels(labels)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    return s[y == 1], s[y == -1]


def sens_spec(scores, labels, c: float) -> tuple[float, float]:
    pos, neg = _split(scores, labels)
    return float(np.mean(pos >= c)), float(np.mean(neg < c))


def empirical_youden(scores, labels, c: float) -> float:
    """Youden index at a fixed cut-point, written as spe - Pr(score <= c | y=+1)."""
    pos, neg = _split(scores, labels)
    spe = np.count_nonzero(neg < c) / len(neg)
    miss = np.count_nonzero(pos < c) / len(pos)
    return float(spe - miss)


def fold_youden(scores, labels, c: float) -> float:
    """Validation-fold criterion used for tuning.

    Both class rates use ``score <= c``, exactly as in the cross-validation
    formula; a tie at the cut-point therefore counts against sensitivity.
    """
    pos, neg = _split(scores, labels)
    return float(np.count_nonzero(neg <= c) / len(neg) - np.count_nonzero(pos <= c) / len(pos))


def threshold_candidates(scores) -> np.ndarray:
    """One cut per distinct partition: below all, between neighbours, above all."""
    u = np.unique(np.asarray(scores, dtype=float))
    mids = 0.5 * (u[1:] + u[:-1])
    # for adjacent floats the midpoint rounds onto the lower value
    mids = np.where(mids > u[:-1], mids, u[1:])
    lo = min(u[0] - 1.0, np.nextafter(u[0], -np.inf))
    hi = max(u[-1] + 1.0, np.nextafter(u[-1], np.inf))
    return np.concatenate([[lo], mids, [hi]])


def youden_curve(scores, labels, cands=None):
    """Empirical Youden at every candidate cut-point (vectorised)."""
    pos, neg = _split(scores, labels)
    if cands is None:
        cands = threshold_candidates(np.concatenate([pos, neg]))
    pos = np.sort(pos)
    neg = np.sort(neg)
    below_pos = np.searchsorted(pos, cands, side="left")
    below_neg = np.searchsorted(neg, cands, side="left")
    j = below_neg / len(neg) - below_pos / len(pos)
    return cands, j


def best_threshold(scores, labels) -> tuple[float, float]:
    """Youden-maximising cut-point; ties go to the smallest candidate."""
    cands, j = youden_curve(scores, labels)
    k = int(np.argmax(j))
    return float(cands[k]), float(j[k])


def marker_youden(x, labels) -> float:
    """Best threshold-scan Youden of a single marker in either orientation."""
    return max(best_threshold(x, labels)[1], best_threshold(-np.asarray(x, dtype=float), labels)[1])


# ---------------------------------------------------------------------------
# Fisher-consistency probe on finite distributions


@dataclass(frozen=True)
class DiscreteDistribution:
    """Atoms with probability mass ``mass`` and P(Y=1 | atom) = ``p``."""

    mass: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if m.shape != p.shape or m.ndim != 1 or len(m) == 0:
            raise ValueError("mass and p must be 1-d arrays of equal length")
        if np.any(m <= 0) or not np.isclose(m.sum(), 1.0):
            raise ValueError("mass must be positive and sum to 1")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("p must lie in [0, 1]")
        object.__setattr__(self, "mass", m)
        object.__setattr__(self, "p", p)

    @property
    def pi(self) -> float:
        return float(self.mass @ self.p)


@dataclass(frozen=True)
class ConsistencyProbe:
    epsilon: float
    delta_sequence: tuple

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        d = np.asarray(self.delta_sequence, dtype=float)
        if len(d) == 0 or np.any(d <= 0) or np.any(np.diff(d) >= 0):
            raise ValueError("delta_sequence must be positive and strictly decreasing")


def weighted_psi_risk(v, dist: DiscreteDistribution, delta: float) -> float:
    """E[w(Y) L_delta(Y v(X))] for atom-wise margins v = g - c."""
    v = np.asarray(v, dtype=float)
    pi = dist.pi

    def L(u):
        return np.clip((delta - u) / delta, 0.0, 1.0)

    per_atom = dist.p / pi * L(v) + (1 - dist.p) / (1 - pi) * L(-v)
    return float(dist.mass @ per_atom)


def psi_risk_minimizer(dist: DiscreteDistribution, delta: float) -> np.ndarray:
    """Atom-wise margins g - c minimising the weighted psi_delta risk.

    The risk separates over atoms once c is absorbed into g, and each term
    is piecewise linear with kinks at -delta, 0, delta and flat outside, so
    the minimum over each coordinate is attained on those three points.
    """
    cand = np.array([-delta, 0.0, delta])
    pi = dist.pi
    L_pos = np.clip((delta - cand) / delta, 0.0, 1.0)
    L_neg = np.clip((delta + cand) / delta, 0.0, 1.0)
    risk = np.outer(dist.p / pi, L_pos) + np.outer((1 - dist.p) / (1 - pi), L_neg)
    return cand[np.argmin(risk, axis=1)]


def fisher_consistency_probe(probe: ConsistencyProbe, dist: DiscreteDistribution) -> np.ndarray:
    """Pr(D_delta symmetric-difference D_Bayes) for each delta in the probe."""
    pi = dist.pi
    gap = dist.p - pi
    if np.any(np.abs(gap) < 1e-12):
        raise ValueError("an atom has p(x) == pi; the Bayes set is ambiguous there")
    keep = np.abs(gap) >= probe.epsilon
    bayes = (gap >= 0) & keep
    out = []
    for delta in probe.delta_sequence:
        v = psi_risk_minimizer(dist, float(delta))
        d_set = (v >= 0) & keep
        out.append(float(dist.mass[d_set != bayes].sum()))
    return np.asarray(out)
