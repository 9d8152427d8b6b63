"""Seeded generators for the four biomarker simulation designs and Bayes references.

Random streams come from numpy's PCG64 bit generator.  Each (seed,
replication, purpose) triple gets its own ``SeedSequence`` spawn key, so a
replication draws the same numbers whether runs are serial or parallel.
Normals use numpy's ziggurat sampler.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.optimize import brentq
from scipy.special import expit, ndtr, ndtri

DESIGNS = ("ex1", "ex2", "ex3", "ex4")

# purpose codes for substreams
TRAIN, TEST, MC = 0, 1, 2

EQUICORR = 0.3 * np.eye(4) + 0.7 * np.ones((4, 4))
EX1_MU_POS = np.array([0.4, 1.0, 1.5, 1.2])
EX1_MU_NEG = np.zeros(4)
EX2_MU_POS = np.array([0.55, 0.7, 0.85, 1.0])
EX2_COV_POS = 0.25 * np.ones((4, 4)) + np.diag([0.025, 0.1, 0.175, 0.25])
EX2_MU_NEG = np.full(4, 0.55)
EX2_COV_NEG = 0.025 * np.eye(4) + 0.25 * np.ones((4, 4))


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic generator for a seed and an optional substream key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))))


@dataclass
class LabeledSample:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ValueError("X must be n x m with one label per row")


@dataclass(frozen=True)
class SimDesign:
    id: str
    n_train: int = 500
    n_test: int = 2000
    copula: str = "direct"

    def __post_init__(self):
        if self.id not in DESIGNS:
            raise ValueError(f"unknown design {self.id!r}; expected one of {DESIGNS}")
        if self.copula not in ("direct", "adjusted"):
            raise ValueError("copula must be 'direct' or 'adjusted'")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("sample sizes must be positive")


# ---------------------------------------------------------------------------
# samplers


def _cholesky(Sigma):
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    try:
        return np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-10 * max(1.0, float(np.trace(Sigma)) / len(Sigma))
    try:
        return np.linalg.cholesky(Sigma + jitter * np.eye(len(Sigma)))
    except np.linalg.LinAlgError:
        raise ValueError("covariance matrix is not positive semidefinite") from None


def mvn_sample(mu, Sigma, n: int, rng: np.random.Generator) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    L = _cholesky(Sigma)
    return mu + rng.standard_normal((n, len(mu))) @ L.T


def mvt_sample(mu, Sigma, dof: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if dof < 1:
        raise ValueError("degrees of freedom must be >= 1")
    mu = np.asarray(mu, dtype=float)
    Z = mvn_sample(np.zeros(len(mu)), Sigma, n, rng)
    W = rng.chisquare(dof, size=n)
    return mu + Z / np.sqrt(W / dof)[:, None]


def gamma_moments(mu, Sigma):
    """(shape, scale) per coordinate matching the given means and variances."""
    mu = np.asarray(mu, dtype=float)
    var = np.diag(np.asarray(Sigma, dtype=float))
    if np.any(mu <= 0) or np.any(var <= 0):
        raise ValueError("gamma margins need positive means and variances")
    return mu**2 / var, var / mu


def _corr(Sigma):
    Sigma = np.asarray(Sigma, dtype=float)
    d = np.sqrt(np.diag(Sigma))
    return Sigma / np.outer(d, d)


def normal_to_gamma(z, shape):
    """Gamma(shape, 1) quantile of Phi(z), using the survival side for z > 0."""
    z = np.asarray(z, dtype=float)
    lo = stats.gamma.ppf(ndtr(np.minimum(z, 0.0)), shape)
    hi = stats.gamma.isf(ndtr(-np.maximum(z, 0.0)), shape)
    return np.where(z > 0, hi, lo)


def _gamma_pair_corr(rho, k1, k2, nodes=48):
    """Pearson correlation of standardized gamma transforms of a rho-correlated normal pair."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / w.sum()
    z1 = x[:, None]
    z2 = rho * x[:, None] + np.sqrt(1 - rho**2) * x[None, :]
    g1 = (normal_to_gamma(z1, k1) - k1) / np.sqrt(k1)
    g2 = (normal_to_gamma(z2, k2) - k2) / np.sqrt(k2)
    return float(np.sum(w[:, None] * w[None, :] * g1 * g2))


@lru_cache(maxsize=32)
def _adjusted_corr(shapes: tuple, target: tuple) -> np.ndarray:
    d = len(shapes)
    T = np.array(target).reshape(d, d)
    R = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            t = T[i, j]
            f = lambda r: _gamma_pair_corr(r, shapes[i], shapes[j]) - t
            R[i, j] = R[j, i] = brentq(f, -0.999, 0.999) if abs(t) > 0 else 0.0
    w, V = np.linalg.eigh(R)
    if w[0] <= 0:
        R = (V * np.maximum(w, 1e-8)) @ V.T
        R = _corr(R)
    return R


def copula_correlation(mu, Sigma, copula: str = "direct") -> np.ndarray:
    """Normal-copula correlation: Sigma's own correlation, or adjusted so the
    gamma margins reproduce it."""
    R = _corr(Sigma)
    if copula == "direct":
        return R
    shapes, _ = gamma_moments(mu, Sigma)
    return _adjusted_corr(tuple(np.round(shapes, 12)), tuple(np.round(R.ravel(), 12)))


def gamma_copula_sample(mu, Sigma, n: int, rng: np.random.Generator, copula: str = "direct") -> np.ndarray:
    shape, scale = gamma_moments(mu, Sigma)
    R = copula_correlation(mu, Sigma, copula)
    Z = mvn_sample(np.zeros(len(shape)), R, n, rng)
    return normal_to_gamma(Z, shape) * scale


# ---------------------------------------------------------------------------
# designs


def ex3_logit(X):
    x1, x2, x3, x4 = np.asarray(X, dtype=float).T
    return x1 + x2**2 + x3**3 + x4**4 - 1.5


def ex4_logit(X):
    x1, x2, x3, x4 = np.asarray(X, dtype=float).T
    return 8.0 * (np.sin(0.5 * np.pi * x1) + np.cos(np.pi * x1 * x2) + x3**2 + 3 * x3 * x4 + x4**2)


def _two_class(n, rng, draw_pos, draw_neg):
    y = np.where(rng.random(n) < 0.5, 1, -1)
    X = np.empty((n, 4))
    pos = y == 1
    X[pos] = draw_pos(int(pos.sum()))
    X[~pos] = draw_neg(int((~pos).sum()))
    return LabeledSample(X, y)


def sample_ex1(n, rng, mu_pos=EX1_MU_POS, mu_neg=EX1_MU_NEG) -> LabeledSample:
    return _two_class(n, rng, lambda k: mvn_sample(mu_pos, EQUICORR, k, rng),
                      lambda k: mvn_sample(mu_neg, EQUICORR, k, rng))


def sample_ex2(n, rng, copula="direct") -> LabeledSample:
    return _two_class(n, rng, lambda k: gamma_copula_sample(EX2_MU_POS, EX2_COV_POS, k, rng, copula),
                      lambda k: gamma_copula_sample(EX2_MU_NEG, EX2_COV_NEG, k, rng, copula))


def _logistic(X, logit, rng):
    y = np.where(rng.random(len(X)) < expit(logit(X)), 1, -1)
    return LabeledSample(X, y)


def sample_ex3(n, rng) -> LabeledSample:
    return _logistic(mvn_sample(np.zeros(4), EQUICORR, n, rng), ex3_logit, rng)


def sample_ex4(n, rng) -> LabeledSample:
    return _logistic(mvt_sample(np.zeros(4), np.eye(4), 4, n, rng), ex4_logit, rng)


def sample_design(design: SimDesign, n: int, rng) -> LabeledSample:
    if design.id == "ex1":
        return sample_ex1(n, rng)
    if design.id == "ex2":
        return sample_ex2(n, rng, design.copula)
    if design.id == "ex3":
        return sample_ex3(n, rng)
    return sample_ex4(n, rng)


def generate(design: SimDesign, rng) -> tuple[LabeledSample, LabeledSample]:
    """Training then test sample, both drawn from ``rng`` in that order."""
    train = sample_design(design, design.n_train, rng)
    test = sample_design(design, design.n_test, rng)
    return train, test


# ---------------------------------------------------------------------------
# Bayes references


def _mvn_logpdf(X, mu, Sigma):
    return np.atleast_1d(stats.multivariate_normal(mu, Sigma).logpdf(X))


def _gamma_copula_logpdf(X, mu, Sigma, copula):
    shape, scale = gamma_moments(mu, Sigma)
    R = copula_correlation(mu, Sigma, copula)
    U = np.clip(stats.gamma.cdf(X / scale, shape), 1e-300, 1 - 1e-16)
    Z = ndtri(U)
    log_c = _mvn_logpdf(Z, np.zeros(len(mu)), R) - stats.norm.logpdf(Z).sum(axis=1)
    return log_c + (stats.gamma.logpdf(X / scale, shape) - np.log(scale)).sum(axis=1)


def posterior(design: SimDesign, X) -> np.ndarray:
    """P(Y = 1 | x) under the design."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if design.id == "ex1":
        return expit(_mvn_logpdf(X, EX1_MU_POS, EQUICORR) - _mvn_logpdf(X, EX1_MU_NEG, EQUICORR))
    if design.id == "ex2":
        return expit(_gamma_copula_logpdf(X, EX2_MU_POS, EX2_COV_POS, design.copula)
                     - _gamma_copula_logpdf(X, EX2_MU_NEG, EX2_COV_NEG, design.copula))
    if design.id == "ex3":
        return expit(ex3_logit(X))
    if design.id == "ex4":
        return expit(ex4_logit(X))
    raise ValueError(f"no known posterior for design {design.id!r}")


def bayes_youden_from_posterior(p, pi: float):
    """Per-draw contributions whose mean minus 1 is the optimal Youden index."""
    p = np.asarray(p, dtype=float)
    return np.where(p >= pi, p / pi, (1 - p) / (1 - pi))


def bayes_reference(design: SimDesign, n_mc: int, rng) -> tuple[float, float]:
    """Monte-Carlo optimal Youden index and its standard error."""
    X = sample_design(design, n_mc, rng).X
    p = posterior(design, X)
    pi = 0.5 if design.id in ("ex1", "ex2") else float(p.mean())
    h = bayes_youden_from_posterior(p, pi)
    return float(h.mean() - 1.0), float(h.std(ddof=1) / np.sqrt(n_mc))


def ex1_bayes_closed_form() -> float:
    """2 Phi(Delta/2) - 1 with Delta the Mahalanobis separation of the two classes."""
    d = EX1_MU_POS - EX1_MU_NEG
    delta = np.sqrt(d @ np.linalg.solve(EQUICORR, d))
    return float(2 * stats.norm.cdf(delta / 2) - 1)


# two-marker illustrations: cases ~ N((1,1), I), controls ~ N(0, s I), pi = 1/2


def toy_posterior(X, control_var: float = 1.0) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lp = _mvn_logpdf(X, np.ones(2), np.eye(2))
    ln = _mvn_logpdf(X, np.zeros(2), control_var * np.eye(2))
    return expit(lp - ln)


def toy_quadratic_score(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return (X**2).sum(axis=1) / 4 - X.sum(axis=1)
