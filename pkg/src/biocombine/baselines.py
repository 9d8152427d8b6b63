"""Linear comparison methods: min-max, stepwise, bi-normal, kernel-smoothed, logistic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit
from scipy.stats import norm

from .estimator import default_lambda_grid
from .loss import check_labels
from .metrics import best_threshold, empirical_youden

_PENALTY = 1e6
_TIE = 1e-12  # Youden values closer than this count as equal (first one wins)


@dataclass
class LinearCombiner:
    beta: np.ndarray
    c: float
    method_tag: str
    train_youden: float = float("nan")
    converged: bool = True

    def features(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.method_tag == "mmm":
            return np.column_stack([X.max(axis=1), X.min(axis=1)])
        return X

    def score(self, X) -> np.ndarray:
        return self.features(X) @ self.beta

    def classify(self, X) -> np.ndarray:
        return np.where(self.score(X) - self.c >= 0, 1, -1)


@dataclass(frozen=True)
class OptimizerConfig:
    max_evals: int = 2000
    tol: float = 1e-6
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.max_evals < 1 or self.tol <= 0 or self.restarts < 1:
            raise ValueError("optimizer caps must be positive")


def coefficient_grid() -> np.ndarray:
    """Positive lambda grid mirrored to negatives, plus 0; ascending."""
    g = default_lambda_grid()
    return np.concatenate([-g[::-1], [0.0], g])


def nelder_mead(objective, x0, cfg: OptimizerConfig = OptimizerConfig()):
    """Seeded multi-start Nelder-Mead; never returns worse than x0."""
    x0 = np.asarray(x0, dtype=float).ravel()
    f0 = float(objective(x0))
    if not np.isfinite(f0):
        raise ValueError("objective is not finite at the starting point")

    def safe(x):
        v = float(objective(x))
        return v if np.isfinite(v) else _PENALTY

    rng = np.random.default_rng(cfg.seed)
    scale = np.maximum(np.abs(x0), 1.0)
    best_x, best_f = x0.copy(), f0
    for r in range(cfg.restarts):
        start = x0 if r == 0 else x0 + 0.5 * scale * rng.standard_normal(x0.shape)
        res = minimize(safe, start, method="Nelder-Mead",
                       options={"maxfev": cfg.max_evals, "xatol": cfg.tol, "fatol": cfg.tol})
        if res.fun < best_f:
            best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
    return best_x, best_f


def _finish(beta, c, tag, X, y, converged=True) -> LinearCombiner:
    model = LinearCombiner(beta=np.asarray(beta, dtype=float), c=float(c), method_tag=tag, converged=converged)
    model.train_youden = empirical_youden(model.score(X), y, model.c)
    return model


# ---------------------------------------------------------------------------
# grid-search methods


def mmm_fit(X, y, grid=None) -> LinearCombiner:
    X = np.asarray(X, dtype=float)
    y = check_labels(y)
    if X.shape[1] < 2:
        raise ValueError("min-max combination needs at least two markers")
    grid = coefficient_grid() if grid is None else np.asarray(grid, dtype=float)
    tmax, tmin = X.max(axis=1), X.min(axis=1)
    best = (-np.inf, None, None)
    for b in np.sort(grid):
        c, j = best_threshold(tmax + b * tmin, y)
        if j > best[0] + _TIE:
            best = (j, b, c)
    return _finish([1.0, best[1]], best[2], "mmm", X, y)


def swm_fit(X, y, grid=None) -> LinearCombiner:
    """Single greedy pass, adding markers in order of their own Youden index."""
    X = np.asarray(X, dtype=float)
    y = check_labels(y)
    grid = np.sort(coefficient_grid() if grid is None else np.asarray(grid, dtype=float))
    m = X.shape[1]
    solo = np.array([best_threshold(X[:, j], y)[1] for j in range(m)])
    order = np.argsort(-np.round(solo, 12), kind="stable")
    beta = np.zeros(m)
    beta[order[0]] = 1.0
    comp = X[:, order[0]].copy()
    for j in order[1:]:
        z = X[:, j]
        best_j, best_b = -np.inf, 0.0
        for b in grid:
            jj = best_threshold(comp + b * z, y)[1]
            if jj > best_j + _TIE:
                best_j, best_b = jj, b
        beta[j] = best_b
        comp = comp + best_b * z
    c, _ = best_threshold(X @ beta, y)  # cut on the score the model will report
    return _finish(beta, c, "swm", X, y)


# ---------------------------------------------------------------------------
# bi-normal model


def binormal_cut(m0, s0, m1, s1) -> float:
    """Youden-optimal cut between N(m0, s0^2) controls and N(m1, s1^2) cases."""
    if abs(s0 - s1) <= 1e-12 * max(s0, s1):
        return 0.5 * (m0 + m1)
    A = 1 / s0**2 - 1 / s1**2
    B = -2 * (m0 / s0**2 - m1 / s1**2)
    C = m0**2 / s0**2 - m1**2 / s1**2 - 2 * np.log(s1 / s0)
    disc = B * B - 4 * A * C
    if disc < 0:
        return 0.5 * (m0 + m1)
    r = np.sqrt(disc)
    roots = np.array([(-B - r) / (2 * A), (-B + r) / (2 * A)])
    lo, hi = min(m0, m1), max(m0, m1)
    inside = roots[(roots >= lo) & (roots <= hi)]
    if len(inside):
        return float(inside[0])
    j = norm.cdf((roots - m0) / s0) - norm.cdf((roots - m1) / s1)
    return float(roots[np.argmax(j)])


def binormal_youden(beta, mu0, S0, mu1, S1):
    """(J, c) for the projection beta under class-wise normal models; None if degenerate."""
    m0, m1 = beta @ mu0, beta @ mu1
    v0, v1 = beta @ S0 @ beta, beta @ S1 @ beta
    if v0 < 1e-12 or v1 < 1e-12:
        return None
    s0, s1 = np.sqrt(v0), np.sqrt(v1)
    c = binormal_cut(m0, s0, m1, s1)
    return float(norm.cdf((c - m0) / s0) - norm.cdf((c - m1) / s1)), c


def binormal_search(mu0, S0, mu1, S1, opt: OptimizerConfig = OptimizerConfig()):
    """Maximise the bi-normal Youden index over unit-norm directions.

    Returns (beta, c, J)."""
    m = len(mu0)

    def neg_j(theta):
        nrm = np.linalg.norm(theta)
        if nrm < 1e-12:
            return _PENALTY
        r = binormal_youden(theta / nrm, mu0, S0, mu1, S1)
        return _PENALTY if r is None else -r[0]

    theta, f = nelder_mead(neg_j, np.ones(m), opt)
    beta = theta / np.linalg.norm(theta)
    r = binormal_youden(beta, mu0, S0, mu1, S1)
    if r is None:
        return beta, float("nan"), float("nan")
    return beta, r[1], r[0]


def mvn_fit(X, y, opt: OptimizerConfig = OptimizerConfig()) -> LinearCombiner:
    X = np.asarray(X, dtype=float)
    y = check_labels(y)
    ridge = 1e-8 * np.eye(X.shape[1])
    mu1, mu0 = X[y == 1].mean(axis=0), X[y == -1].mean(axis=0)
    S1 = np.atleast_2d(np.cov(X[y == 1], rowvar=False)) + ridge
    S0 = np.atleast_2d(np.cov(X[y == -1], rowvar=False)) + ridge
    beta, c, _ = binormal_search(mu0, S0, mu1, S1, opt)
    if np.isnan(c):
        c = float(np.median(X @ beta))
    return _finish(beta, c, "mvn", X, y)


# ---------------------------------------------------------------------------
# kernel-smoothed sensitivity and specificity


def silverman_bandwidth(s) -> float:
    s = np.asarray(s, dtype=float)
    sd = np.std(s, ddof=1)
    q75, q25 = np.percentile(s, [75, 25])
    return 0.9 * min(sd, (q75 - q25) / 1.34) * len(s) ** (-0.2)


def smoothed_youden(s_pos, s_neg, c, h_pos=None, h_neg=None) -> float:
    h_pos = silverman_bandwidth(s_pos) if h_pos is None else h_pos
    h_neg = silverman_bandwidth(s_neg) if h_neg is None else h_neg
    if h_pos <= 0 or h_neg <= 0:
        return float("nan")
    sen = norm.cdf((s_pos - c) / h_pos).mean()
    spe = norm.cdf((c - s_neg) / h_neg).mean()
    return float(sen + spe - 1)


def ksm_fit(X, y, opt: OptimizerConfig = OptimizerConfig()) -> LinearCombiner:
    X = np.asarray(X, dtype=float)
    y = check_labels(y)
    if min(np.count_nonzero(y == 1), np.count_nonzero(y == -1)) < 3:
        raise ValueError("kernel smoothing needs at least 3 rows per class")
    m = X.shape[1]
    Xp, Xn = X[y == 1], X[y == -1]

    def neg_j(par):
        theta, c = par[:m], par[m]
        nrm = np.linalg.norm(theta)
        if nrm < 1e-12:
            return _PENALTY
        beta = theta / nrm
        v = smoothed_youden(Xp @ beta, Xn @ beta, c)
        return _PENALTY if not np.isfinite(v) else -v

    b0 = np.ones(m) / np.sqrt(m)
    c0 = 0.5 * ((Xp @ b0).mean() + (Xn @ b0).mean())
    par, _ = nelder_mead(neg_j, np.append(b0, c0), opt)
    beta = par[:m] / np.linalg.norm(par[:m])
    return _finish(beta, par[m], "ksm", X, y)


# ---------------------------------------------------------------------------
# logistic regression


def irls_logistic(X, y01, max_iter: int = 100, ridge: float = 1e-8, tol: float = 1e-10):
    """Newton/IRLS with intercept and step halving.  Returns (coef, converged)."""
    Z = np.column_stack([np.ones(len(X)), X])
    theta = np.zeros(Z.shape[1])

    def loglik(t):
        eta = Z @ t
        return float(y01 @ eta - np.logaddexp(0.0, eta).sum())

    ll = loglik(theta)
    for _ in range(max_iter):
        p = expit(Z @ theta)
        W = p * (1 - p)
        H = (Z * W[:, None]).T @ Z + ridge * np.eye(Z.shape[1])
        step = np.linalg.solve(H, Z.T @ (y01 - p))
        t = 1.0
        while True:
            cand = theta + t * step
            new = loglik(cand)
            if new >= ll or t < 1e-10:
                break
            t *= 0.5
        done = abs(new - ll) <= tol * (abs(ll) + tol)
        theta, ll = cand, new
        if done:
            return theta, True
    return theta, False


def lr_fit(X, y, threshold: str = "youden") -> LinearCombiner:
    """Logistic regression; cut-point by training Youden scan or at logit(pi_hat)."""
    X = np.asarray(X, dtype=float)
    y = check_labels(y)
    coef, ok = irls_logistic(X, (y == 1).astype(float))
    beta = coef[1:]
    if threshold == "youden":
        c, _ = best_threshold(X @ beta, y)
    elif threshold == "prevalence":
        pi = np.mean(y == 1)
        c = np.log(pi / (1 - pi)) - coef[0]
    else:
        raise ValueError("threshold must be 'youden' or 'prevalence'")
    return _finish(beta, c, "lr", X, y, converged=ok)


FITTERS = {
    "mmm": mmm_fit,
    "swm": swm_fit,
    "mvn": mvn_fit,
    "ksm": ksm_fit,
    "lr": lr_fit,
}
