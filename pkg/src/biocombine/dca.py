"""Difference-of-convex fitting of the kernel psi_delta machine.

Each outer step freezes the subgradient of L2 at the current margins and
solves the resulting convex problem

    min_{a,c}  sum_i C_i (delta - u_i)_+  -  sum_i beta_i u_i  +  (lam/2) a'Ka,
    u_i = y_i ((Ka)_i - c),   C_i = w_i / (n delta),   beta_i in {0, -C_i}

through its dual.  Writing a = (gamma * y) / lam, the dual is

    min_gamma  (1/2lam) gamma' Q gamma - delta sum(gamma)
    s.t.       y'gamma = 0,  beta_i <= gamma_i <= beta_i + C_i,

with Q = diag(y) K diag(y).  Every box contains 0, so gamma = 0 is always
feasible.  The dual is solved by SMO with second-order working-set
selection; the cut-point is then recovered by exact minimization of the
primal in c, which is piecewise linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .loss import check_labels, empirical_objective, l2_subgradient, LossParams

_TAU = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    delta: float = 0.1
    max_outer_iters: int = 50
    outer_rel_tol: float = 1e-5
    inner_rel_tol: float = 1e-6
    inner_max_iters: int = 5000

    def __post_init__(self):
        if not (self.lam > 0 and self.delta > 0):
            raise ValueError("lam and delta must be positive")
        if self.outer_rel_tol <= 0 or self.inner_rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_outer_iters < 1 or self.inner_max_iters < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class SolverState:
    a: np.ndarray
    c: float
    objective: float
    iteration: int = 0
    converged: bool = True
    inner_iters: int = 0
    history: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def _best_cut(s, y, C, beta, delta):
    """argmin_c of sum C_t (delta - y_t (s_t - c))_+ - sum beta_t y_t (s_t - c)."""
    n = s.shape[0]
    bp = s - y * delta
    slope = 0.0
    for t in range(n):
        slope += beta[t] * y[t]
        if y[t] < 0:
            slope -= C[t]
    order = np.argsort(bp, kind="mergesort")
    if slope >= 0.0:
        return bp[order[0]]
    for k in range(n):
        t = order[k]
        slope += C[t]
        if slope > 0.0:
            return bp[t]
        if slope == 0.0:
            # flat stretch up to the next breakpoint
            if k + 1 < n:
                return 0.5 * (bp[t] + bp[order[k + 1]])
            return bp[t]
    return bp[order[n - 1]]


@njit(cache=True)
def _primal(s, c, y, C, beta, delta, pen):
    """Convex surrogate value; pen = lam * a'Ka."""
    val = 0.0
    for t in range(s.shape[0]):
        u = y[t] * (s[t] - c)
        h = delta - u
        if h > 0.0:
            val += C[t] * h
        val -= beta[t] * u
    return val + 0.5 * pen


@njit(cache=True)
def _smo(K, y, lo, hi, gamma, lam, delta, C, beta, rel_tol, max_iter):
    """In-place SMO on the dual.  Returns (iterations, converged, c)."""
    n = y.shape[0]
    # s = K a with a = gamma * y / lam
    s = np.zeros(n)
    for t in range(n):
        if gamma[t] != 0.0:
            coef = gamma[t] * y[t] / lam
            for r in range(n):
                s[r] += coef * K[t, r]
    G = y * s - delta
    check_every = max(n, 50)
    it = 0
    converged = False
    while it < max_iter:
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and gamma[t] < hi[t]) or (y[t] < 0 and gamma[t] > lo[t]):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        gmin = np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and gamma[t] > lo[t]) or (y[t] < 0 and gamma[t] < hi[t]):
                v = -y[t] * G[t]
                if v < gmin:
                    gmin = v
                b = gmax - v
                if b > 0.0 and i >= 0:
                    curv = (K[i, i] + K[t, t] - 2.0 * K[i, t]) / lam
                    if curv <= 0.0:
                        curv = _TAU
                    o = -b * b / curv
                    if o < best:
                        best = o
                        j = t
        if i < 0 or j < 0 or gmax - gmin < 1e-12 * max(1.0, delta):
            converged = True
            break
        if it % check_every == 0 and it > 0:
            aka = 0.0
            dsum = 0.0
            for t in range(n):
                aka += gamma[t] * y[t] * s[t] / lam
                dsum += gamma[t] - beta[t]
            c = _best_cut(s, y, C, beta, delta)
            p = _primal(s, c, y, C, beta, delta, lam * aka)
            d = delta * dsum - 0.5 * lam * aka
            if p - d <= rel_tol * max(abs(p), 1e-12):
                converged = True
                break
        b = gmax + y[j] * G[j]
        curv = (K[i, i] + K[j, j] - 2.0 * K[i, j]) / lam
        if curv <= 0.0:
            curv = _TAU
        step = b / curv
        if y[i] > 0:
            lim = hi[i] - gamma[i]
        else:
            lim = gamma[i] - lo[i]
        if lim < step:
            step = lim
        if y[j] > 0:
            lim = gamma[j] - lo[j]
        else:
            lim = hi[j] - gamma[j]
        if lim < step:
            step = lim
        gamma[i] += y[i] * step
        gamma[j] -= y[j] * step
        # a changes by step * (e_i - e_j) / lam
        for r in range(n):
            ds = step * (K[i, r] - K[j, r]) / lam
            s[r] += ds
            G[r] += y[r] * ds
        it += 1
    c = _best_cut(s, y, C, beta, delta)
    return it, converged, c


# ---------------------------------------------------------------------------


def _project_dual(gamma, y, lo, hi):
    """Clip into the box, then shrink toward 0 until y'gamma = 0."""
    g = np.clip(gamma, lo, hi)
    r = float(y @ g)
    if r != 0.0:
        contrib = y * g
        mask = np.sign(contrib) == np.sign(r)
        tot = contrib[mask].sum()
        g[mask] *= 1.0 - r / tot
    return g


def surrogate_value(a, c, K, y, weights, beta, lam, delta) -> float:
    """Convex majorant of the objective built from frozen coefficients beta."""
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    Ka = np.asarray(K) @ a
    u = y * (Ka - c)
    C = np.asarray(weights, dtype=float) / (n * delta)
    return float(C @ np.maximum(delta - u, 0.0) - np.asarray(beta) @ u + 0.5 * lam * (a @ Ka))


def solve_convex_subproblem(K, y, weights, beta, cfg: SolverConfig, warm_start: SolverState | None = None) -> SolverState:
    K = np.ascontiguousarray(K, dtype=float)
    y = check_labels(y)
    w = np.asarray(weights, dtype=float)
    beta = np.asarray(beta, dtype=float)
    n = len(y)
    lam, delta = cfg.lam, cfg.delta
    C = w / (n * delta)
    if np.any(beta > 1e-15) or np.any(beta < -C * (1 + 1e-12)):
        raise ValueError("beta must lie in [-C_i, 0]")
    lo, hi = beta, beta + C

    if warm_start is None:
        a0, c0 = np.zeros(n), 0.0
    else:
        a0, c0 = np.asarray(warm_start.a, dtype=float), float(warm_start.c)
    gamma = _project_dual(lam * a0 * y, y, lo, hi)

    iters, converged, c = _smo(K, y, lo, hi, gamma, lam, delta, C, beta, cfg.inner_rel_tol, cfg.inner_max_iters)
    a = gamma * y / lam
    val = surrogate_value(a, c, K, y, w, beta, lam, delta)
    start_val = surrogate_value(a0, c0, K, y, w, beta, lam, delta)
    if val > start_val:
        a, c, val = a0.copy(), c0, start_val
    return SolverState(a=a, c=float(c), objective=val, converged=bool(converged), inner_iters=int(iters))


def dca_fit(K, y, weights, cfg: SolverConfig) -> SolverState:
    """Run DCA from a = 0, c = 0; objective history is non-increasing."""
    K = np.ascontiguousarray(K, dtype=float)
    y = check_labels(y)
    w = np.asarray(weights, dtype=float)
    n = len(y)
    if K.shape != (n, n):
        raise ValueError("Gram matrix shape does not match labels")
    params = LossParams(cfg.delta)

    state = SolverState(a=np.zeros(n), c=0.0, objective=empirical_objective(np.zeros(n), 0.0, K, y, w, cfg.lam, cfg.delta))
    state.history = [state.objective]
    all_converged = True
    total_inner = 0
    for it in range(1, cfg.max_outer_iters + 1):
        u = y * (K @ state.a - state.c)
        beta = w * l2_subgradient(u, params) / n
        sub = solve_convex_subproblem(K, y, w, beta, cfg, warm_start=state)
        all_converged &= sub.converged
        total_inner += sub.inner_iters
        obj = empirical_objective(sub.a, sub.c, K, y, w, cfg.lam, cfg.delta)
        if obj > state.objective:
            # majorization guarantees descent up to rounding; keep the old iterate
            break
        rel = (state.objective - obj) / max(abs(state.objective), 1e-300)
        state = SolverState(a=sub.a, c=sub.c, objective=obj, iteration=it, history=state.history + [obj])
        if rel < cfg.outer_rel_tol:
            break
    state.converged = all_converged
    state.inner_iters = total_inner
    return state
