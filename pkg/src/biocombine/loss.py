"""The psi_delta loss, its difference-of-convex split and the weighted objective.

With u = y * (g(x) - c), the loss is

    L(u) = min((delta - u)_+ / delta, 1) = L1(u) - L2(u)
    L1(u) = (delta - u)_+ / delta,   L2(u) = (-u)_+ / delta

L1 is a scaled hinge, so linearizing L2 turns each step into an SVM-type problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_DELTA = 0.1


@dataclass(frozen=True)
class LossParams:
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ValueError("delta must be positive and finite")


def _check_u(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("loss argument must be finite")
    return u


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def psi_delta(u, params: LossParams = LossParams()):
    u = _check_u(u)
    d = params.delta
    return _ret(np.clip((d - u) / d, 0.0, 1.0))


def dc_components(u, params: LossParams = LossParams()):
    u = _check_u(u)
    d = params.delta
    l1 = np.maximum(d - u, 0.0) / d
    l2 = np.maximum(-u, 0.0) / d
    return _ret(l1), _ret(l2)


def l2_subgradient(u, params: LossParams = LossParams()):
    """Subgradient of L2; the kink at u = 0 takes the value 0."""
    u = _check_u(u)
    return _ret(np.where(u < 0, -1.0 / params.delta, 0.0))


def check_labels(y) -> np.ndarray:
    y = np.asarray(y).ravel()
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be +1/-1")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise ValueError("both classes (+1 and -1) must be present")
    return y.astype(float)


def class_weights(y) -> np.ndarray:
    """Inverse-prevalence weights n/|S_1| and n/|S_-1|, one per sample."""
    y = check_labels(y)
    n = len(y)
    n_pos = np.count_nonzero(y == 1)
    return np.where(y == 1, n / n_pos, n / (n - n_pos))


def margins(a, c, K, y) -> np.ndarray:
    return np.asarray(y, dtype=float) * (np.asarray(K) @ np.asarray(a, dtype=float) - c)


def empirical_objective(a, c, K, y, weights, lam: float, delta: float) -> float:
    """(1/n) sum w_i L(u_i) + (lam/2) a'Ka."""
    a = np.asarray(a, dtype=float)
    K = np.asarray(K, dtype=float)
    y = check_labels(y)
    w = np.asarray(weights, dtype=float)
    n = len(y)
    if K.shape != (n, n) or a.shape != (n,) or w.shape != (n,):
        raise ValueError("dimension mismatch between a, K, y and weights")
    Ka = K @ a
    u = y * (Ka - c)
    loss = np.clip((delta - u) / delta, 0.0, 1.0)
    return float(w @ loss / n + 0.5 * lam * (a @ Ka))
