"""Kernel functions, Gram matrices and the cross-class median heuristic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

KINDS = ("linear", "polynomial", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "linear"
    degree: int = 2
    tau2: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise ValueError("polynomial degree must be an integer >= 1")
        if self.kind == "gaussian" and not (np.isfinite(self.tau2) and self.tau2 > 0):
            raise ValueError("gaussian tau2 must be a positive finite number")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls("linear")

    @classmethod
    def polynomial(cls, degree: int) -> "KernelSpec":
        return cls("polynomial", degree=int(degree))

    @classmethod
    def gaussian(cls, tau2: float) -> "KernelSpec":
        return cls("gaussian", tau2=float(tau2))


def _as_matrix(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def kernel_eval(spec: KernelSpec, u, v) -> float:
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite kernel argument")
    return float(cross_gram(spec, u[None, :], v[None, :])[0, 0])


def cross_gram(spec: KernelSpec, A, B) -> np.ndarray:
    """K(a_i, b_j) for every row pair; shape (len(A), len(B))."""
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]} columns")
    if spec.kind == "gaussian":
        d2 = cdist(A, B, "sqeuclidean")
        return np.exp(-d2 / (2.0 * spec.tau2))
    inner = A @ B.T
    if spec.kind == "linear":
        return inner
    return (1.0 + inner) ** spec.degree


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    X = _as_matrix(X)
    K = cross_gram(spec, X, X)
    # exact symmetry; matmul does not guarantee it bitwise
    K = 0.5 * (K + K.T)
    if spec.kind == "gaussian":
        np.fill_diagonal(K, 1.0)
    return K


def is_psd(K, rtol: float = 1e-8) -> bool:
    w = np.linalg.eigvalsh(np.asarray(K, dtype=float))
    return bool(w[0] >= -rtol * max(abs(w[-1]), 1e-300))


def median_heuristic_tau2(X, y) -> float:
    """Median Euclidean distance between positive and negative rows.

    The value is used directly as tau2 (a distance, not a squared distance).
    """
    X = _as_matrix(X)
    y = np.asarray(y).ravel()
    pos, neg = X[y == 1], X[y == -1]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("median heuristic needs both classes")
    med = float(np.median(cdist(pos, neg, "euclidean")))
    if med <= 0:
        # all cross-class pairs coincide; any positive scale is equivalent
        return 1.0
    return med
