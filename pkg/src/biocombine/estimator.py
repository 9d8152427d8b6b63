"""Kernel machine estimator with cross-validated regularization."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dca import SolverConfig, dca_fit
from .kernels import KernelSpec, cross_gram, gram_matrix, median_heuristic_tau2
from .loss import LossParams, check_labels, class_weights
from .metrics import fold_youden


def default_lambda_grid() -> np.ndarray:
    s = np.arange(1, 82)
    return 10.0 ** ((s - 41) / 10.0)


@dataclass
class TuningPlan:
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    k_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        g = np.asarray(self.lambda_grid, dtype=float).ravel()
        if len(g) == 0 or np.any(g <= 0) or np.any(np.diff(g) <= 0):
            raise ValueError("lambda grid must be non-empty, positive and strictly increasing")
        if self.k_folds < 2:
            raise ValueError("k_folds must be at least 2")
        self.lambda_grid = g


@dataclass
class FittedCombiner:
    train_X: np.ndarray
    a: np.ndarray
    c: float
    kernel: KernelSpec
    lam: float
    delta: float
    cv_youden: float = float("nan")
    cv_table: np.ndarray | None = None
    fold_ids: np.ndarray | None = None
    converged: bool = True

    def score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.train_X.shape[1]:
            raise ValueError(f"expected {self.train_X.shape[1]} markers, got {X.shape[1]}")
        s = cross_gram(self.kernel, X, self.train_X) @ self.a
        return float(s[0]) if single else s

    def classify(self, X):
        s = self.score(X)
        out = np.where(np.asarray(s) - self.c >= 0, 1, -1)
        return int(out) if np.ndim(s) == 0 else out

    def save(self, path) -> None:
        save_model(self, path)


def resolve_kernel(kernel, X, y) -> KernelSpec:
    """Accept a KernelSpec or a name; 'gaussian' gets tau2 from the median heuristic."""
    if isinstance(kernel, KernelSpec):
        return kernel
    if kernel == "linear":
        return KernelSpec.linear()
    if kernel == "gaussian":
        return KernelSpec.gaussian(median_heuristic_tau2(X, y))
    if isinstance(kernel, str) and kernel.startswith("poly"):
        deg = int(kernel[len("poly"):] or 2)
        return KernelSpec.polynomial(deg)
    raise ValueError(f"unknown kernel {kernel!r}")


def stratified_folds(y, k: int, seed: int) -> np.ndarray:
    """Fold index per sample; each class is shuffled and dealt round-robin."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    folds = np.empty(len(y), dtype=int)
    for cls in (1, -1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = np.arange(len(idx)) % k
    return folds


def cv_table(K, y, fold_ids, lambda_grid, delta, solver_kw=None) -> np.ndarray:
    """Validation criterion for every (lambda, fold) pair, shape (len(grid), k)."""
    solver_kw = solver_kw or {}
    k = int(fold_ids.max()) + 1
    out = np.empty((len(lambda_grid), k))
    for f in range(k):
        tr = np.flatnonzero(fold_ids != f)
        va = np.flatnonzero(fold_ids == f)
        K_tr = np.ascontiguousarray(K[np.ix_(tr, tr)])
        K_va = K[np.ix_(va, tr)]
        w = class_weights(y[tr])
        for li, lam in enumerate(lambda_grid):
            st = dca_fit(K_tr, y[tr], w, SolverConfig(lam=float(lam), delta=delta, **solver_kw))
            out[li, f] = fold_youden(K_va @ st.a, y[va], st.c)
    return out


def fit(X, y, kernel="linear", plan: TuningPlan | None = None, loss: LossParams | None = None,
        solver_kw: dict | None = None) -> FittedCombiner:
    """Select lambda by stratified k-fold CV, then refit on all rows."""
    X = np.asarray(X, dtype=float)
    y = check_labels(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError("X must be n x m with one label per row")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    plan = plan or TuningPlan()
    loss = loss or LossParams()
    solver_kw = solver_kw or {}
    spec = resolve_kernel(kernel, X, y)
    K = gram_matrix(spec, X)

    grid = plan.lambda_grid
    table = None
    folds = None
    if len(grid) == 1:
        lam, best = float(grid[0]), float("nan")
    else:
        minority = min(np.count_nonzero(y == 1), np.count_nonzero(y == -1))
        if minority < plan.k_folds:
            raise ValueError(f"smallest class has {minority} rows; lower k_folds below {plan.k_folds}")
        folds = stratified_folds(y, plan.k_folds, plan.seed)
        table = cv_table(K, y, folds, grid, loss.delta, solver_kw)
        means = table.mean(axis=1)
        i = int(np.argmax(means))  # first maximiser = smallest lambda
        lam, best = float(grid[i]), float(means[i])

    st = dca_fit(K, y, class_weights(y), SolverConfig(lam=lam, delta=loss.delta, **solver_kw))
    return FittedCombiner(train_X=X.copy(), a=st.a, c=st.c, kernel=spec, lam=lam, delta=loss.delta,
                          cv_youden=best, cv_table=table, fold_ids=folds, converged=st.converged)


def score(model: FittedCombiner, x):
    return model.score(x)


def classify(model: FittedCombiner, x):
    return model.classify(x)


# ---------------------------------------------------------------------------
# plain-text model files
#
#   line 1: m n kind degree tau2 lambda delta c
#   then n lines: a_i x_i1 ... x_im


def save_model(model: FittedCombiner, path) -> None:
    n, m = model.train_X.shape
    k = model.kernel
    fmt = "%.17g"
    head = " ".join([str(m), str(n), k.kind, str(k.degree)] + [fmt % v for v in (k.tau2, model.lam, model.delta, model.c)])
    rows = np.column_stack([model.a, model.train_X])
    with open(path, "w") as fh:
        fh.write(head + "\n")
        for r in rows:
            fh.write(" ".join(fmt % v for v in r) + "\n")


def load_model(path) -> FittedCombiner:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty model file")
    head = lines[0].split()
    if len(head) != 8:
        raise ValueError(f"{path}: malformed header")
    m, n = int(head[0]), int(head[1])
    kernel = KernelSpec(head[2], degree=int(head[3]), tau2=float(head[4]))
    body = np.array([[float(t) for t in ln.split()] for ln in lines[1:1 + n]]).reshape(n, m + 1)
    return FittedCombiner(train_X=body[:, 1:], a=body[:, 0], c=float(head[7]), kernel=kernel,
                          lam=float(head[5]), delta=float(head[6]))
