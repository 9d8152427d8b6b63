"""Replicated simulation and train/test split studies with CSV output."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import baselines
from .estimator import TuningPlan, default_lambda_grid, fit
from .loss import LossParams
from .metrics import empirical_youden
from .simgen import TRAIN, LabeledSample, SimDesign, generate, make_rng

log = logging.getLogger(__name__)

METHODS = ("lkme", "gkme", "mmm", "mvn", "ksm", "swm", "lr")

# purpose codes beyond the data streams in simgen
_SPLIT, _FOLDS, _OPTIM = 3, 4, 5


class DataError(ValueError):
    """Unusable input data (bad CSV, labels, or split sizes)."""


@dataclass
class ExperimentConfig:
    mode: str = "sim"
    design: str = "ex1"
    data_path: str | None = None
    label_column: str = "selector"
    positive_label: str = "1"
    methods: tuple = ("lkme", "gkme", "mmm", "mvn", "ksm", "swm", "lr")
    n_train: int = 500
    n_test: int = 2000
    train_fraction: float | None = None
    replications: int = 100
    seed: int = 0
    lambda_grid: tuple | None = None
    delta: float = 0.1
    k_folds: int = 5
    copula: str = "direct"
    n_jobs: int = 1
    output: str | None = None
    standardize: bool | None = None  # None: on for data mode, off for simulations

    def __post_init__(self):
        if self.mode not in ("sim", "data"):
            raise ValueError("mode must be 'sim' or 'data'")
        self.methods = tuple(m.lower() for m in self.methods)
        if not self.methods:
            raise ValueError("at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.train_fraction is not None and not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.mode == "data" and not self.data_path:
            raise ValueError("data mode needs a data path")
        if self.standardize is None:
            self.standardize = self.mode == "data"

    def grid(self) -> np.ndarray:
        return default_lambda_grid() if self.lambda_grid is None else np.asarray(self.lambda_grid, dtype=float)


@dataclass
class ExperimentResult:
    methods: tuple
    n_train: int
    records: list = field(default_factory=list)  # (method, replication, youden or nan, error)

    def values(self, method: str) -> np.ndarray:
        return np.array([r[2] for r in self.records if r[0] == method and not np.isnan(r[2])])

    def summary(self) -> list[tuple[str, int, float, float]]:
        """(method, n_train, mean, standard error of the mean) per method."""
        out = []
        for m in self.methods:
            v = self.values(m)
            mean = float(v.mean()) if len(v) else float("nan")
            se = float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else float("nan")
            out.append((m, self.n_train, mean, se))
        return out

    def mean(self, method: str) -> float:
        return dict((s[0], s[2]) for s in self.summary())[method]


# ---------------------------------------------------------------------------


def _seed_from(seed, rep, purpose) -> int:
    return int(make_rng(seed, rep, purpose).integers(2**63 - 1))


def fit_method(name: str, X, y, cfg: ExperimentConfig, rep: int):
    """Fit one method; returns an object with ``score`` and ``c``."""
    if name in ("lkme", "gkme"):
        plan = TuningPlan(lambda_grid=cfg.grid(), k_folds=cfg.k_folds, seed=_seed_from(cfg.seed, rep, _FOLDS))
        return fit(X, y, "linear" if name == "lkme" else "gaussian", plan, LossParams(cfg.delta))
    opt = baselines.OptimizerConfig(seed=_seed_from(cfg.seed, rep, _OPTIM))
    if name in ("mvn", "ksm"):
        return baselines.FITTERS[name](X, y, opt)
    return baselines.FITTERS[name](X, y)


def standardize_split(train: LabeledSample, test: LabeledSample):
    """Center and scale both samples by the training mean and standard deviation."""
    mu = train.X.mean(axis=0)
    sd = train.X.std(axis=0, ddof=1) if len(train.y) > 1 else np.ones(train.X.shape[1])
    sd = np.where(sd > 0, sd, 1.0)
    return LabeledSample((train.X - mu) / sd, train.y), LabeledSample((test.X - mu) / sd, test.y)


def _one_replication(cfg: ExperimentConfig, rep: int, train: LabeledSample, test: LabeledSample):
    if cfg.standardize:
        train, test = standardize_split(train, test)
    rows = []
    for m in cfg.methods:
        try:
            model = fit_method(m, train.X, train.y, cfg, rep)
            j = empirical_youden(model.score(test.X), test.y, model.c)
            rows.append((m, rep, float(j), ""))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            log.warning("replication %d, method %s failed: %s", rep, m, exc)
            rows.append((m, rep, float("nan"), f"{type(exc).__name__}: {exc}"))
    return rows


def _sim_replication(cfg: ExperimentConfig, rep: int):
    design = SimDesign(cfg.design, cfg.n_train, cfg.n_test, cfg.copula)
    train, test = generate(design, make_rng(cfg.seed, rep, TRAIN))
    return _one_replication(cfg, rep, train, test)


def _run(cfg, worker, n_train, *args) -> ExperimentResult:
    reps = range(cfg.replications)
    if cfg.n_jobs == 1:
        chunks = [worker(cfg, r, *args) for r in reps]
    else:
        chunks = Parallel(n_jobs=cfg.n_jobs)(delayed(worker)(cfg, r, *args) for r in reps)
    res = ExperimentResult(methods=cfg.methods, n_train=n_train)
    for rows in chunks:  # Parallel preserves input order
        res.records.extend(rows)
    if cfg.output:
        emit_results(res, cfg.output)
    return res


def run_sim(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.mode != "sim":
        raise ValueError("run_sim needs mode='sim'")
    return _run(cfg, _sim_replication, cfg.n_train)


def split_sizes(n: int, cfg: ExperimentConfig) -> tuple[int, int]:
    if cfg.train_fraction is not None:
        n_tr = int(round(cfg.train_fraction * n))
        n_te = n - n_tr
    else:
        n_tr = cfg.n_train
        n_te = min(cfg.n_test, n - n_tr)
    if n_tr < 2 or n_te < 2:
        raise DataError(f"cannot split {n} rows into train={n_tr} and test={n_te}")
    return n_tr, n_te


def _data_replication(cfg: ExperimentConfig, rep: int, data: LabeledSample, n_tr: int, n_te: int):
    perm = make_rng(cfg.seed, rep, _SPLIT).permutation(len(data.y))
    tr, te = perm[:n_tr], perm[n_tr:n_tr + n_te]
    return _one_replication(cfg, rep, LabeledSample(data.X[tr], data.y[tr]), LabeledSample(data.X[te], data.y[te]))


def run_data(cfg: ExperimentConfig, data: LabeledSample | None = None) -> ExperimentResult:
    """Repeated simple random train/test splits of a real dataset."""
    if cfg.mode != "data":
        raise ValueError("run_data needs mode='data'")
    if data is None:
        data = ingest_csv(cfg.data_path, cfg.label_column, cfg.positive_label)
    n_tr, n_te = split_sizes(len(data.y), cfg)
    return _run(cfg, _data_replication, n_tr, data, n_tr, n_te)


# ---------------------------------------------------------------------------
# CSV in / out


def _label_matches(value: str, positive) -> bool:
    try:
        return float(value) == float(positive)
    except ValueError:
        return value.strip() == str(positive).strip()


def ingest_csv(path, label_column: str, positive_label="1", columns=None) -> LabeledSample:
    """Read a header + numeric CSV; ``positive_label`` rows become +1, the rest -1."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: no label column {label_column!r} in header {header}")
        li = header.index(label_column)
        cols = [i for i, h in enumerate(header) if i != li] if columns is None else [header.index(c) for c in columns]
        X, labels, missing = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for i in cols:
                cell = row[i].strip()
                if cell == "" or cell.upper() in ("NA", "NAN"):
                    missing.append(f"line {lineno} column {header[i]}")
                    vals.append(np.nan)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(f"{path}:{lineno}: non-numeric value {cell!r} in column {header[i]}") from None
            if row[li].strip().upper() in ("", "NA", "NAN"):
                missing.append(f"line {lineno} column {label_column}")
            X.append(vals)
            labels.append(row[li].strip())
    if missing:
        raise DataError(f"{path}: missing values at " + "; ".join(missing))
    if not X:
        raise DataError(f"{path}: no data rows")
    if len(set(labels)) > 2:
        raise DataError(f"{path}: label column {label_column!r} is not binary: {sorted(set(labels))}")
    y = np.array([1 if _label_matches(v, positive_label) else -1 for v in labels])
    return LabeledSample(np.array(X, dtype=float), y)


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else f"{v:.6f}"


def emit_results(res: ExperimentResult, path) -> tuple[Path, Path]:
    """Write ``summary.csv`` and ``replications.csv`` into directory ``path``."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary, longf = out / "summary.csv", out / "replications.csv"
        with open(summary, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "n_train", "mean_youden", "sd"])
            if res.records:
                for m, n, mean, sd in res.summary():
                    w.writerow([m, n, _fmt(mean), _fmt(sd)])
        with open(longf, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "replication", "youden", "error"])
            for m, r, j, err in sorted(res.records, key=lambda t: (res.methods.index(t[0]), t[1])):
                w.writerow([m, r, _fmt(j), err])
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return summary, longf
