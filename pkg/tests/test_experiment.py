import csv

import numpy as np
import pytest

from biocombine.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, parse_grid
from biocombine.experiment import (DataError, ExperimentConfig, ExperimentResult, emit_results, ingest_csv, run_data,
                                   run_sim, split_sizes)
from biocombine.simgen import LabeledSample

FAST = dict(lambda_grid=(0.01, 1.0), k_folds=3)


def write(path, text):
    path.write_text(text)
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- ingest_csv -------------------------------------------------------------


def test_ingest_toy(tmp_path):
    p = write(tmp_path / "t.csv", "a,b,lab\n1,2.5,1\n-3,4,0\n5,6e-1,1\n")
    s = ingest_csv(p, "lab")
    assert np.array_equal(s.X, [[1, 2.5], [-3, 4], [5, 0.6]])
    assert np.array_equal(s.y, [1, -1, 1])


def test_ingest_string_labels_and_columns(tmp_path):
    p = write(tmp_path / "t.csv", "cls,a,b\ncase,1,2\nctrl,3,4\n")
    s = ingest_csv(p, "cls", positive_label="ctrl", columns=["b"])
    assert np.array_equal(s.X, [[2], [4]]) and np.array_equal(s.y, [-1, 1])


@pytest.mark.parametrize("text,needle", [
    ("a,lab\n", "no data rows"),
    ("", "empty file"),
    ("a,lab\n1,1\n,0\n2,NA\n", "line 3 column a; line 4 column lab"),
    ("a,lab\n1,1\nx,0\n", ":3: non-numeric value 'x'"),
    ("a,lab\n1,1\n2\n", ":3: expected 2 fields"),
    ("a,lab\n1,1\n2,0\n3,2\n", "not binary"),
    ("a,b\n1,1\n", "no label column"),
])
def test_ingest_errors(tmp_path, text, needle):
    p = write(tmp_path / "bad.csv", text)
    with pytest.raises(DataError, match=None) as exc:
        ingest_csv(p, "lab")
    assert needle in str(exc.value)


def test_ingest_missing_file(tmp_path):
    with pytest.raises(DataError):
        ingest_csv(tmp_path / "nope.csv", "lab")


# --- results ----------------------------------------------------------------


def test_emit_empty(tmp_path):
    s, l = emit_results(ExperimentResult(methods=("lr",), n_train=10), tmp_path)
    assert s.read_text() == "method,n_train,mean_youden,sd\n"
    assert l.read_text() == "method,replication,youden,error\n"


def test_emit_two_reps_and_reemit(tmp_path):
    res = ExperimentResult(methods=("lr",), n_train=10, records=[("lr", 0, 0.25, ""), ("lr", 1, 0.5, "")])
    s, l = emit_results(res, tmp_path / "a")
    assert len(read_rows(l)) == 3
    assert read_rows(s)[1] == ["lr", "10", "0.375000", "0.125000"]
    s2, l2 = emit_results(res, tmp_path / "b")
    assert s.read_bytes() == s2.read_bytes() and l.read_bytes() == l2.read_bytes()


def test_emit_records_failures(tmp_path):
    res = ExperimentResult(methods=("mvn", "lr"), n_train=5,
                           records=[("lr", 0, 0.1, ""), ("mvn", 0, float("nan"), "ValueError: boom")])
    _, l = emit_results(res, tmp_path)
    rows = read_rows(l)
    assert rows[1] == ["mvn", "0", "", "ValueError: boom"] and rows[2][0] == "lr"


def test_emit_unwritable(tmp_path):
    blocker = write(tmp_path / "file", "x")
    with pytest.raises(OSError, match="cannot write results"):
        emit_results(ExperimentResult(methods=("lr",), n_train=1), blocker / "sub")


def test_summary_recomputes_from_long_file(tmp_path):
    cfg = ExperimentConfig(design="ex1", methods=("mvn", "lr"), n_train=80, n_test=200, replications=4,
                           seed=3, output=str(tmp_path), **FAST)
    res = run_sim(cfg)
    vals = {m: np.array([r[2] for r in res.records if r[0] == m]) for m in cfg.methods}
    for m, n, mean, se in res.summary():
        assert abs(mean - vals[m].mean()) < 1e-9
        assert abs(se - vals[m].std(ddof=1) / 2) < 1e-9
    long_rows = read_rows(tmp_path / "replications.csv")[1:]
    summ = {r[0]: r for r in read_rows(tmp_path / "summary.csv")[1:]}
    for m in cfg.methods:
        v = np.array([float(r[2]) for r in long_rows if r[0] == m])
        # the files hold 6 decimals, so agreement is limited to rounding
        assert abs(float(summ[m][2]) - v.mean()) < 1e-6
        assert abs(float(summ[m][3]) - v.std(ddof=1) / 2) < 1e-6
    assert all(-1 <= r[2] <= 1 for r in res.records)


# --- runs ---------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(methods=())
    with pytest.raises(ValueError):
        ExperimentConfig(methods=("svm",))
    with pytest.raises(ValueError):
        ExperimentConfig(replications=0)
    with pytest.raises(ValueError):
        ExperimentConfig(mode="data", data_path="x", train_fraction=1.0)
    with pytest.raises(ValueError):
        ExperimentConfig(mode="data")


def test_sim_deterministic_files(tmp_path):
    kw = dict(design="ex3", methods=("lkme", "mmm"), n_train=60, n_test=100, replications=1, seed=11, **FAST)
    run_sim(ExperimentConfig(output=str(tmp_path / "a"), **kw))
    run_sim(ExperimentConfig(output=str(tmp_path / "b"), **kw))
    for f in ("summary.csv", "replications.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_sim_parallel_matches_serial():
    kw = dict(design="ex1", methods=("lkme", "lr"), n_train=60, n_test=100, replications=3, seed=5, **FAST)
    a = run_sim(ExperimentConfig(n_jobs=1, **kw))
    b = run_sim(ExperimentConfig(n_jobs=2, **kw))
    assert a.records == b.records


def toy_data(n=60, seed=0):
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 3 == 0, 1, -1)
    X = rng.normal(size=(n, 3)) + (y == 1)[:, None]
    return LabeledSample(X, y)


def test_run_data_split_sizes():
    data = toy_data()
    cfg = ExperimentConfig(mode="data", data_path="-", methods=("lr",), n_train=40, n_test=10**9, replications=2)
    assert split_sizes(60, cfg) == (40, 20)
    cfg2 = ExperimentConfig(mode="data", data_path="-", methods=("lr",), train_fraction=0.25, replications=2)
    assert split_sizes(60, cfg2) == (15, 45)
    res = run_data(cfg, data)
    assert res.n_train == 40 and len(res.records) == 2


def test_run_data_one_row_fails():
    cfg = ExperimentConfig(mode="data", data_path="-", methods=("lr",), n_train=1, replications=1)
    with pytest.raises(DataError):
        run_data(cfg, LabeledSample(np.ones((1, 2)), np.array([1])))


def test_failures_become_missing_cells():
    # 8 controls can never fill 10 folds, so the kernel fit fails while LR runs
    rng = np.random.default_rng(0)
    y = np.array([1] * 52 + [-1] * 8)
    data = LabeledSample(rng.normal(size=(60, 2)) + (y == 1)[:, None], y)
    cfg = ExperimentConfig(mode="data", data_path="-", methods=("lkme", "lr"), n_train=40, n_test=20,
                           replications=1, lambda_grid=(0.01, 1.0), k_folds=10, seed=1)
    res = run_data(cfg, data)
    by = {r[0]: r for r in res.records}
    assert np.isnan(by["lkme"][2]) and "k_folds" in by["lkme"][3]
    assert by["lr"][3] == "" and -1 <= by["lr"][2] <= 1


# --- command line -------------------------------------------------------------


def test_parse_grid():
    assert parse_grid("0.1, 1,10") == (0.1, 1.0, 10.0)
    assert np.allclose(parse_grid("-1:1:3"), (0.1, 1, 10))


def test_cli_sim(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["sim", "--design", "ex1", "--methods", "mvn,lr", "--reps", "2", "--n-train", "60",
                 "--n-test", "100", "--out", str(out)])
    assert code == EXIT_OK
    assert len(read_rows(out / "replications.csv")) == 5
    assert "mvn" in capsys.readouterr().out


def test_cli_data_and_config_file(tmp_path):
    data = toy_data(80)
    csvp = tmp_path / "d.csv"
    with open(csvp, "w") as fh:
        fh.write("a,b,c,label\n")
        for x, y in zip(data.X, data.y):
            fh.write(",".join(f"{v:.6f}" for v in x) + f",{int(y == 1)}\n")
    cfg = write(tmp_path / "run.cfg", f"# study\ndata = {csvp}\nlabel_column = label\nmethods = lr, mmm\nreps = 3\n"
                                      "n_train = 50\nseed = 9\n")
    out = tmp_path / "o"
    assert main(["data", "--config", str(cfg), "--reps", "2", "--out", str(out)]) == EXIT_OK
    rows = read_rows(out / "replications.csv")
    assert len(rows) == 1 + 2 * 2


@pytest.mark.parametrize("argv", [
    [],
    ["sim", "--design", "ex7"],
    ["sim", "--methods", "svm"],
    ["sim", "--reps", "0"],
    ["data"],
])
def test_cli_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_cli_bad_config_key(tmp_path):
    cfg = write(tmp_path / "c.cfg", "colour = blue\n")
    assert main(["sim", "--config", str(cfg)]) == EXIT_USAGE


def test_cli_data_errors(tmp_path):
    assert main(["data", "--data", str(tmp_path / "missing.csv"), "--methods", "lr"]) == EXIT_DATA
    one = write(tmp_path / "one.csv", "a,selector\n1,1\n")
    assert main(["data", "--data", str(one), "--methods", "lr"]) == EXIT_DATA


def test_standardize_split_uses_training_stats():
    from biocombine.experiment import standardize_split
    tr = LabeledSample(np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]]), np.array([1, -1, 1]))
    te = LabeledSample(np.array([[7.0, 6.0]]), np.array([1]))
    a, b = standardize_split(tr, te)
    assert np.allclose(a.X[:, 0], [-1, 0, 1]) and np.all(a.X[:, 1] == 0)
    assert np.allclose(b.X, [[2.0, 1.0]])
    assert ExperimentConfig(mode="data", data_path="x").standardize
    assert not ExperimentConfig().standardize
