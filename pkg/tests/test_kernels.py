import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from biocombine.kernels import KernelSpec, gram_matrix, is_psd, kernel_eval, median_heuristic_tau2

SPECS = [KernelSpec.linear(), KernelSpec.polynomial(2), KernelSpec.polynomial(3), KernelSpec.gaussian(0.7)]
vec = arrays(np.float64, 3, elements=st.floats(-10, 10))


def test_kernel_examples():
    assert kernel_eval(KernelSpec.linear(), [1, 0], [0, 1]) == 0
    assert kernel_eval(KernelSpec.gaussian(3.3), [1.5, -2], [1.5, -2]) == 1
    assert kernel_eval(KernelSpec.polynomial(2), [1, 1], [1, 1]) == 9


def test_kernel_errors():
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec.linear(), [1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec.linear(), [np.nan, 2], [1, 2])
    with pytest.raises(ValueError):
        KernelSpec.gaussian(0.0)
    with pytest.raises(ValueError):
        KernelSpec.polynomial(0)
    with pytest.raises(ValueError):
        KernelSpec("cubic")


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind + str(s.degree))
@given(u=vec, v=vec)
def test_symmetry(spec, u, v):
    a, b = kernel_eval(spec, u, v), kernel_eval(spec, v, u)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@given(u=vec, v=vec, tau2=st.floats(0.01, 100))
def test_gaussian_range(u, v, tau2):
    k = kernel_eval(KernelSpec.gaussian(tau2), u, v)
    assert 0 <= k <= 1
    if np.array_equal(u, v):
        assert k == 1
    elif np.sum((u - v) ** 2) / (2 * tau2) > 1e-12:
        assert k < 1


def test_gram_examples(rng):
    assert np.array_equal(gram_matrix(KernelSpec.linear(), np.eye(2)), np.eye(2))
    G = gram_matrix(KernelSpec.gaussian(2.0), rng.normal(size=(3, 4)))
    assert np.array_equal(np.diag(G), np.ones(3))
    X = rng.normal(size=(5, 3))
    X[3] = X[1]
    G = gram_matrix(KernelSpec.linear(), X)
    assert np.array_equal(G[1], G[3])
    with pytest.raises(ValueError):
        gram_matrix(KernelSpec.linear(), np.empty((0, 3)))


def test_gram_entries_match_pointwise(rng):
    X = rng.normal(size=(6, 3))
    for spec in SPECS:
        G = gram_matrix(spec, X)
        for i in range(6):
            for j in range(6):
                assert G[i, j] == pytest.approx(kernel_eval(spec, X[i], X[j]), rel=1e-12, abs=1e-12)


def test_gram_psd_random_instances(rng):
    for _ in range(100):
        n, m = rng.integers(1, 51), rng.integers(1, 9)
        X = rng.normal(scale=rng.uniform(0.1, 3), size=(n, m))
        for spec in SPECS:
            G = gram_matrix(spec, X)
            assert np.allclose(G, G.T, rtol=1e-12, atol=0)
            assert is_psd(G)


def test_median_heuristic_examples():
    assert median_heuristic_tau2([[0, 0], [3, 4]], [1, -1]) == 5
    assert median_heuristic_tau2([[0, 0], [1, 0], [3, 0], [5, 0]], [1, -1, -1, -1]) == 3
    assert median_heuristic_tau2([[0, 0], [0, 0], [2, 0]], [1, 1, -1]) == 2
    # even number of cross pairs: mean of the two middle distances
    assert median_heuristic_tau2([[0, 0], [1, 0], [4, 0]], [1, 1, -1]) == 3.5
    with pytest.raises(ValueError):
        median_heuristic_tau2([[0, 0], [1, 1]], [1, 1])


def test_median_heuristic_label_swap(rng):
    for _ in range(20):
        X = rng.normal(size=(15, 3))
        y = np.where(rng.random(15) < 0.5, 1, -1)
        y[:2] = [1, -1]
        assert median_heuristic_tau2(X, y) == median_heuristic_tau2(X, -y)
