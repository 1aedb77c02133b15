import itertools

import numpy as np
import pytest

from tgcntrack import _kernels_py, kernels


def brute_force(c):
    """(cardinality, cost) of the best matching: most admissible pairs, then cheapest."""
    n, m = c.shape
    best = (0, 0.0)
    for assign in itertools.product(range(-1, m), repeat=n):
        cols = [a for a in assign if a >= 0]
        if len(set(cols)) != len(cols):
            continue
        if any(a >= 0 and not np.isfinite(c[i, a]) for i, a in enumerate(assign)):
            continue
        key = (len(cols), sum(c[i, a] for i, a in enumerate(assign) if a >= 0))
        if key[0] > best[0] or (key[0] == best[0] and key[1] < best[1]):
            best = key
    return best


def score(c, assign):
    pairs = [(i, j) for i, j in enumerate(assign) if j >= 0]
    assert len({j for _, j in pairs}) == len(pairs)
    return len(pairs), sum(c[i, j] for i, j in pairs)


def test_backends_listed():
    assert "python" in kernels.available_backends()
    assert kernels.BACKEND in kernels.available_backends()


def test_diagonal(backend):
    assert kernels.solve_assignment([[1.0, 2.0], [2.0, 1.0]]) == [0, 1]


def test_empty(backend):
    assert kernels.solve_assignment(np.zeros((0, 3))) == []
    assert kernels.solve_assignment(np.zeros((2, 0))) == [-1, -1]


def test_all_forbidden(backend):
    assert kernels.solve_assignment(np.full((2, 3), np.inf)) == [-1, -1]


def test_wide_and_tall(backend):
    c = np.array([[5.0, 1.0, 3.0]])
    assert kernels.solve_assignment(c) == [1]
    assert kernels.solve_assignment(c.T) == [-1, 0, -1]


def test_gated_prefers_cardinality(backend):
    # row 0 could take its cheap column, but then row 1 would go unmatched
    c = np.array([[0.0, 5.0], [0.0, np.inf]])
    assert kernels.solve_assignment(c) == [1, 0]


def test_gated_random_against_brute_force(backend):
    rng = np.random.default_rng(7)
    for _ in range(600):
        n, m = rng.integers(1, 6, size=2)
        c = rng.integers(0, 10, size=(n, m)).astype(float)
        c[rng.random((n, m)) < rng.random()] = np.inf
        assert score(c, kernels.solve_assignment(c)) == brute_force(c)


def test_backends_agree_exactly():
    impls = kernels.available_backends()
    if len(impls) < 2:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(3)
    for _ in range(300):
        n, m = rng.integers(1, 9, size=2)
        c = rng.normal(size=(n, m))
        # integer ties exercise the deterministic scan order
        t = rng.integers(0, 3, size=(n, m)).astype(float)
        for mat in (c, t):
            assert impls["cython"].solve_assignment(mat) == impls["python"].solve_assignment(mat)


def test_iou_matrix_matches_reference(backend):
    rng = np.random.default_rng(0)
    a = np.c_[rng.uniform(0, 50, (6, 2)), rng.uniform(1, 30, (6, 2))]
    b = np.c_[rng.uniform(0, 50, (4, 2)), rng.uniform(1, 30, (4, 2))]
    got = kernels.iou_matrix(a, b)
    ref = np.array(_kernels_py.iou_matrix(a, b))
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-15)
    assert kernels.iou_matrix(a[:0], b).shape == (0, 4)
