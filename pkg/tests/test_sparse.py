import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fracflow.sparse import Factorization, SingularMatrixError, TripletBuffer, compress, factorize, solve


def test_duplicates_summed():
    t = TripletBuffer((2, 2))
    t.add([0, 0], [0, 0], [1.0, 2.0])
    m = compress(t)
    assert m.nnz == 1 and m[0, 0] == 3.0


def test_empty_buffer():
    m = compress(TripletBuffer((3, 4)))
    assert m.shape == (3, 4) and m.nnz == 0


def test_permutation():
    m = compress(([0, 1, 2], [2, 0, 1], [1.0, 1.0, 1.0]), 3, 3).toarray()
    assert np.array_equal(m.sum(axis=1), np.ones(3))
    assert np.array_equal(m.sum(axis=0), np.ones(3))


def test_add_blocks_and_errors():
    t = TripletBuffer((3, 3))
    t.add_blocks(np.array([[0, 1], [1, 2]]), np.array([[0, 1], [1, 2]]), np.ones((2, 2, 2)))
    dense = compress(t).toarray()
    np.testing.assert_array_equal(dense, [[1, 1, 0], [1, 2, 1], [0, 1, 1]])
    assert len(t) == 8
    with pytest.raises(ValueError):
        t.add([0], [0, 1], [1.0])
    with pytest.raises(IndexError):
        compress(([5], [0], [1.0]), 3, 3)
    with pytest.raises(ValueError):
        compress(([0], [0], [1.0]))


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 80), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_compress_matches_scipy(nr, nc, k, seed):
    rng = np.random.default_rng(seed)
    r, c, v = rng.integers(0, nr, k), rng.integers(0, nc, k), rng.standard_normal(k)
    ours = compress((r, c, v), nr, nc)
    ref = sp.coo_matrix((v, (r, c)), shape=(nr, nc)).toarray()
    np.testing.assert_allclose(ours.toarray(), ref, atol=1e-14)
    assert np.all(np.diff(ours.indptr) >= 0)
    for i in range(nr):
        cols = ours.indices[ours.indptr[i] : ours.indptr[i + 1]]
        assert np.all(np.diff(cols) > 0)


def test_solve_small():
    f = factorize(sp.identity(4))
    e1 = np.eye(4)[0]
    assert np.array_equal(solve(f, e1), e1)
    assert np.array_equal(f.solve(np.zeros(4)), np.zeros(4))
    x = factorize(sp.csr_matrix([[1.0, 1.0], [1.0, 0.0]])).solve([2.0, 1.0])
    np.testing.assert_allclose(x, [1.0, 1.0])


def test_random_diagonally_dominant(rng):
    A = rng.standard_normal((50, 50))
    A += np.diag(np.abs(A).sum(axis=1) + 1)
    b = rng.standard_normal(50)
    x = factorize(sp.csr_matrix(A)).solve(b)
    ref = np.linalg.solve(A, b)
    assert np.linalg.norm(x - ref) <= 1e-12 * np.linalg.norm(ref)


def test_factor_once_reuse(rng):
    A = sp.random(40, 40, density=0.1, random_state=1) + 5 * sp.identity(40)
    f = Factorization(A)
    for _ in range(100):
        b = rng.standard_normal(40)
        assert np.array_equal(f.solve(b), Factorization(A).solve(b))


def test_singular_detection():
    with pytest.raises(SingularMatrixError):
        Factorization(sp.csr_matrix([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularMatrixError):
        Factorization(sp.csr_matrix((3, 3)))
    with pytest.raises(ValueError):
        Factorization(sp.csr_matrix((2, 3)))
    with pytest.raises(ValueError):
        factorize(sp.identity(3)).solve(np.ones(2))


def test_residual():
    f = factorize(sp.diags([2.0, 4.0]).tocsr())
    b = np.array([2.0, 4.0])
    assert f.residual(f.solve(b), b) == 0.0
    assert f.residual(np.zeros(2), np.zeros(2)) == 0.0
