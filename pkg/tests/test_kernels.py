"""The compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracflow import _kernels_py, kernels

compiled = pytest.importorskip("fracflow._kernels")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@given(st.integers(1, 30), st.integers(1, 20), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_history_sum(N, ns, seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(N + 1)
    hist = rng.standard_normal((N + 1, ns))
    for n in (0, 1, N):
        a, b = np.empty(ns), np.empty(ns)
        compiled.history_sum(w, hist, n, a)
        _kernels_py.history_sum(w, hist, n, b)
        ref = sum(w[k] * hist[n - k] for k in range(1, n + 1)) if n else np.zeros(ns)
        np.testing.assert_allclose(a, ref, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(b, ref, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("impl", [compiled, _kernels_py])
def test_history_sum_bounds(impl):
    w = np.ones(3)
    hist = np.zeros((3, 2))
    with pytest.raises(IndexError):
        impl.history_sum(w, hist, 3, np.empty(2))
    with pytest.raises(ValueError):
        impl.history_sum(w, hist, 1, np.empty(3))


@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 60), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_coo_to_csr(nr, nc, k, seed):
    rng = np.random.default_rng(seed)
    r = rng.integers(0, nr, k).astype(np.int64)
    c = rng.integers(0, nc, k).astype(np.int64)
    v = rng.standard_normal(k)
    a = compiled.coo_to_csr(r, c, v, nr, nc)
    b = _kernels_py.coo_to_csr(r, c, v, nr, nc)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_allclose(a[2], b[2], rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("impl", [compiled, _kernels_py])
def test_coo_to_csr_bounds(impl):
    with pytest.raises(IndexError):
        impl.coo_to_csr(np.array([0, 2]), np.array([0, 0]), np.ones(2), 2, 2)


@given(st.integers(1, 50), st.integers(1, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_gather_rowdot(P, m, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((5, m))
    b = rng.standard_normal((7, m))
    ia = rng.integers(0, 5, P).astype(np.int64)
    ib = rng.integers(0, 7, P).astype(np.int64)
    out1, out2 = np.empty(P), np.empty(P)
    compiled.gather_rowdot(a, ia, b, ib, out1)
    _kernels_py.gather_rowdot(a, ia, b, ib, out2, chunk=7)
    ref = (a[ia] * b[ib]).sum(axis=1)
    np.testing.assert_allclose(out1, ref, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(out2, ref, rtol=1e-13, atol=1e-13)
