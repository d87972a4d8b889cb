# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Signatures mirror ``fracflow._kernels_py``."""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()


def history_sum(const double[::1] weights, const double[:, ::1] hist,
                Py_ssize_t n, double[::1] out):
    """out[:] = sum_{k=1}^{n} weights[k] * hist[n - k, :], one BLAS gemv."""
    cdef int m = <int>hist.shape[1], cols = <int>n, one = 1
    cdef double alpha = 1.0, beta = 0.0
    cdef char trans = b'N'
    cdef Py_ssize_t k
    if n >= hist.shape[0] + 1 or n >= weights.shape[0]:
        raise IndexError("history index out of range")
    if out.shape[0] != m:
        raise ValueError("output length mismatch")
    if n == 0 or m == 0:
        out[:] = 0.0
        return np.asarray(out)
    # row-major hist[:n] is the column-major m x n matrix whose column j is hist[j]
    rev_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] rev = rev_arr
    for k in range(n):
        rev[k] = weights[n - k]
    with nogil:
        dgemv(&trans, &m, &cols, &alpha, <double *>&hist[0, 0], &m, &rev[0], &one, &beta, &out[0], &one)
    return np.asarray(out)


def coo_to_csr(const long[::1] rows, const long[::1] cols, const double[::1] vals,
               Py_ssize_t nrows, Py_ssize_t ncols):
    """Compress triplets to CSR; duplicates are summed, columns sorted per row."""
    cdef Py_ssize_t nnz_in = rows.shape[0]
    cdef Py_ssize_t p, r, c, start, end, q, s, nnz = 0
    cdef long key
    if cols.shape[0] != nnz_in or vals.shape[0] != nnz_in:
        raise ValueError("triplet arrays differ in length")
    for p in range(nnz_in):
        if rows[p] < 0 or rows[p] >= nrows or cols[p] < 0 or cols[p] >= ncols:
            raise IndexError(f"triplet ({rows[p]}, {cols[p]}) outside {nrows}x{ncols}")

    count_arr = np.zeros(nrows + 1, dtype=np.int64)
    order_arr = np.empty(nnz_in, dtype=np.int64)
    indptr_arr = np.zeros(nrows + 1, dtype=np.int64)
    indices_arr = np.empty(nnz_in, dtype=np.int64)
    data_arr = np.empty(nnz_in, dtype=np.float64)
    cdef long[::1] count = count_arr
    cdef long[::1] order = order_arr
    cdef long[::1] indptr = indptr_arr
    cdef long[::1] indices = indices_arr
    cdef double[::1] data = data_arr
    cdef long[::1] fill

    with nogil:
        for p in range(nnz_in):
            count[rows[p] + 1] += 1
        for r in range(nrows):
            count[r + 1] += count[r]
    fill_arr = count_arr[:nrows].copy()
    fill = fill_arr
    with nogil:
        # stable bucket by row, then insertion sort each row by column
        for p in range(nnz_in):
            r = rows[p]
            order[fill[r]] = p
            fill[r] += 1
        for r in range(nrows):
            start = count[r]
            end = count[r + 1]
            for q in range(start + 1, end):
                p = order[q]
                key = cols[p]
                s = q - 1
                while s >= start and cols[order[s]] > key:
                    order[s + 1] = order[s]
                    s -= 1
                order[s + 1] = p
            for q in range(start, end):
                p = order[q]
                c = cols[p]
                if nnz > indptr[r] and indices[nnz - 1] == c:
                    data[nnz - 1] += vals[p]
                else:
                    indices[nnz] = c
                    data[nnz] = vals[p]
                    nnz += 1
            indptr[r + 1] = nnz
    return indptr_arr, indices_arr[:nnz].copy(), data_arr[:nnz].copy()


def gather_rowdot(const double[:, ::1] a, const long[::1] ia,
                  const double[:, ::1] b, const long[::1] ib, double[::1] out):
    """out[p] = dot(a[ia[p]], b[ib[p]])."""
    cdef Py_ssize_t p, j, npts = ia.shape[0], m = a.shape[1]
    cdef long ra, rb
    cdef double s
    if ib.shape[0] != npts or out.shape[0] != npts:
        raise ValueError("index/output length mismatch")
    if b.shape[1] != m:
        raise ValueError("row length mismatch")
    for p in range(npts):
        if ia[p] < 0 or ia[p] >= a.shape[0] or ib[p] < 0 or ib[p] >= b.shape[0]:
            raise IndexError("row index out of range")
    with nogil:
        for p in range(npts):
            ra = ia[p]
            rb = ib[p]
            s = 0.0
            for j in range(m):
                s += a[ra, j] * b[rb, j]
            out[p] = s
    return np.asarray(out)
