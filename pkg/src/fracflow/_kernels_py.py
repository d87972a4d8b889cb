"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

import numpy as np


def history_sum(weights, hist, n, out):
    if n >= hist.shape[0] + 1 or n >= weights.shape[0]:
        raise IndexError("history index out of range")
    if out.shape[0] != hist.shape[1]:
        raise ValueError("output length mismatch")
    if n == 0:
        out[:] = 0.0
    else:
        np.dot(weights[n:0:-1], hist[:n], out=out)
    return out


def coo_to_csr(rows, cols, vals, nrows, ncols):
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("triplet arrays differ in length")
    bad = (rows < 0) | (rows >= nrows) | (cols < 0) | (cols >= ncols)
    if np.any(bad):
        p = int(np.flatnonzero(bad)[0])
        raise IndexError(f"triplet ({rows[p]}, {cols[p]}) outside {nrows}x{ncols}")
    order = np.lexsort((cols, rows))
    r, c, v = rows[order], cols[order], vals[order]
    if r.size:
        new = np.ones(r.size, dtype=bool)
        new[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        starts = np.flatnonzero(new)
        data = np.add.reduceat(v, starts)
        r, c = r[starts], c[starts]
    else:
        data = v
    indptr = np.zeros(nrows + 1, dtype=np.int64)
    np.add.at(indptr, r + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, c.copy(), data


def gather_rowdot(a, ia, b, ib, out, chunk=1 << 15):
    if ib.shape[0] != ia.shape[0] or out.shape[0] != ia.shape[0]:
        raise ValueError("index/output length mismatch")
    if b.shape[1] != a.shape[1]:
        raise ValueError("row length mismatch")
    for s in range(0, ia.shape[0], chunk):
        sl = slice(s, s + chunk)
        out[sl] = np.einsum("pm,pm->p", a[ia[sl]], b[ib[sl]])
    return out
