"""Triplet assembly, CSR compression and a factor-once sparse LU."""

from __future__ import annotations

import threading

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from fracflow import kernels


class SingularMatrixError(RuntimeError):
    pass


class TripletBuffer:
    """Accumulates (row, col, value) contributions; duplicates are summed on compression."""

    def __init__(self, shape: tuple[int, int]):
        self.shape = (int(shape[0]), int(shape[1]))
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []

    def add(self, rows, cols, vals) -> None:
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("row, column and value arrays must have equal size")
        self._rows.append(rows)
        self._cols.append(cols)
        self._vals.append(vals)

    def add_blocks(self, row_dofs, col_dofs, blocks) -> None:
        """Scatter local blocks ``blocks[t, i, j]`` to (row_dofs[t, i], col_dofs[t, j])."""
        row_dofs = np.asarray(row_dofs)
        col_dofs = np.asarray(col_dofs)
        r = np.broadcast_to(row_dofs[:, :, None], blocks.shape)
        c = np.broadcast_to(col_dofs[:, None, :], blocks.shape)
        self.add(r, c, blocks)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self._rows:
            e = np.empty(0, dtype=np.int64)
            return e, e.copy(), np.empty(0)
        return np.concatenate(self._rows), np.concatenate(self._cols), np.concatenate(self._vals)

    def __len__(self) -> int:
        return sum(len(r) for r in self._rows)


def compress(t, rows: int | None = None, cols: int | None = None) -> sp.csr_matrix:
    """CSR matrix from a TripletBuffer (or (rows, cols, vals) tuple) with duplicates summed."""
    if isinstance(t, TripletBuffer):
        r, c, v = t.arrays()
        rows = t.shape[0] if rows is None else rows
        cols = t.shape[1] if cols is None else cols
    else:
        r, c, v = (np.ascontiguousarray(a) for a in t)
        r = r.astype(np.int64)
        c = c.astype(np.int64)
        v = v.astype(np.float64)
    if rows is None or cols is None:
        raise ValueError("matrix dimensions required")
    indptr, indices, data = kernels.coo_to_csr(
        np.ascontiguousarray(r), np.ascontiguousarray(c), np.ascontiguousarray(v), rows, cols
    )
    m = sp.csr_matrix((data, indices, indptr), shape=(rows, cols))
    m.has_sorted_indices = True
    return m


class Factorization:
    """Sparse LU (SuperLU, COLAMD ordering) of a fixed square matrix, reused across solves."""

    def __init__(self, matrix, pivot_tol: float = 1e-14):
        A = sp.csc_matrix(matrix)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"matrix must be square, got {A.shape}")
        self.matrix = A.tocsr()
        self.shape = A.shape
        try:
            self._lu = splu(A, permc_spec="COLAMD", options={"Equil": False})
        except RuntimeError as exc:
            raise SingularMatrixError(str(exc)) from exc
        # pivot test against the scale of the permuted rows
        row_scale = np.asarray(abs(A).max(axis=1).todense()).ravel()
        piv = np.abs(self._lu.U.diagonal())
        scale = row_scale[self._lu.perm_r.argsort()] if row_scale.size else row_scale
        if np.any(piv <= pivot_tol * np.maximum(scale, np.finfo(float).tiny)):
            raise SingularMatrixError("numerically singular matrix (tiny pivot)")
        self._lock = threading.Lock()

    @property
    def nnz_factors(self) -> int:
        return int(self._lu.L.nnz + self._lu.U.nnz)

    def solve(self, rhs) -> np.ndarray:
        b = np.asarray(rhs, dtype=np.float64)
        if b.shape[0] != self.shape[0]:
            raise ValueError(f"rhs length {b.shape[0]} does not match matrix size {self.shape[0]}")
        with self._lock:
            return self._lu.solve(b)

    def residual(self, x, rhs) -> float:
        """Relative residual ||Ax - b|| / ||b|| (absolute when b = 0)."""
        r = self.matrix @ x - rhs
        nb = np.linalg.norm(rhs)
        return float(np.linalg.norm(r) / nb) if nb > 0 else float(np.linalg.norm(r))


def factorize(matrix) -> Factorization:
    return Factorization(matrix)


def solve(f: Factorization, rhs) -> np.ndarray:
    return f.solve(rhs)
