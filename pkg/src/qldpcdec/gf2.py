"""Sparse binary linear algebra over GF(2).

Bit vectors are plain 1-D numpy arrays with values in {0, 1} (dtype uint8).
Matrices are stored sparsely as per-row column supports; elimination-style
operations (rank, solve, membership) work on a dense uint8 copy, which is
the right trade-off for the code sizes handled here (n of order 10^2).
"""

from __future__ import annotations

import numpy as np


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class SingularMatrixError(ValueError):
    """A square system had no unique solution over GF(2)."""


def as_bits(v, length=None):
    """Coerce *v* to a uint8 0/1 vector, checking the expected length."""
    arr = np.asarray(v, dtype=np.uint8) & 1
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D bit vector, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"expected length {length}, got {arr.shape[0]}")
    return arr


def support_to_bits(support, length):
    v = np.zeros(length, dtype=np.uint8)
    v[list(support)] = 1
    return v


class SparseBitMatrix:
    """Binary matrix stored as sorted column-index lists, one per row.

    The sparse form is canonical; a dense uint8 copy is built lazily and
    cached for matrix-vector products and elimination.
    """

    def __init__(self, rows, cols, row_support):
        if rows < 0 or cols < 0:
            raise DimensionError("negative matrix dimension")
        if len(row_support) != rows:
            raise DimensionError(f"expected {rows} rows, got {len(row_support)}")
        self.rows = rows
        self.cols = cols
        self.row_support = []
        for i, sup in enumerate(row_support):
            arr = np.asarray(sorted(set(int(c) for c in sup)), dtype=np.int32)
            if len(arr) != len(list(sup)):
                raise ValueError(f"row {i} has duplicate column indices")
            if arr.size and (arr[0] < 0 or arr[-1] >= cols):
                raise DimensionError(f"row {i} has column index out of range")
            self.row_support.append(arr)
        self._dense = None

    @classmethod
    def from_dense(cls, M):
        M = np.asarray(M, dtype=np.uint8) & 1
        if M.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got shape {M.shape}")
        return cls(M.shape[0], M.shape[1], [np.nonzero(r)[0] for r in M])

    def to_dense(self):
        if self._dense is None:
            D = np.zeros((self.rows, self.cols), dtype=np.uint8)
            for i, sup in enumerate(self.row_support):
                D[i, sup] = 1
            self._dense = D
        return self._dense

    def transpose(self):
        return SparseBitMatrix.from_dense(self.to_dense().T)

    def max_column_weight(self):
        if self.cols == 0:
            return 0
        return int(self.to_dense().sum(axis=0, dtype=np.int64).max())

    def __eq__(self, other):
        if not isinstance(other, SparseBitMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and all(np.array_equal(a, b) for a, b in zip(self.row_support, other.row_support))
        )

    def __repr__(self):
        return f"SparseBitMatrix({self.rows}x{self.cols})"


def mat_vec(M: SparseBitMatrix, v) -> np.ndarray:
    """GF(2) product M @ v; result[i] is the parity of row i's overlap with v."""
    v = as_bits(v, M.cols)
    # int32 accumulate keeps numpy from overflowing uint8 on wide rows
    prod = M.to_dense().astype(np.int32) @ v.astype(np.int32)
    return (prod & 1).astype(np.uint8)


def _eliminate(A):
    """In-place forward elimination; returns pivot column list."""
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r >= m:
            break
        hits = np.nonzero(A[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        below = np.nonzero(A[:, c])[0]
        below = below[below != r]
        if below.size:
            A[below] ^= A[r]
        pivots.append(c)
        r += 1
    return pivots


def rank(M: SparseBitMatrix) -> int:
    """GF(2) row rank."""
    A = M.to_dense().copy()
    return len(_eliminate(A))


def rref(A):
    """Reduced row echelon form of a dense uint8 matrix.

    Returns (R, pivot_cols). Pivot columns are chosen scanning left to
    right, so callers control the elimination order via column order.
    """
    R = (np.asarray(A, dtype=np.uint8) & 1).copy()
    pivots = _eliminate(R)
    return R, pivots


def solve_square(M: SparseBitMatrix, b) -> np.ndarray:
    """Solve M x = b for square, full-rank M over GF(2)."""
    if M.rows != M.cols:
        raise DimensionError(f"matrix is {M.rows}x{M.cols}, not square")
    b = as_bits(b, M.rows)
    aug = np.concatenate([M.to_dense().copy(), b[:, None]], axis=1)
    pivots = _eliminate(aug)
    if len(pivots) != M.rows or pivots != list(range(M.rows)):
        raise SingularMatrixError("matrix is singular over GF(2)")
    return aug[:, -1].copy()


class RowSpace:
    """Cached row-echelon form of a matrix for repeated membership tests.

    Built once, read-only afterwards; safe to share across threads.
    """

    def __init__(self, M: SparseBitMatrix):
        ech, pivots = rref(M.to_dense())
        self._ech = ech[: len(pivots)]
        self._pivots = np.asarray(pivots, dtype=np.int64)
        self.ncols = M.cols
        self.rank = len(pivots)

    def contains(self, v) -> bool:
        v = as_bits(v, self.ncols).copy()
        for row, c in zip(self._ech, self._pivots):
            if v[c]:
                v ^= row
        return not v.any()


def in_row_space(M: SparseBitMatrix, v) -> bool:
    """True iff v is a GF(2) combination of the rows of M.

    One-shot form; callers testing many vectors against the same matrix
    should build a RowSpace once instead.
    """
    return RowSpace(M).contains(v)
