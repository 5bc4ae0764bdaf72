"""Bit-packed linear algebra over the two-element field.

Matrices are stored column-major as ``uint64`` words (see ``_kernels``); all
elimination work is delegated to the selected kernel backend.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


def words_for(nbits: int) -> int:
    return max(1, (nbits + 63) // 64)


def pack_from_pairs(col_ids, row_ids, ncols: int, nrows: int) -> np.ndarray:
    """Packed (ncols, nwords) matrix with ones at the given (col, row) pairs."""
    packed = np.zeros((ncols, words_for(nrows)), dtype=np.uint64)
    if len(col_ids):
        col_ids = np.asarray(col_ids, dtype=np.int64)
        row_ids = np.asarray(row_ids, dtype=np.int64)
        bits = np.uint64(1) << (row_ids % 64).astype(np.uint64)
        np.bitwise_or.at(packed, (col_ids, row_ids // 64), bits)
    return packed


def pack_bool(matrix: np.ndarray) -> np.ndarray:
    """Pack a boolean (ncols, nrows) matrix."""
    cols, rows = np.nonzero(matrix)
    return pack_from_pairs(cols, rows, matrix.shape[0], matrix.shape[1])


def unpack_bool(packed: np.ndarray, nrows: int) -> np.ndarray:
    """Inverse of :func:`pack_bool` (up to trailing padding)."""
    ncols, nwords = packed.shape
    bytes_ = packed.view(np.uint8).reshape(ncols, nwords * 8)
    bits = np.unpackbits(bytes_, axis=1, bitorder="little")
    return bits[:, :nrows].astype(bool)


def rank(packed: np.ndarray, nrows: int) -> int:
    return int(_kernels.gf2_rank(np.ascontiguousarray(packed), nrows))


def rank_checkpoints(packed: np.ndarray, nrows: int, checkpoints) -> np.ndarray:
    """Rank of the leading-column submatrices at each checkpoint."""
    cps = np.asarray(checkpoints, dtype=np.int64)
    return np.asarray(
        _kernels.gf2_rank_checkpoints(np.ascontiguousarray(packed), nrows, cps)
    )


def kernel_basis(packed: np.ndarray, nrows: int) -> np.ndarray:
    """Packed basis (nker, words_for(ncols)) of the column-map kernel."""
    return np.asarray(_kernels.gf2_kernel_basis(np.ascontiguousarray(packed), nrows))


def stack_rank(blocks, nrows: int) -> int:
    """Rank of the column-wise concatenation of packed blocks."""
    blocks = [b for b in blocks if b.shape[0]]
    if not blocks:
        return 0
    nwords = max(b.shape[1] for b in blocks)
    padded = []
    for b in blocks:
        if b.shape[1] < nwords:
            p = np.zeros((b.shape[0], nwords), dtype=np.uint64)
            p[:, : b.shape[1]] = b
            padded.append(p)
        else:
            padded.append(b)
    return rank(np.vstack(padded), nrows)
