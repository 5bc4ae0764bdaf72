"""Hot numeric kernels: bit-packed GF(2) elimination and PL link classification.

Two interchangeable implementations live here: numba ``@njit`` kernels and a
pure-numpy fallback.  Selection happens once at import time from the
environment variable ``LIE_TAUT_KERNELS`` (``numba`` or ``numpy``); the
default is numba when it imports cleanly.  ``benchmarks/bench_kernels.py``
compares the two paths on representative workloads.

Packed matrices are ``uint64`` arrays of shape ``(ncols, nwords)``: bit ``r``
of column ``j`` is ``(m[j, r // 64] >> (r % 64)) & 1``.
"""

from __future__ import annotations

import os

import numpy as np

_BACKEND_ENV = "LIE_TAUT_KERNELS"


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _hibit_py(col):
    """Index of the highest set bit of a packed vector, or -1 if zero."""
    nz = np.flatnonzero(col)
    if nz.size == 0:
        return -1
    w = nz[-1]
    return 64 * int(w) + int(col[w]).bit_length() - 1


def gf2_rank_checkpoints_numpy(cols, nrows, checkpoints):
    """Rank of the first ``k`` columns for each ``k`` in ``checkpoints``.

    ``checkpoints`` must be nondecreasing; the last entry may equal the
    column count.
    """
    ncols, nwords = cols.shape
    basis = np.zeros((min(ncols, nrows), nwords), dtype=np.uint64)
    pivots = np.full(nrows, -1, dtype=np.int64)
    out = np.zeros(len(checkpoints), dtype=np.int64)
    rank = 0
    ci = 0
    for j in range(ncols):
        while ci < len(checkpoints) and checkpoints[ci] == j:
            out[ci] = rank
            ci += 1
        col = cols[j].copy()
        while True:
            b = _hibit_py(col)
            if b < 0:
                break
            k = pivots[b]
            if k < 0:
                basis[rank] = col
                pivots[b] = rank
                rank += 1
                break
            col ^= basis[k]
    while ci < len(checkpoints):
        out[ci] = rank
        ci += 1
    return out


def gf2_rank_numpy(cols, nrows):
    return int(gf2_rank_checkpoints_numpy(cols, nrows, np.array([cols.shape[0]]))[0])


def gf2_kernel_basis_numpy(cols, nrows):
    """Packed basis of the kernel of the column map GF(2)^ncols -> GF(2)^nrows."""
    ncols, nwords = cols.shape
    kwords = max(1, (ncols + 63) // 64)
    basis = np.zeros((min(ncols, nrows), nwords), dtype=np.uint64)
    combos = np.zeros((min(ncols, nrows), kwords), dtype=np.uint64)
    pivots = np.full(max(nrows, 1), -1, dtype=np.int64)
    kernel = np.zeros((ncols, kwords), dtype=np.uint64)
    rank = 0
    nker = 0
    for j in range(ncols):
        col = cols[j].copy()
        combo = np.zeros(kwords, dtype=np.uint64)
        combo[j // 64] = np.uint64(1) << np.uint64(j % 64)
        while True:
            b = _hibit_py(col)
            if b < 0:
                kernel[nker] = combo
                nker += 1
                break
            k = pivots[b]
            if k < 0:
                basis[rank] = col
                combos[rank] = combo
                pivots[b] = rank
                rank += 1
                break
            col ^= basis[k]
            combo ^= combos[k]
    return kernel[:nker].copy()


def classify_links_numpy(order, link_off, link_vs):
    """Lower-link census per vertex.

    ``order`` ranks vertices by (field value, index); ``link_off``/``link_vs``
    store each vertex's link cycle in cyclic order (CSR).  Returns per-vertex
    lower-neighbor counts and the number of maximal lower arcs in the cycle.
    """
    m = len(link_off) - 1
    own = np.repeat(np.arange(m), np.diff(link_off))
    lower = order[link_vs] < order[own]
    idx = np.arange(len(link_vs))
    prev = idx - 1
    prev[link_off[:-1]] = link_off[1:] - 1
    trans = lower & ~lower[prev]
    n_lower = np.add.reduceat(lower, link_off[:-1])
    n_arcs = np.add.reduceat(trans, link_off[:-1])
    return n_lower.astype(np.int64), n_arcs.astype(np.int64)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _build_numba():
    import numba

    jit = numba.njit(cache=True, nogil=True)

    @jit
    def _hibit(col, nwords):
        for wi in range(nwords - 1, -1, -1):
            w = col[wi]
            if w != np.uint64(0):
                b = 0
                if w >= np.uint64(0x100000000):
                    b += 32
                    w = w >> np.uint64(32)
                if w >= np.uint64(0x10000):
                    b += 16
                    w = w >> np.uint64(16)
                if w >= np.uint64(0x100):
                    b += 8
                    w = w >> np.uint64(8)
                if w >= np.uint64(0x10):
                    b += 4
                    w = w >> np.uint64(4)
                if w >= np.uint64(0x4):
                    b += 2
                    w = w >> np.uint64(2)
                if w >= np.uint64(0x2):
                    b += 1
                return 64 * wi + b
        return -1

    @jit
    def gf2_rank_checkpoints(cols, nrows, checkpoints):
        ncols, nwords = cols.shape
        maxrank = min(ncols, nrows)
        basis = np.zeros((max(maxrank, 1), nwords), dtype=np.uint64)
        pivots = np.full(max(nrows, 1), -1, dtype=np.int64)
        out = np.zeros(len(checkpoints), dtype=np.int64)
        work = np.zeros(nwords, dtype=np.uint64)
        rank = 0
        ci = 0
        for j in range(ncols):
            while ci < len(checkpoints) and checkpoints[ci] == j:
                out[ci] = rank
                ci += 1
            for wi in range(nwords):
                work[wi] = cols[j, wi]
            while True:
                b = _hibit(work, nwords)
                if b < 0:
                    break
                k = pivots[b]
                if k < 0:
                    for wi in range(nwords):
                        basis[rank, wi] = work[wi]
                    pivots[b] = rank
                    rank += 1
                    break
                for wi in range(nwords):
                    work[wi] ^= basis[k, wi]
        while ci < len(checkpoints):
            out[ci] = rank
            ci += 1
        return out

    @jit
    def gf2_kernel_basis(cols, nrows):
        ncols, nwords = cols.shape
        kwords = max(1, (ncols + 63) // 64)
        maxrank = min(ncols, nrows)
        basis = np.zeros((max(maxrank, 1), nwords), dtype=np.uint64)
        combos = np.zeros((max(maxrank, 1), kwords), dtype=np.uint64)
        pivots = np.full(max(nrows, 1), -1, dtype=np.int64)
        kernel = np.zeros((max(ncols, 1), kwords), dtype=np.uint64)
        work = np.zeros(nwords, dtype=np.uint64)
        combo = np.zeros(kwords, dtype=np.uint64)
        rank = 0
        nker = 0
        for j in range(ncols):
            for wi in range(nwords):
                work[wi] = cols[j, wi]
            for wi in range(kwords):
                combo[wi] = np.uint64(0)
            combo[j // 64] = np.uint64(1) << np.uint64(j % 64)
            while True:
                b = _hibit(work, nwords)
                if b < 0:
                    for wi in range(kwords):
                        kernel[nker, wi] = combo[wi]
                    nker += 1
                    break
                k = pivots[b]
                if k < 0:
                    for wi in range(nwords):
                        basis[rank, wi] = work[wi]
                    for wi in range(kwords):
                        combos[rank, wi] = combo[wi]
                    pivots[b] = rank
                    rank += 1
                    break
                for wi in range(nwords):
                    work[wi] ^= basis[k, wi]
                for wi in range(kwords):
                    combo[wi] ^= combos[k, wi]
        return kernel[:nker].copy()

    @jit
    def classify_links(order, link_off, link_vs):
        m = len(link_off) - 1
        n_lower = np.zeros(m, dtype=np.int64)
        n_arcs = np.zeros(m, dtype=np.int64)
        for v in range(m):
            lo = link_off[v]
            hi = link_off[v + 1]
            cnt = 0
            arcs = 0
            ov = order[v]
            prev_low = order[link_vs[hi - 1]] < ov
            for t in range(lo, hi):
                low = order[link_vs[t]] < ov
                if low:
                    cnt += 1
                    if not prev_low:
                        arcs += 1
                prev_low = low
            n_lower[v] = cnt
            n_arcs[v] = arcs
        return n_lower, n_arcs

    def gf2_rank(cols, nrows):
        return int(gf2_rank_checkpoints(cols, nrows, np.array([cols.shape[0]], dtype=np.int64))[0])

    return {
        "gf2_rank": gf2_rank,
        "gf2_rank_checkpoints": gf2_rank_checkpoints,
        "gf2_kernel_basis": gf2_kernel_basis,
        "classify_links": classify_links,
    }


def _select_backend():
    choice = os.environ.get(_BACKEND_ENV, "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"{_BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy", None
    try:
        impl = _build_numba()
        return "numba", impl
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", None


_NUMPY_IMPL = {
    "gf2_rank": gf2_rank_numpy,
    "gf2_rank_checkpoints": gf2_rank_checkpoints_numpy,
    "gf2_kernel_basis": gf2_kernel_basis_numpy,
    "classify_links": classify_links_numpy,
}

KERNEL_BACKEND, _numba_impl = _select_backend()
_impl = _numba_impl if KERNEL_BACKEND == "numba" else _NUMPY_IMPL

gf2_rank = _impl["gf2_rank"]
gf2_rank_checkpoints = _impl["gf2_rank_checkpoints"]
gf2_kernel_basis = _impl["gf2_kernel_basis"]
classify_links = _impl["classify_links"]
