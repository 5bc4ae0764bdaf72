"""Simplicial homology over the two-element field.

Betti numbers come from boundary-matrix ranks; sublevel subcomplexes follow
the full-subcomplex rule (a simplex enters when all its vertices have); and
injectivity of the inclusion-induced map on homology is decided by GF(2)
rank computations.  The threshold scan answers, for every combinatorially
distinct sublevel of a vertex field, whether its homology injects into the
total complex: the computable criterion separating perfect from imperfect
vertex orderings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2


def _sorted_rows(arr: np.ndarray) -> np.ndarray:
    arr = np.sort(np.asarray(arr, dtype=np.int64), axis=1)
    order = np.lexsort(arr.T[::-1])
    return arr[order]


def _row_keys(arr: np.ndarray, base: int) -> np.ndarray:
    keys = np.zeros(len(arr), dtype=np.int64)
    for j in range(arr.shape[1]):
        keys = keys * base + arr[:, j]
    return keys


class SimplicialComplex:
    """A finite simplicial complex: per-dimension arrays of sorted vertex tuples.

    ``simplices[d]`` has shape (n_d, d+1), rows sorted lexicographically.
    The complex must be closed under faces and free of duplicates.
    """

    def __init__(self, num_vertices: int, simplices: list[np.ndarray]):
        self.num_vertices = int(num_vertices)
        sims = []
        for d, arr in enumerate(simplices):
            arr = np.asarray(arr, dtype=np.int64).reshape(-1, d + 1)
            arr = _sorted_rows(arr)
            sims.append(arr)
        self.simplices = sims
        self._key_base = self.num_vertices + 1
        self._keys = [_row_keys(arr, self._key_base) for arr in sims]
        self._boundary_cache: dict[int, tuple] = {}
        self._validate()

    # -- construction ------------------------------------------------------

    @classmethod
    def from_triangles(cls, num_vertices: int, triangles) -> "SimplicialComplex":
        triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        tri = np.sort(triangles, axis=1)
        edges = np.vstack([tri[:, [0, 1]], tri[:, [0, 2]], tri[:, [1, 2]]])
        edges = np.unique(edges, axis=0)
        verts = np.arange(num_vertices, dtype=np.int64).reshape(-1, 1)
        return cls(num_vertices, [verts, edges, np.unique(tri, axis=0)])

    def _validate(self):
        for d, arr in enumerate(self.simplices):
            if arr.size == 0:
                continue
            if arr.min() < 0 or arr.max() >= self.num_vertices:
                raise ValueError(f"dimension-{d} simplex indexes a missing vertex")
            if np.any(np.diff(np.sort(arr, axis=1), axis=1) == 0):
                raise ValueError(f"dimension-{d} simplex repeats a vertex")
            keys = self._keys[d]
            if len(np.unique(keys)) != len(keys):
                raise ValueError(f"duplicate dimension-{d} simplices")
            if d > 0:
                for drop in range(d + 1):
                    faces = np.delete(arr, drop, axis=1)
                    self._locate(d - 1, faces)

    def _locate(self, d: int, query: np.ndarray) -> np.ndarray:
        """Indices of the given sorted-vertex-tuple simplices in dimension d."""
        keys = _row_keys(np.asarray(query, dtype=np.int64), self._key_base)
        if len(keys) and len(self._keys[d]) == 0:
            raise ValueError(f"complex is not closed under faces in dimension {d}")
        pos = np.searchsorted(self._keys[d], keys)
        ok = (pos < len(self._keys[d])) & (self._keys[d][np.minimum(pos, len(self._keys[d]) - 1)] == keys)
        if not np.all(ok):
            raise ValueError(f"complex is not closed under faces in dimension {d}")
        return pos

    # -- boundary matrices ---------------------------------------------------

    def boundary_pairs(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        """(col, row) index pairs of the dimension-d boundary matrix."""
        if d not in self._boundary_cache:
            arr = self.simplices[d]
            cols, rows = [], []
            for drop in range(d + 1):
                faces = np.delete(arr, drop, axis=1)
                rows.append(self._locate(d - 1, faces))
                cols.append(np.arange(len(arr), dtype=np.int64))
            self._boundary_cache[d] = (np.concatenate(cols), np.concatenate(rows))
        return self._boundary_cache[d]

    def boundary_packed(self, d: int) -> np.ndarray:
        """Packed boundary matrix: columns are d-simplices, bits (d-1)-simplices."""
        cols, rows = self.boundary_pairs(d)
        return gf2.pack_from_pairs(cols, rows, len(self.simplices[d]), len(self.simplices[d - 1]))

    def boundary_packed_transpose(self, d: int) -> np.ndarray:
        cols, rows = self.boundary_pairs(d)
        return gf2.pack_from_pairs(rows, cols, len(self.simplices[d - 1]), len(self.simplices[d]))

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def counts(self) -> list[int]:
        return [len(arr) for arr in self.simplices]

    def euler_characteristic(self) -> int:
        return int(sum((-1) ** d * n for d, n in enumerate(self.counts())))


def betti_numbers(complex_: SimplicialComplex) -> list[int]:
    """GF(2) Betti numbers in every dimension of the complex."""
    ranks = [0] * (complex_.dim + 2)
    for d in range(1, complex_.dim + 1):
        if len(complex_.simplices[d]):
            ranks[d] = gf2.rank(
                complex_.boundary_packed(d), len(complex_.simplices[d - 1])
            )
    out = []
    for d in range(complex_.dim + 1):
        out.append(len(complex_.simplices[d]) - ranks[d] - ranks[d + 1])
    return out


def betti_sum(complex_: SimplicialComplex) -> int:
    return int(sum(betti_numbers(complex_)))


def _field_values(field_like) -> np.ndarray:
    values = getattr(field_like, "values", field_like)
    return np.asarray(values, dtype=float)


@dataclass
class SublevelComplex:
    """Full subcomplex on the vertices with field value <= threshold."""

    parent: SimplicialComplex
    threshold: float
    field: object
    included: np.ndarray = field(init=False)
    sub_indices: list[np.ndarray] = field(init=False)

    def __post_init__(self):
        values = _field_values(self.field)
        if len(values) != self.parent.num_vertices:
            raise ValueError("field length does not match vertex count")
        self.included = values <= self.threshold
        self.sub_indices = []
        for arr in self.parent.simplices:
            mask = np.all(self.included[arr], axis=1) if len(arr) else np.zeros(0, bool)
            self.sub_indices.append(np.flatnonzero(mask))

    def counts(self) -> list[int]:
        return [len(ix) for ix in self.sub_indices]


def sublevel(complex_: SimplicialComplex, field_like, threshold: float) -> SublevelComplex:
    return SublevelComplex(complex_, float(threshold), field_like)


def _cycle_basis_in_parent(s: SublevelComplex, d: int) -> np.ndarray:
    """Packed basis of Z_d(S), expressed over parent d-simplex coordinates."""
    parent = s.parent
    nd_parent = len(parent.simplices[d])
    sub = s.sub_indices[d]
    if d == 0:
        return gf2.pack_from_pairs(
            np.arange(len(sub)), sub, len(sub), nd_parent
        )
    if len(sub) == 0:
        return np.zeros((0, gf2.words_for(nd_parent)), dtype=np.uint64)
    cols, rows = parent.boundary_pairs(d)
    keep = np.isin(cols, sub)
    col_map = np.full(nd_parent, -1, dtype=np.int64)
    col_map[sub] = np.arange(len(sub))
    packed = gf2.pack_from_pairs(
        col_map[cols[keep]], rows[keep], len(sub), len(parent.simplices[d - 1])
    )
    kernel = gf2.kernel_basis(packed, len(parent.simplices[d - 1]))
    if kernel.shape[0] == 0:
        return np.zeros((0, gf2.words_for(nd_parent)), dtype=np.uint64)
    dense = gf2.unpack_bool(kernel, len(sub))
    ker_rows, ker_cols = np.nonzero(dense)
    return gf2.pack_from_pairs(ker_rows, sub[ker_cols], kernel.shape[0], nd_parent)


def _sub_boundary_rank(s: SublevelComplex, d: int) -> int:
    """Rank of the boundary map into degree d restricted to the sublevel."""
    parent = s.parent
    if d + 1 > parent.dim or len(s.sub_indices[d + 1]) == 0:
        return 0
    cols, rows = parent.boundary_pairs(d + 1)
    keep = np.isin(cols, s.sub_indices[d + 1])
    col_map = np.full(len(parent.simplices[d + 1]), -1, dtype=np.int64)
    col_map[s.sub_indices[d + 1]] = np.arange(len(s.sub_indices[d + 1]))
    packed = gf2.pack_from_pairs(
        col_map[cols[keep]], rows[keep], len(s.sub_indices[d + 1]), len(parent.simplices[d])
    )
    return gf2.rank(packed, len(parent.simplices[d]))


def induced_map_injective(s: SublevelComplex) -> bool:
    """Whether H_*(S) -> H_*(parent) is injective in every degree.

    Degree d is decided by ranks of the stacked matrix of sublevel cycles
    and parent boundaries: the inclusion kernel is
    (Z_d(S) `intersect` B_d(parent)) / B_d(S).
    """
    parent = s.parent
    for d in range(parent.dim):
        nrows = len(parent.simplices[d])
        z_basis = _cycle_basis_in_parent(s, d)
        b_parent = parent.boundary_packed(d + 1)
        dim_z = z_basis.shape[0]
        dim_b = gf2.rank(b_parent, nrows) if len(parent.simplices[d + 1]) else 0
        joint = gf2.stack_rank([z_basis, b_parent], nrows)
        dim_meet = dim_z + dim_b - joint
        if dim_meet != _sub_boundary_rank(s, d):
            return False
    return True


@dataclass
class KuiperScanResult:
    injective: bool
    first_failing_threshold: float | None
    thresholds_checked: int
    failing_count: int


def _entry_checkpoints(enter_pos: np.ndarray, num_vertices: int) -> np.ndarray:
    """counts[i] = how many simplices have entered once i vertices are present."""
    sorted_pos = np.sort(enter_pos)
    return np.searchsorted(sorted_pos, np.arange(num_vertices + 1), side="right")


def kuiper_scan(complex_: SimplicialComplex, field_like) -> KuiperScanResult:
    """Evaluate sublevel-homology injectivity at every distinct-value midpoint.

    Equivalent to running :func:`induced_map_injective` at each threshold,
    but organized as two incremental elimination passes per degree: one over
    boundary columns in vertex-entry order, one over boundary rows in
    reverse. (dim(Z_d(S) `intersect` B_d(parent)) equals
    rank(bd_{d+1}) - rank(bd_{d+1} without the rows in S).)
    """
    values = _field_values(field_like)
    parent = complex_
    nv = parent.num_vertices
    if len(values) != nv:
        raise ValueError("field length does not match vertex count")
    order = np.lexsort((np.arange(nv), values))
    pos_of_vertex = np.empty(nv, dtype=np.int64)
    pos_of_vertex[order] = np.arange(nv)

    ok = np.ones(nv + 1, dtype=bool)
    for d in range(parent.dim):
        n_hi = len(parent.simplices[d + 1])
        n_lo = len(parent.simplices[d])
        if n_hi == 0:
            continue
        cols, rows = parent.boundary_pairs(d + 1)
        enter_hi = np.max(pos_of_vertex[parent.simplices[d + 1]], axis=1) + 1
        enter_lo = np.max(pos_of_vertex[parent.simplices[d]], axis=1) + 1

        # forward: rank of boundary columns whose simplex is inside the sublevel
        fwd_order = np.argsort(enter_hi, kind="stable")
        fwd_rank_map = np.empty(n_hi, dtype=np.int64)
        fwd_rank_map[fwd_order] = np.arange(n_hi)
        packed = gf2.pack_from_pairs(fwd_rank_map[cols], rows, n_hi, n_lo)
        cps_in = _entry_checkpoints(enter_hi, nv)
        rank_in = gf2.rank_checkpoints(packed, n_lo, cps_in)
        rank_total = int(rank_in[-1])

        # backward: rank of boundary rows outside the sublevel, via the transpose
        bwd_order = np.argsort(-enter_lo, kind="stable")
        bwd_rank_map = np.empty(n_lo, dtype=np.int64)
        bwd_rank_map[bwd_order] = np.arange(n_lo)
        packed_t = gf2.pack_from_pairs(bwd_rank_map[rows], cols, n_lo, n_hi)
        counts_off = len(parent.simplices[d]) - _entry_checkpoints(enter_lo, nv)
        rank_off_at_count = gf2.rank_checkpoints(packed_t, n_hi, counts_off[::-1].copy())[::-1]

        ok &= rank_in == rank_total - rank_off_at_count

    sorted_vals = values[order]
    distinct = sorted_vals[1:] > sorted_vals[:-1]
    boundary_idx = np.flatnonzero(distinct) + 1
    verdicts = ok[boundary_idx]
    failing = np.flatnonzero(~verdicts)
    first = None
    if len(failing):
        i = boundary_idx[failing[0]]
        first = float(0.5 * (sorted_vals[i - 1] + sorted_vals[i]))
    return KuiperScanResult(
        injective=bool(len(failing) == 0),
        first_failing_threshold=first,
        thresholds_checked=int(len(boundary_idx)),
        failing_count=int(len(failing)),
    )
