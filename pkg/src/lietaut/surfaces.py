"""Triangulated closed surfaces embedded in S^n and their contact geometry.

A surface carries unit vertices, a closed manifold triangulation, the sum of
its GF(2) Betti numbers, and optionally an analytic handle: per-vertex local
charts with first and second derivatives plus a distinguished unit normal
field.  On top of that live unit normal bundles (two sheets in codimension
one), shape operators with principal curvatures, the tangent spheres whose
radii satisfy cot r = principal curvature, and the lift sending each normal
frame to the line on the quadric spanned by its point sphere and great
sphere.

Catalog surfaces: round spheres in S^3 (or higher), the square flat torus,
the two-parameter family of flat product tori, and a flat torus with a
localized normal bump (the certified non-taut control).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import homology
from .quadric import ContactElement, QuadricLine, contact_to_line
from .tolerances import TOL_UNIT

CATALOG_NAMES = ("round_sphere", "clifford_torus", "torus_of_revolution", "bumpy_torus")

MIN_RESOLUTION = 8


@dataclass(frozen=True)
class ChartJet:
    """Value and first/second chart derivatives at a vertex."""

    point: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    duu: np.ndarray
    duv: np.ndarray
    dvv: np.ndarray


@dataclass(frozen=True)
class AnalyticHandle:
    """Closed-form local charts around each vertex.

    ``chart_point(i, du, dv)`` evaluates the surface near vertex i;
    ``jet(i)`` returns derivatives at the vertex; ``normal_at`` is the
    distinguished unit normal section (codimension one only).
    """

    chart_point: Callable[[int, float, float], np.ndarray]
    jet: Callable[[int], ChartJet]
    normal_at: Callable[[int, float, float], np.ndarray] | None = None


class EmbeddedSurface:
    """A closed connected triangulated surface with unit vertices in R^{n+1}."""

    def __init__(
        self,
        vertices,
        triangles,
        betti_sum_z2: int,
        *,
        analytic: AnalyticHandle | None = None,
        catalog_key: tuple | None = None,
        h_max: float | None = None,
        dim_v: int = 2,
    ):
        if dim_v != 2:
            raise NotImplementedError("only 2-dimensional surfaces are implemented")
        self.dim_v = 2
        self.vertices = np.asarray(vertices, dtype=float)
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        self.betti_sum_z2 = int(betti_sum_z2)
        self.analytic = analytic
        self.catalog_key = catalog_key
        if self.vertices.ndim != 2 or self.vertices.shape[1] < 4:
            raise ValueError("vertices must be (m, n+1) with n >= 3")
        norms = np.linalg.norm(self.vertices, axis=1)
        if np.max(np.abs(norms - 1.0)) > TOL_UNIT:
            raise ValueError("vertices must lie on the unit sphere")
        self._cache: dict = {}
        self._build_topology()
        if h_max is not None and self.max_edge_angle > h_max:
            raise ValueError(
                f"mesh too coarse: max edge angle {self.max_edge_angle:.4g} exceeds "
                f"bound {h_max:.4g}"
            )

    # -- topology ----------------------------------------------------------

    def _build_topology(self):
        m = len(self.vertices)
        tri = self.triangles
        if tri.min(initial=0) < 0 or tri.max(initial=-1) >= m:
            raise ValueError("triangle indexes a missing vertex")
        # undirected edges and manifoldness
        pairs = np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        pairs = np.sort(pairs, axis=1)
        edges, counts = np.unique(pairs, axis=0, return_counts=True)
        if np.any(counts != 2):
            bad = edges[counts != 2][0]
            raise ValueError(f"edge {tuple(bad)} does not bound exactly two triangles")
        self.edges = edges
        dots = np.clip(
            np.sum(self.vertices[edges[:, 0]] * self.vertices[edges[:, 1]], axis=1),
            -1.0,
            1.0,
        )
        self.edge_angles = np.arccos(dots)
        self.max_edge_angle = float(np.max(self.edge_angles))
        self._build_links()
        self._orient_triangles()
        # connectivity
        seen = np.zeros(m, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for u in self.link_vs[self.link_off[v] : self.link_off[v + 1]]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
        if not np.all(seen):
            raise ValueError("surface complex is not connected")

    def _build_links(self):
        """Each vertex's link as a single cycle of neighbors, stored CSR."""
        m = len(self.vertices)
        opposite: list[dict[int, list[int]]] = [dict() for _ in range(m)]
        for a, b, c in self.triangles:
            for v, x, y in ((a, b, c), (b, c, a), (c, a, b)):
                adj = opposite[v]
                adj.setdefault(int(x), []).append(int(y))
                adj.setdefault(int(y), []).append(int(x))
        link_off = np.zeros(m + 1, dtype=np.int64)
        chains: list[list[int]] = []
        for v in range(m):
            adj = opposite[v]
            if not adj:
                raise ValueError(f"vertex {v} is isolated")
            for u, nbrs in adj.items():
                if len(nbrs) != 2:
                    raise ValueError(f"link of vertex {v} is not a closed cycle")
            start = next(iter(adj))
            cycle = [start]
            prev, cur = -1, start
            while True:
                nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
                if nxt == start:
                    break
                cycle.append(nxt)
                prev, cur = cur, nxt
            if len(cycle) != len(adj):
                raise ValueError(f"link of vertex {v} has several components")
            chains.append(cycle)
            link_off[v + 1] = link_off[v] + len(cycle)
        self.link_off = link_off
        self.link_vs = np.array(
            [u for cycle in chains for u in cycle], dtype=np.int64
        )

    def _orient_triangles(self):
        """Consistently oriented copy of the triangle list (closed orientable)."""
        tri = self.triangles
        edge_key = {}
        for t, (a, b, c) in enumerate(tri):
            for x, y in ((a, b), (b, c), (c, a)):
                edge_key.setdefault((min(x, y), max(x, y)), []).append((t, x < y))
        flip = np.full(len(tri), -1, dtype=np.int8)
        flip[0] = 0
        stack = [0]
        adjacency: list[list[tuple[int, bool]]] = [[] for _ in range(len(tri))]
        for members in edge_key.values():
            (t1, d1), (t2, d2) = members
            # consistent orientation traverses a shared edge in opposite directions
            same_needed = d1 != d2
            adjacency[t1].append((t2, same_needed))
            adjacency[t2].append((t1, same_needed))
        while stack:
            t = stack.pop()
            for t2, same in adjacency[t]:
                want = flip[t] if same else 1 - flip[t]
                if flip[t2] == -1:
                    flip[t2] = want
                    stack.append(t2)
                elif flip[t2] != want:
                    raise ValueError("triangulation is not orientable")
        oriented = tri.copy()
        swap = flip == 1
        oriented[swap] = oriented[swap][:, [0, 2, 1]]
        self.oriented_triangles = oriented

    # -- derived geometry ----------------------------------------------------

    @property
    def ambient_n(self) -> int:
        return self.vertices.shape[1] - 1

    @property
    def codim(self) -> int:
        return self.ambient_n - self.dim_v

    def complex(self) -> homology.SimplicialComplex:
        if "complex" not in self._cache:
            self._cache["complex"] = homology.SimplicialComplex.from_triangles(
                len(self.vertices), self.triangles
            )
        return self._cache["complex"]

    def _tangent_fit(self):
        """Per-vertex orthonormal tangent and normal-space bases from the 1-ring."""
        if "tangent" in self._cache:
            return self._cache["tangent"]
        m, dim = self.vertices.shape
        k = self.dim_v
        tangents = np.zeros((m, k, dim))
        normals = np.zeros((m, dim - 1 - k, dim))
        for v in range(m):
            x = self.vertices[v]
            # orthonormal basis of the tangent space of S^n at x
            _, _, vt = np.linalg.svd(x[None, :])
            basis = vt[1:]
            nbrs = self.link_vs[self.link_off[v] : self.link_off[v + 1]]
            u = self.vertices[nbrs] - x
            u = u - np.outer(u @ x, x)
            coords = u @ basis.T
            cov = coords.T @ coords
            w, vec = np.linalg.eigh(cov)
            if w[-k] < 1e-10 * max(w[-1], 1e-300):
                raise ValueError(f"rank-deficient tangent estimate at vertex {v}")
            tangents[v] = vec[:, -k:].T @ basis
            if dim - 1 - k:
                normals[v] = vec[:, : dim - 1 - k].T @ basis
        self._cache["tangent"] = (tangents, normals)
        return self._cache["tangent"]

    def tangent_basis(self, v: int) -> np.ndarray:
        """Orthonormal rows spanning the discrete tangent plane at vertex v."""
        return self._tangent_fit()[0][v]

    def tangent_bases(self) -> np.ndarray:
        return self._tangent_fit()[0]

    def normal_space_basis(self, v: int) -> np.ndarray:
        return self._tangent_fit()[1][v]

    def min_vertex_angle(self, p: np.ndarray) -> float:
        """Smallest angular distance from p to a vertex of the surface."""
        return float(np.arccos(np.clip(np.max(self.vertices @ p), -1.0, 1.0)))

    def refined(self) -> "EmbeddedSurface":
        """Surface at doubled resolution: catalog regeneration or midpoint split."""
        if self.catalog_key is not None:
            name, resolution, params = self.catalog_key
            return catalog_surface(name, 2 * resolution, **dict(params))
        return _midpoint_subdivision(self)


def _midpoint_subdivision(surface: EmbeddedSurface) -> EmbeddedSurface:
    verts = surface.vertices
    edges = surface.edges
    edge_index = {(int(a), int(b)): i for i, (a, b) in enumerate(edges)}
    mids = verts[edges[:, 0]] + verts[edges[:, 1]]
    mids /= np.linalg.norm(mids, axis=1, keepdims=True)
    new_vertices = np.vstack([verts, mids])
    base = len(verts)
    tris = []
    for a, b, c in surface.triangles:
        ab = base + edge_index[(min(a, b), max(a, b))]
        bc = base + edge_index[(min(b, c), max(b, c))]
        ca = base + edge_index[(min(c, a), max(c, a))]
        tris.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return EmbeddedSurface(
        new_vertices, np.array(tris, dtype=np.int64), surface.betti_sum_z2
    )


# ---------------------------------------------------------------------------
# catalog surfaces
# ---------------------------------------------------------------------------

def _cross4(a, b, c):
    """Vector orthogonal to three vectors in R^4."""
    m = np.vstack([a, b, c])
    out = np.empty(4)
    sign = 1.0
    for i in range(4):
        minor = np.delete(m, i, axis=1)
        out[i] = sign * np.linalg.det(minor)
        sign = -sign
    return out


def _torus_grid_triangles(res: int) -> np.ndarray:
    tris = []
    for i in range(res):
        for j in range(res):
            v00 = i * res + j
            v10 = ((i + 1) % res) * res + j
            v01 = i * res + (j + 1) % res
            v11 = ((i + 1) % res) * res + (j + 1) % res
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return np.array(tris, dtype=np.int64)


def _flat_torus_maps(a: float, b: float):
    scale = 1.0 / np.hypot(a, b)
    ah, bh = a * scale, b * scale

    def point(u, v):
        return np.array(
            [ah * np.cos(u), ah * np.sin(u), bh * np.cos(v), bh * np.sin(v)]
        )

    def point_jet(u, v):
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        p = np.array([ah * cu, ah * su, bh * cv, bh * sv])
        pu = np.array([-ah * su, ah * cu, 0.0, 0.0])
        pv = np.array([0.0, 0.0, -bh * sv, bh * cv])
        puu = np.array([-ah * cu, -ah * su, 0.0, 0.0])
        pvv = np.array([0.0, 0.0, -bh * cv, -bh * sv])
        return p, pu, pv, puu, np.zeros(4), pvv

    def normal(u, v):
        return np.array(
            [bh * np.cos(u), bh * np.sin(u), -ah * np.cos(v), -ah * np.sin(v)]
        )

    def normal_jet(u, v):
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        n = np.array([bh * cu, bh * su, -ah * cv, -ah * sv])
        nu = np.array([-bh * su, bh * cu, 0.0, 0.0])
        nv = np.array([0.0, 0.0, ah * sv, -ah * cv])
        nuu = np.array([-bh * cu, -bh * su, 0.0, 0.0])
        nvv = np.array([0.0, 0.0, ah * cv, ah * sv])
        return n, nu, nv, nuu, np.zeros(4), nvv

    return point, point_jet, normal, normal_jet


def _flat_torus(a: float, b: float, resolution: int, key: tuple) -> EmbeddedSurface:
    point, point_jet, normal, _ = _flat_torus_maps(a, b)
    us = 2 * np.pi * np.arange(resolution) / resolution
    params = np.array([(u, v) for u in us for v in us])
    vertices = np.array([point(u, v) for u, v in params])

    def chart_point(i, du, dv):
        return point(params[i, 0] + du, params[i, 1] + dv)

    def jet(i):
        p, pu, pv, puu, puv, pvv = point_jet(params[i, 0], params[i, 1])
        return ChartJet(p, pu, pv, puu, puv, pvv)

    def normal_at(i, du, dv):
        return normal(params[i, 0] + du, params[i, 1] + dv)

    handle = AnalyticHandle(chart_point, jet, normal_at)
    return EmbeddedSurface(
        vertices,
        _torus_grid_triangles(resolution),
        betti_sum_z2=4,
        analytic=handle,
        catalog_key=key,
    )


def _bump_profile(amplitude: float, width: float, u0: float, v0: float):
    s2 = width * width

    def theta_jet(u, v):
        al, be = u - u0, v - v0
        g = amplitude * np.exp((np.cos(al) - 1.0) / s2) * np.exp((np.cos(be) - 1.0) / s2)
        tu = g * (-np.sin(al) / s2)
        tv = g * (-np.sin(be) / s2)
        tuu = g * (np.sin(al) ** 2 / s2**2 - np.cos(al) / s2)
        tvv = g * (np.sin(be) ** 2 / s2**2 - np.cos(be) / s2)
        tuv = g * (np.sin(al) * np.sin(be) / s2**2)
        return g, tu, tv, tuu, tuv, tvv

    return theta_jet


def _bumpy_torus(
    amplitude: float,
    resolution: int,
    a: float,
    b: float,
    width: float,
    key: tuple,
) -> EmbeddedSurface:
    point, point_jet, normal, normal_jet = _flat_torus_maps(a, b)
    theta_jet = _bump_profile(amplitude, width, 0.0, 0.0)

    def bump_point(u, v):
        th = theta_jet(u, v)[0]
        return np.cos(th) * point(u, v) + np.sin(th) * normal(u, v)

    def bump_jet_full(u, v):
        p, pu, pv, puu, puv, pvv = point_jet(u, v)
        n, nu, nv, nuu, nuv, nvv = normal_jet(u, v)
        th, tu, tv, tuu, tuv, tvv = theta_jet(u, v)
        c, s = np.cos(th), np.sin(th)
        radial = -s * p + c * n          # d/dtheta of the displaced point
        second = -c * p - s * n
        q = c * p + s * n
        qu = c * pu + s * nu + tu * radial
        qv = c * pv + s * nv + tv * radial
        quu = c * puu + s * nuu + 2 * tu * (-s * pu + c * nu) + tuu * radial + tu * tu * second
        qvv = c * pvv + s * nvv + 2 * tv * (-s * pv + c * nv) + tvv * radial + tv * tv * second
        quv = (
            c * puv
            + s * nuv
            + tu * (-s * pv + c * nv)
            + tv * (-s * pu + c * nu)
            + tuv * radial
            + tu * tv * second
        )
        return q, qu, qv, quu, quv, qvv

    def bump_normal(u, v):
        q, qu, qv, *_ = bump_jet_full(u, v)
        n = _cross4(q, qu, qv)
        n /= np.linalg.norm(n)
        th = theta_jet(u, v)[0]
        guide = np.cos(th) * normal(u, v) - np.sin(th) * point(u, v)
        return n if n @ guide > 0 else -n

    us = 2 * np.pi * np.arange(resolution) / resolution
    params = np.array([(u, v) for u in us for v in us])
    vertices = np.array([bump_point(u, v) for u, v in params])

    def chart_point(i, du, dv):
        return bump_point(params[i, 0] + du, params[i, 1] + dv)

    def jet(i):
        return ChartJet(*bump_jet_full(params[i, 0], params[i, 1]))

    def normal_at(i, du, dv):
        return bump_normal(params[i, 0] + du, params[i, 1] + dv)

    handle = AnalyticHandle(chart_point, jet, normal_at)
    return EmbeddedSurface(
        vertices,
        _torus_grid_triangles(resolution),
        betti_sum_z2=4,
        analytic=handle,
        catalog_key=key,
    )


def _sphere_directions(resolution: int):
    """Latitude-longitude samples of the unit 2-sphere, poles as single vertices."""
    res = resolution
    dirs = [np.array([0.0, 0.0, 1.0])]
    for j in range(1, res):
        v = np.pi * j / res
        for i in range(res):
            u = 2 * np.pi * i / res
            dirs.append(
                np.array([np.cos(u) * np.sin(v), np.sin(u) * np.sin(v), np.cos(v)])
            )
    dirs.append(np.array([0.0, 0.0, -1.0]))
    return np.array(dirs)


def _sphere_triangles(resolution: int) -> np.ndarray:
    res = resolution
    north = 0
    south = 1 + (res - 1) * res

    def ring(j, i):
        return 1 + (j - 1) * res + (i % res)

    tris = []
    for i in range(res):
        tris.append((north, ring(1, i), ring(1, i + 1)))
    for j in range(1, res - 1):
        for i in range(res):
            tris.append((ring(j, i), ring(j + 1, i), ring(j + 1, i + 1)))
            tris.append((ring(j, i), ring(j + 1, i + 1), ring(j, i + 1)))
    for i in range(res):
        tris.append((south, ring(res - 1, i + 1), ring(res - 1, i)))
    return np.array(tris, dtype=np.int64)


def _tangent_pair(w0: np.ndarray):
    ref = np.array([0.0, 0.0, 1.0]) if abs(w0[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    t1 = np.cross(ref, w0)
    t1 /= np.linalg.norm(t1)
    return t1, np.cross(w0, t1)


def _round_sphere(
    k: int, n: int, radius: float, resolution: int, key: tuple
) -> EmbeddedSurface:
    if k != 2:
        raise ValueError("catalog spheres are 2-dimensional")
    if n < 3:
        raise ValueError("ambient sphere dimension must be at least 3")
    if not 0 < radius < np.pi:
        raise ValueError("sphere radius must lie in (0, pi)")
    dirs = _sphere_directions(resolution)
    cr, sr = np.cos(radius), np.sin(radius)

    def embed(w):
        out = np.zeros(n + 1)
        out[:3] = w
        return out

    axis = np.zeros(n + 1)
    axis[n] = 1.0
    vertices = np.array([cr * axis + sr * embed(w) for w in dirs])
    pairs = [_tangent_pair(w) for w in dirs]

    def w_chart(i, du, dv):
        w0 = dirs[i]
        t1, t2 = pairs[i]
        c = np.cos(du) * w0 + np.sin(du) * t1
        return np.cos(dv) * c + np.sin(dv) * t2

    def chart_point(i, du, dv):
        return cr * axis + sr * embed(w_chart(i, du, dv))

    def jet(i):
        w0 = dirs[i]
        t1, t2 = pairs[i]
        p = cr * axis + sr * embed(w0)
        return ChartJet(
            p,
            sr * embed(t1),
            sr * embed(t2),
            -sr * embed(w0),
            np.zeros(n + 1),
            -sr * embed(w0),
        )

    def normal_at(i, du, dv):
        # the sheet whose shape operator is cot(radius) * I
        return sr * axis - cr * embed(w_chart(i, du, dv))

    handle = AnalyticHandle(chart_point, jet, normal_at if n == 3 else None)
    return EmbeddedSurface(
        vertices,
        _sphere_triangles(resolution),
        betti_sum_z2=2,
        analytic=handle,
        catalog_key=key,
    )


def catalog_surface(name: str, resolution: int, **params) -> EmbeddedSurface:
    """Build a catalog surface at the given grid resolution."""
    if resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be at least {MIN_RESOLUTION}")
    key = (name, resolution, tuple(sorted(params.items())))
    if name == "round_sphere":
        k = params.pop("k", 2)
        n = params.pop("n", 3)
        radius = params.pop("radius", np.pi / 2)
        _reject_extra(name, params)
        return _round_sphere(k, n, radius, resolution, key)
    if name == "clifford_torus":
        _reject_extra(name, params)
        s = 1.0 / np.sqrt(2.0)
        return _flat_torus(s, s, resolution, key)
    if name == "torus_of_revolution":
        a = params.pop("a", 0.8)
        b = params.pop("b", 0.6)
        _reject_extra(name, params)
        if a <= 0 or b <= 0:
            raise ValueError("torus radii must be positive")
        return _flat_torus(a, b, resolution, key)
    if name == "bumpy_torus":
        amplitude = params.pop("amplitude", 0.3)
        a = params.pop("a", 1.0 / np.sqrt(2.0))
        b = params.pop("b", 1.0 / np.sqrt(2.0))
        width = params.pop("width", 0.8)
        _reject_extra(name, params)
        return _bumpy_torus(amplitude, resolution, a, b, width, key)
    raise ValueError(f"unknown catalog surface {name!r}; choose from {CATALOG_NAMES}")


def _reject_extra(name: str, params: dict):
    if params:
        raise ValueError(f"unknown parameters for {name}: {sorted(params)}")


# ---------------------------------------------------------------------------
# mesh file io
# ---------------------------------------------------------------------------

MESH_MAGIC = "SPHMESH"


def save_surface(surface: EmbeddedSurface, path) -> None:
    """Write the text mesh format (17 significant digits per coordinate)."""
    lines = [
        f"{MESH_MAGIC} {surface.ambient_n} {surface.dim_v} "
        f"{len(surface.vertices)} {len(surface.triangles)}"
    ]
    for v in surface.vertices:
        lines.append(" ".join(f"{x:.17g}" for x in v))
    for t in surface.triangles:
        lines.append(" ".join(str(int(i)) for i in t))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_surface(path, declared_betti: int) -> EmbeddedSurface:
    """Read a mesh file, normalize vertices, and cross-check the Betti sum."""
    with open(path) as fh:
        tokens = fh.read().split("\n")
    header = tokens[0].split()
    if len(header) != 5 or header[0] != MESH_MAGIC:
        raise ValueError("malformed mesh header")
    n, k, nv, nf = (int(x) for x in header[1:])
    if k != 2:
        raise ValueError("only 2-dimensional surface meshes are supported")
    rows = [r for r in tokens[1:] if r.strip()]
    if len(rows) != nv + nf:
        raise ValueError("mesh row count does not match header")
    vertices = np.array([[float(x) for x in rows[i].split()] for i in range(nv)])
    if vertices.shape != (nv, n + 1):
        raise ValueError("vertex row width does not match header")
    triangles = np.array(
        [[int(x) for x in rows[nv + i].split()] for i in range(nf)], dtype=np.int64
    )
    if triangles.shape != (nf, k + 1):
        raise ValueError("simplex row width does not match header")
    norms = np.linalg.norm(vertices, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        raise ValueError("vertex norms deviate from 1 by more than 1e-6")
    fix = np.abs(norms - 1.0) > 1e-12
    vertices[fix] /= norms[fix, None]
    surface = EmbeddedSurface(vertices, triangles, betti_sum_z2=declared_betti)
    computed = homology.betti_sum(surface.complex())
    if computed != declared_betti:
        raise ValueError(
            f"declared Betti sum {declared_betti} but the complex has {computed}"
        )
    return surface


# ---------------------------------------------------------------------------
# normal bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalFrame:
    """A unit normal vector attached to a surface vertex."""

    base_index: int
    normal: np.ndarray

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", normal)
        if abs(np.linalg.norm(normal) - 1.0) > TOL_UNIT:
            raise ValueError("frame normal must be a unit vector")


def frame_tangency_defect(surface: EmbeddedSurface, frame: NormalFrame) -> float:
    """Largest |N . t| over unit tangent estimates of incident edges."""
    v = frame.base_index
    x = surface.vertices[v]
    nbrs = surface.link_vs[surface.link_off[v] : surface.link_off[v + 1]]
    u = surface.vertices[nbrs] - x
    u = u - np.outer(u @ x, x)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return float(np.max(np.abs(u @ frame.normal)))


class NormalBundle:
    """Discretized unit normal bundle: frames grouped into sheets.

    Codimension one gives two sheets (+N and -N of a consistent field);
    codimension two gives ``fiber_resolution`` sampled directions per vertex.
    Frame ``s * m + v`` is the sheet-s frame over vertex v.
    """

    def __init__(self, surface: EmbeddedSurface, sheet_normals: np.ndarray):
        self.surface = surface
        self.sheet_normals = sheet_normals
        self.num_sheets = sheet_normals.shape[0]
        self.frames = [
            NormalFrame(v, sheet_normals[s, v])
            for s in range(self.num_sheets)
            for v in range(len(surface.vertices))
        ]

    def __len__(self) -> int:
        return len(self.frames)

    def frame_index(self, sheet: int, vertex: int) -> int:
        return sheet * len(self.surface.vertices) + vertex

    def match_sheet(self, vertex: int, normal: np.ndarray) -> int:
        """Sheet whose normal at the vertex best matches the given direction."""
        dots = self.sheet_normals[:, vertex] @ normal
        return int(np.argmax(dots))

    def bundle_complex(self) -> homology.SimplicialComplex:
        """Simplicial complex of the sheet copies (codimension one only)."""
        if self.num_sheets != 2:
            raise ValueError("bundle complex is defined for two-sheet bundles")
        m = len(self.surface.vertices)
        tris = np.vstack([self.surface.triangles, self.surface.triangles + m])
        return homology.SimplicialComplex.from_triangles(2 * m, tris)

    def curvatures(self) -> np.ndarray:
        """Principal curvatures per sheet and vertex, shape (sheets, m, 2)."""
        if not hasattr(self, "_curvatures"):
            m = len(self.surface.vertices)
            out = np.zeros((self.num_sheets, m, self.surface.dim_v))
            for s in range(self.num_sheets):
                for v in range(m):
                    sd = shape_operator(self.surface, self.frames[self.frame_index(s, v)])
                    out[s, v] = sd.principal_curvatures
            self._curvatures = out
        return self._curvatures


def _discrete_normal_field(surface: EmbeddedSurface) -> np.ndarray:
    """Consistently oriented unit normal field from the tangent-plane fit."""
    if surface.codim != 1:
        raise ValueError("a single normal field needs codimension one")
    m = len(surface.vertices)
    field = np.zeros((m, surface.ambient_n + 1))
    ref_tri = {}
    for tri in surface.oriented_triangles:
        for pos in range(3):
            v = int(tri[pos])
            if v not in ref_tri:
                ref_tri[v] = tuple(np.roll(tri, -pos))
    for v in range(m):
        n0 = surface.normal_space_basis(v)[0]
        a, b, c = ref_tri[v]
        e1 = surface.vertices[b] - surface.vertices[a]
        e2 = surface.vertices[c] - surface.vertices[a]
        det = np.linalg.det(np.vstack([surface.vertices[v], e1, e2, n0]))
        field[v] = n0 if det > 0 else -n0
    return field


def normal_bundle(
    surface: EmbeddedSurface, fiber_resolution: int = 8
) -> NormalBundle:
    """Sample the unit normal bundle of the surface.

    Codimension one: the analytic normal section when available, else the
    consistently oriented discrete normal, and its negative as the second
    sheet.  Codimension two: equally spaced directions in each fiber circle.
    """
    m = len(surface.vertices)
    if surface.codim == 1:
        if surface.analytic is not None and surface.analytic.normal_at is not None:
            plus = np.array(
                [surface.analytic.normal_at(v, 0.0, 0.0) for v in range(m)]
            )
        else:
            plus = _discrete_normal_field(surface)
        sheets = np.stack([plus, -plus])
    elif surface.codim == 2:
        if fiber_resolution < 2:
            raise ValueError("fiber resolution must be at least 2")
        sheets = np.zeros((fiber_resolution, m, surface.ambient_n + 1))
        for v in range(m):
            n1, n2 = surface.normal_space_basis(v)
            for s in range(fiber_resolution):
                ang = 2 * np.pi * s / fiber_resolution
                sheets[s, v] = np.cos(ang) * n1 + np.sin(ang) * n2
    else:
        raise NotImplementedError(
            "normal bundles are implemented for codimension one and two"
        )
    bundle = NormalBundle(surface, sheets)
    tol_tangent = 2.0 * surface.max_edge_angle
    for frame in bundle.frames:
        x = surface.vertices[frame.base_index]
        if abs(frame.normal @ x) > TOL_UNIT:
            raise ValueError(f"frame normal not tangent to S^n at vertex {frame.base_index}")
        if frame_tangency_defect(surface, frame) > tol_tangent:
            raise ValueError(
                f"frame normal not orthogonal to the surface at vertex {frame.base_index}"
            )
    return bundle


# ---------------------------------------------------------------------------
# shape operators and curvature spheres
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShapeData:
    """Shape operator at a frame, in an orthonormal tangent basis."""

    frame: NormalFrame
    operator: np.ndarray
    principal_curvatures: np.ndarray
    principal_directions: np.ndarray  # columns, in tangent-basis coordinates
    tangent_basis: np.ndarray         # rows, ambient coordinates


def _analytic_shape(surface: EmbeddedSurface, frame: NormalFrame) -> ShapeData:
    jet = surface.analytic.jet(frame.base_index)
    nvec = frame.normal
    e_uu, e_uv, e_vv = jet.duu @ nvec, jet.duv @ nvec, jet.dvv @ nvec
    e1 = jet.du @ jet.du
    f1 = jet.du @ jet.dv
    g1 = jet.dv @ jet.dv
    # orthonormal tangent basis (t1 along du)
    t1 = jet.du / np.sqrt(e1)
    raw2 = jet.dv - f1 / e1 * jet.du
    length2 = np.linalg.norm(raw2)
    t2 = raw2 / length2
    a1, b1 = 1.0 / np.sqrt(e1), 0.0
    a2, b2 = -f1 / (e1 * length2), 1.0 / length2

    def ii(ax, bx, ay, by):
        return ax * ay * e_uu + (ax * by + ay * bx) * e_uv + bx * by * e_vv

    op = np.array(
        [
            [ii(a1, b1, a1, b1), ii(a1, b1, a2, b2)],
            [ii(a1, b1, a2, b2), ii(a2, b2, a2, b2)],
        ]
    )
    curv, dirs = np.linalg.eigh(op)
    return ShapeData(frame, op, curv, dirs, np.vstack([t1, t2]))


def _neighbor_normal(surface: EmbeddedSurface, u: int, nvec: np.ndarray) -> np.ndarray:
    """Unit normal at vertex u on the same sheet as the direction nvec.

    Uses the analytic section when the surface has one; otherwise carries
    nvec into the neighbor's fitted normal space.
    """
    if surface.analytic is not None and surface.analytic.normal_at is not None:
        n = surface.analytic.normal_at(u, 0.0, 0.0)
        return n if n @ nvec > 0 else -n
    nb = surface.normal_space_basis(u)
    carried = nb.T @ (nb @ nvec)
    norm = np.linalg.norm(carried)
    if norm < 1e-8:
        raise ValueError(f"normal transport degenerate at vertex {u}")
    return carried / norm


def _discrete_shape(surface: EmbeddedSurface, frame: NormalFrame) -> ShapeData:
    v = frame.base_index
    x = surface.vertices[v]
    nvec = frame.normal
    basis = surface.tangent_basis(v)
    nbrs = surface.link_vs[surface.link_off[v] : surface.link_off[v + 1]]
    rows = []
    rhs = []
    for u in nbrs:
        du = surface.vertices[u] - x
        dx = basis @ (du - (du @ x) * x)
        dn = basis @ (_neighbor_normal(surface, u, nvec) - nvec)
        for r in range(2):
            rows.append([dx[0] * (r == 0), dx[1] * (r == 0), dx[0] * (r == 1), dx[1] * (r == 1)])
            rhs.append(-dn[r])
    rows = np.asarray(rows)
    sol, _, rank, _ = np.linalg.lstsq(rows, np.asarray(rhs), rcond=None)
    if rank < 4:
        raise ValueError(f"ill-conditioned shape fit at vertex {v}")
    op = sol.reshape(2, 2)
    op = 0.5 * (op + op.T)
    curv, dirs = np.linalg.eigh(op)
    return ShapeData(frame, op, curv, dirs, basis)


def shape_operator(
    surface: EmbeddedSurface, frame: NormalFrame, method: str = "auto"
) -> ShapeData:
    """Shape operator for the frame's normal direction.

    ``analytic`` uses the chart's fundamental forms; ``discrete`` fits the
    normal-field differential over the 1-ring; ``auto`` prefers analytic.
    """
    if method not in ("auto", "analytic", "discrete"):
        raise ValueError("method must be auto, analytic or discrete")
    if method == "analytic" or (method == "auto" and surface.analytic is not None):
        if surface.analytic is None:
            raise ValueError("surface has no analytic handle")
        return _analytic_shape(surface, frame)
    return _discrete_shape(surface, frame)


def curvature_spheres(
    surface: EmbeddedSurface, sd: ShapeData, group_tol: float = 1e-6
):
    """Tangent spheres whose centers are focal points, with multiplicities.

    Each principal curvature kappa yields the radius r = arccot(kappa) in
    (0, pi) and center cos r x + sin r N.
    """
    from .quadric import OrientedSphere

    x = surface.vertices[sd.frame.base_index]
    nvec = sd.frame.normal
    out = []
    used = np.zeros(len(sd.principal_curvatures), dtype=bool)
    for i, kappa in enumerate(sd.principal_curvatures):
        if used[i]:
            continue
        mult = 0
        for j in range(i, len(sd.principal_curvatures)):
            if not used[j] and abs(sd.principal_curvatures[j] - kappa) < group_tol:
                used[j] = True
                mult += 1
        r = float(np.arctan2(1.0, kappa))
        center = np.cos(r) * x + np.sin(r) * nvec
        center /= np.linalg.norm(center)
        out.append((OrientedSphere(center, r), mult))
    return out


# ---------------------------------------------------------------------------
# the lift to lines on the quadric
# ---------------------------------------------------------------------------

class LegendreLift:
    """Lines on the quadric attached to every frame of a normal bundle."""

    def __init__(self, surface: EmbeddedSurface, bundle: NormalBundle):
        self.surface = surface
        self.bundle = bundle
        self.lines: list[QuadricLine] = [
            contact_to_line(ContactElement(surface.vertices[f.base_index], f.normal))
            for f in bundle.frames
        ]

    def __len__(self) -> int:
        return len(self.lines)

    def contact_element(self, frame_index: int) -> ContactElement:
        f = self.bundle.frames[frame_index]
        return ContactElement(self.surface.vertices[f.base_index], f.normal)


def legendre_lift(surface: EmbeddedSurface, bundle: NormalBundle) -> LegendreLift:
    return LegendreLift(surface, bundle)
