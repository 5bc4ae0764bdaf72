"""PL critical points of vertex fields and the analytic criticality tests.

A vertex of a triangulated closed surface is classified by its lower link
(the induced part of its link cycle on strictly lower neighbors, ties broken
by vertex index): empty lower link is a minimum, the full circle a maximum,
m >= 2 arcs a saddle counted with multiplicity m - 1.  Criticality of the
pencil-radius field at a vertex is equivalent to tangency of the pencil
sphere through it, so the tangential component of the sphere center is the
analytic residual; at critical points the Hessian is
(sin r A_N - cos r I) / C with a provably negative coefficient
C = -sin r - x0 . (-sin r p + cos r xi), degenerate exactly when cot r is a
principal curvature for the aligned normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .fields import ScalarField, pencil_radius
from .quadric import ContactElement
from .surfaces import EmbeddedSurface, NormalFrame, ShapeData
from .tolerances import TOL_EIG, TOL_FLAT, TOL_UNIT


@dataclass
class CriticalReport:
    """Census of PL critical vertices of one field."""

    minima: list
    maxima: list
    saddles: list  # (vertex, multiplicity)
    total: int
    degenerate_flag: bool
    diagnostics: dict = dc_field(default_factory=dict)

    def critical_vertices(self):
        out = [v for v, _ in self.minima]
        out += [v for v, _ in self.saddles]
        out += [v for v, _ in self.maxima]
        return out

    def classification(self, num_vertices: int) -> list[str]:
        labels = ["regular"] * num_vertices
        for v, _ in self.minima:
            labels[v] = "min"
        for v, _ in self.maxima:
            labels[v] = "max"
        for v, m in self.saddles:
            labels[v] = f"saddle:{m}"
        return labels


def value_order(values: np.ndarray) -> np.ndarray:
    """Total order position per vertex: by value, ties by vertex index."""
    nv = len(values)
    order = np.lexsort((np.arange(nv), values))
    pos = np.empty(nv, dtype=np.int64)
    pos[order] = np.arange(nv)
    return pos


def pl_critical_points(field: ScalarField, tol_flat: float = TOL_FLAT) -> CriticalReport:
    """Classify every vertex by its lower link and total the critical count."""
    surface = field.surface
    values = field.values
    pos = value_order(values)
    n_lower, n_arcs = _kernels.classify_links(pos, surface.link_off, surface.link_vs)
    n_lower = np.asarray(n_lower)
    n_arcs = np.asarray(n_arcs)
    deg = np.diff(surface.link_off)

    minima_mask = n_lower == 0
    maxima_mask = n_lower == deg
    saddle_mask = ~minima_mask & ~maxima_mask & (n_arcs >= 2)
    mult = np.where(saddle_mask, n_arcs - 1, 0)

    minima = [(int(v), 1) for v in np.flatnonzero(minima_mask)]
    maxima = [(int(v), 1) for v in np.flatnonzero(maxima_mask)]
    saddles = [(int(v), int(mult[v])) for v in np.flatnonzero(saddle_mask)]
    total = len(minima) + len(maxima) + int(mult.sum())

    degenerate = bool(np.any(mult >= 2))
    if not degenerate:
        critical = minima_mask | maxima_mask | saddle_mask
        for v in np.flatnonzero(critical):
            nbrs = surface.link_vs[surface.link_off[v] : surface.link_off[v + 1]]
            if np.min(np.abs(values[nbrs] - values[v])) < tol_flat:
                degenerate = True
                break

    return CriticalReport(minima, maxima, saddles, total, degenerate)


def tangent_sphere(c: ContactElement, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Center and radius of the pencil sphere through x."""
    r = float(pencil_radius(c, x))
    q = np.cos(r) * c.point + np.sin(r) * c.direction
    return q, r


def criticality_residual(surface: EmbeddedSurface, vertex: int, c: ContactElement) -> float:
    """Norm of the tangential part of the pencil-sphere center at the vertex.

    Near zero exactly when the sphere through the vertex is tangent to the
    surface there, i.e. when the vertex is critical for the pencil field.
    """
    q, _ = tangent_sphere(c, surface.vertices[vertex])
    return float(np.linalg.norm(surface.tangent_basis(vertex) @ q))


def aligned_normal(c: ContactElement, x: np.ndarray) -> np.ndarray:
    """Unit normal N with q = cos r x + sin r N, defined at tangency points."""
    q, r = tangent_sphere(c, x)
    n = (q - np.cos(r) * x) / np.sin(r)
    return n / np.linalg.norm(n)


@dataclass(frozen=True)
class HessianData:
    matrix: np.ndarray
    coefficient: float
    eigenvalues: np.ndarray
    index: int
    degenerate: bool


def hessian_analytic(
    sd: ShapeData,
    c: ContactElement,
    surface: EmbeddedSurface,
    crit_tol: float | None = None,
    tol_eig: float = TOL_EIG,
) -> HessianData:
    """Hessian of the pencil field at a critical vertex, in the principal basis.

    H = (1/C)(sin r A_N - cos r I) with C = -sin r - x0 . (-sin r p + cos r xi),
    which is always negative.  The Morse index is the number of negative
    eigenvalues; degeneracy means cot r is a principal curvature.
    """
    vertex = sd.frame.base_index
    x0 = surface.vertices[vertex]
    if crit_tol is None:
        crit_tol = 2.0 * surface.max_edge_angle
    residual = criticality_residual(surface, vertex, c)
    if residual > crit_tol:
        raise ValueError(
            f"vertex {vertex} is not critical: tangency residual {residual:.3e}"
        )
    q, r = tangent_sphere(c, x0)
    n_expected = aligned_normal(c, x0)
    if n_expected @ sd.frame.normal < 0:
        raise ValueError("frame normal points to the opposite sheet of the tangency")
    coeff = -np.sin(r) - x0 @ (-np.sin(r) * c.point + np.cos(r) * c.direction)
    if coeff >= 0:
        raise ValueError("tangency coefficient must be negative")
    raw = np.sin(r) * sd.principal_curvatures - np.cos(r)
    eigs = raw / coeff
    matrix = np.diag(eigs)
    index = int(np.sum(eigs < 0))
    degenerate = bool(np.any(np.abs(eigs) < tol_eig))
    return HessianData(matrix, float(coeff), eigs, index, degenerate)


def sard_map_F(
    surface: EmbeddedSurface, frame: NormalFrame, r: float, eta: np.ndarray
) -> ContactElement:
    """Contact element whose pencil contains the normal-exponential sphere.

    With q = cos r x + sin r N and eta a unit tangent at q, the image is
    (cos r q + sin r eta, sin r q - cos r eta); orthogonality of the output
    pair is an algebraic identity.
    """
    if not 0 < r < np.pi:
        raise ValueError("radius must lie in (0, pi)")
    eta = np.asarray(eta, dtype=float)
    if abs(np.linalg.norm(eta) - 1.0) > TOL_UNIT:
        raise ValueError("eta must be a unit vector")
    x = surface.vertices[frame.base_index]
    q = np.cos(r) * x + np.sin(r) * frame.normal
    if abs(eta @ q) > TOL_UNIT:
        raise ValueError("eta must be tangent to S^n at the sphere center")
    return ContactElement(
        np.cos(r) * q + np.sin(r) * eta, np.sin(r) * q - np.cos(r) * eta
    )


def chart_coefficients(surface: EmbeddedSurface, vertex: int, direction: np.ndarray):
    """Chart coordinates (c_u, c_v) with c_u phi_u + c_v phi_v = direction."""
    jet = surface.analytic.jet(vertex)
    gram = np.array(
        [[jet.du @ jet.du, jet.du @ jet.dv], [jet.du @ jet.dv, jet.dv @ jet.dv]]
    )
    rhs = np.array([jet.du @ direction, jet.dv @ direction])
    return np.linalg.solve(gram, rhs)


def sard_directional_derivative(
    surface: EmbeddedSurface,
    frame: NormalFrame,
    r: float,
    eta: np.ndarray,
    direction: np.ndarray,
    h_fd: float = 1e-6,
) -> float:
    """Finite-difference norm of dF along a surface direction (fixed r, fiber).

    The base point moves along the analytic chart with the normal carried by
    the analytic section; the fiber vector follows by projecting the starting
    eta onto the moving tangent space.  At a curvature-sphere configuration
    (cot r a principal curvature, direction the principal vector) the sphere
    center is stationary to first order and the result is O(h_fd^2).
    """
    if surface.analytic is None or surface.analytic.normal_at is None:
        raise ValueError("needs an analytic surface with a normal section")
    vertex = frame.base_index
    sign = 1.0 if frame.normal @ surface.analytic.normal_at(vertex, 0.0, 0.0) > 0 else -1.0
    cu, cv = chart_coefficients(surface, vertex, direction)
    eta0 = np.asarray(eta, dtype=float)

    def f_at(t):
        du, dv = t * cu, t * cv
        x = surface.analytic.chart_point(vertex, du, dv)
        n = sign * surface.analytic.normal_at(vertex, du, dv)
        q = np.cos(r) * x + np.sin(r) * n
        e = eta0 - (eta0 @ q) * q
        e /= np.linalg.norm(e)
        return np.concatenate(
            [np.cos(r) * q + np.sin(r) * e, np.sin(r) * q - np.cos(r) * e]
        )

    diff = (f_at(h_fd) - f_at(-h_fd)) / (2.0 * h_fd)
    return float(np.linalg.norm(diff))
