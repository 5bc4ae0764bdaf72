"""Scalar fields on surfaces whose level sets are one-parameter sphere families.

The central field: given a contact element (p, xi), every point x != p of S^n
lies on exactly one unoriented sphere of the parabolic pencil of (p, xi); its
radius r(x) in (0, pi) solves cos r = x . (cos r p + sin r xi) and has the
closed form r = atan2(1 - x.p, x.xi).  Spherical distance and height fields
are the classical comparisons: their level sets are concentric spheres.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadric import ContactElement
from .surfaces import EmbeddedSurface

FIELD_KINDS = ("pencil_radius", "spherical_distance", "height")

# guard against evaluating the pencil field at its base point
MIN_BASE_ANGLE = 1e-6


def pencil_radius(c: ContactElement, x):
    """Radius in (0, pi) of the pencil sphere of (p, xi) through x.

    Closed form: the implicit relation rearranges to
    cos r (1 - x.p) = sin r (x.xi) with 1 - x.p > 0 away from p, so
    r = atan2(1 - x.p, x.xi).  Accepts a single point or a batch (m, n+1).
    """
    x = np.asarray(x, dtype=float)
    dot_p = x @ c.point
    if np.any(1.0 - dot_p < 0.5 * MIN_BASE_ANGLE**2):
        raise ValueError("pencil radius is undefined at (or too near) the base point")
    return np.arctan2(1.0 - dot_p, x @ c.direction)


@dataclass(frozen=True)
class ScalarField:
    """Per-vertex values of a pencil-radius, distance, or height function."""

    surface: EmbeddedSurface
    values: np.ndarray
    kind: str
    contact: ContactElement | None = None
    base_point: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.surface.vertices):
            raise ValueError("one value per vertex required")


def build_field(
    surface: EmbeddedSurface,
    kind: str,
    *,
    contact: ContactElement | None = None,
    base_point=None,
    min_base_angle: float | None = None,
) -> ScalarField:
    """Evaluate the chosen function at every vertex.

    For the pencil field the base point must keep an angular distance of at
    least ``min_base_angle`` (default: the surface's maximum edge angle) from
    every vertex.
    """
    verts = surface.vertices
    if kind == "pencil_radius":
        if contact is None:
            raise ValueError("pencil field needs a contact element")
        gap = min_base_angle if min_base_angle is not None else surface.max_edge_angle
        if surface.min_vertex_angle(contact.point) < gap:
            raise ValueError("pencil base point is too close to the surface")
        values = pencil_radius(contact, verts)
        return ScalarField(surface, values, kind, contact=contact)
    if kind == "spherical_distance":
        p = np.asarray(base_point, dtype=float)
        values = np.arccos(np.clip(verts @ p, -1.0, 1.0))
        return ScalarField(surface, values, kind, base_point=p)
    if kind == "height":
        p = np.asarray(base_point, dtype=float)
        return ScalarField(surface, verts @ p, kind, base_point=p)
    raise ValueError(f"unknown field kind {kind!r}")
