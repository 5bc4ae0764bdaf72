"""Oriented spheres of S^n as points of a projective quadric.

The ambient model: homogeneous coordinates in R^{n+3} carrying the indefinite
inner product

    <x, y> = -x_1 y_1 + x_2 y_2 + ... + x_{n+2} y_{n+2} - x_{n+3} y_{n+3}

of signature (n+1, 2).  An oriented sphere with unit center p in R^{n+1} and
signed radius rho in (-pi, pi) corresponds to the projective class of
(cos rho, p, sin rho), which is lightlike.  Lines contained in the quadric
encode parabolic pencils of spheres: all oriented spheres through one contact
element (p, xi) of the unit tangent bundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .tolerances import (
    TOL_CONTACT,
    TOL_NONZERO,
    TOL_PROJ,
    TOL_QUADRIC,
    TOL_RANK,
    TOL_UNIT,
)


def signature_matrix(ambient_n: int) -> np.ndarray:
    """Gram matrix diag(-1, 1, ..., 1, -1) of the signature-(n+1,2) form."""
    j = np.eye(ambient_n + 3)
    j[0, 0] = -1.0
    j[-1, -1] = -1.0
    return j


def inner_coords(a, b):
    """Indefinite inner product on raw coordinate arrays (broadcasts)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = np.sum(a[..., 1:-1] * b[..., 1:-1], axis=-1)
    return -a[..., 0] * b[..., 0] + mid - a[..., -1] * b[..., -1]


@dataclass(frozen=True)
class LieVector:
    """A vector of the signature-(n+1,2) coordinate space R^{n+3}."""

    coords: np.ndarray
    ambient_n: int

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if coords.shape != (self.ambient_n + 3,):
            raise ValueError(
                f"expected {self.ambient_n + 3} coordinates, got shape {coords.shape}"
            )

    def self_inner(self) -> float:
        return float(inner_coords(self.coords, self.coords))

    def causal_type(self, tol: float = TOL_QUADRIC) -> str:
        """'spacelike', 'timelike' or 'lightlike' by the sign of <v, v>.

        The tolerance applies after scaling to a unit-Euclidean-norm
        representative, so the classification is scale-invariant.
        """
        norm2 = float(self.coords @ self.coords)
        if norm2 == 0.0:
            raise ValueError("zero vector has no causal type")
        q = self.self_inner() / norm2
        if abs(q) < tol:
            return "lightlike"
        return "spacelike" if q > 0 else "timelike"


def lie_inner(x: LieVector, y: LieVector) -> float:
    """Signature-(n+1,2) bilinear form; symmetric and bilinear by construction."""
    if x.ambient_n != y.ambient_n:
        raise ValueError(
            f"ambient dimension mismatch: {x.ambient_n} vs {y.ambient_n}"
        )
    return float(inner_coords(x.coords, y.coords))


def _canonicalize(coords: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(coords))
    if norm < TOL_NONZERO:
        raise ValueError("cannot normalize a (near-)zero homogeneous vector")
    v = coords / norm
    for x in v:
        if abs(x) > TOL_NONZERO:
            if x < 0:
                v = -v
            break
    return v


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A point of P^{n+2} stored through a chosen representative.

    The canonical representative has Euclidean norm 1 and its first
    significant coordinate positive; two points are equal when their
    representatives are parallel.
    """

    rep: LieVector
    normalized: bool = False

    def __post_init__(self):
        if np.max(np.abs(self.rep.coords)) < TOL_NONZERO:
            raise ValueError("projective point needs a nonzero representative")

    @classmethod
    def from_coords(cls, coords, ambient_n: int, normalize: bool = True) -> "ProjectivePoint":
        coords = np.asarray(coords, dtype=float)
        if normalize:
            coords = _canonicalize(coords)
        return cls(LieVector(coords, ambient_n), normalized=normalize)

    @property
    def ambient_n(self) -> int:
        return self.rep.ambient_n

    def canonical(self) -> "ProjectivePoint":
        if self.normalized:
            return self
        return ProjectivePoint.from_coords(self.rep.coords, self.ambient_n)

    def quadric_residual(self) -> float:
        """|<v, v>| of the canonical (unit-norm) representative."""
        v = self.canonical().rep.coords
        return abs(float(inner_coords(v, v)))

    def on_quadric(self, tol: float = TOL_QUADRIC) -> bool:
        return self.quadric_residual() < tol

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        if self.ambient_n != other.ambient_n:
            return False
        u = self.canonical().rep.coords
        w = other.canonical().rep.coords
        return abs(float(u @ w)) >= 1.0 - TOL_PROJ

    __hash__ = None


class SphereKind(Enum):
    POINT_SPHERE = "point_sphere"
    GREAT_SPHERE = "great_sphere"
    ORDINARY = "ordinary"


@dataclass(frozen=True)
class OrientedSphere:
    """Oriented hypersphere of S^n: unit center and signed radius in (-pi, pi).

    Radius 0 is a point sphere (no orientation), |radius| = pi/2 a great
    sphere.  The same oriented sphere also admits the representation
    (-center, radius -/+ pi); the canonical range used by
    :func:`quadric_to_sphere` is (-pi/2, pi/2].
    """

    center: np.ndarray
    signed_radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "signed_radius", float(self.signed_radius))
        if abs(np.linalg.norm(center) - 1.0) > TOL_UNIT:
            raise ValueError("sphere center must be a unit vector")
        if not -np.pi < self.signed_radius < np.pi:
            raise ValueError("signed radius must lie in (-pi, pi)")

    @property
    def ambient_n(self) -> int:
        return len(self.center) - 1

    @property
    def kind(self) -> SphereKind:
        if abs(self.signed_radius) < TOL_UNIT:
            return SphereKind.POINT_SPHERE
        if abs(abs(self.signed_radius) - np.pi / 2) < TOL_UNIT:
            return SphereKind.GREAT_SPHERE
        return SphereKind.ORDINARY


@dataclass(frozen=True)
class ContactElement:
    """A unit tangent vector of S^n: base point p and direction xi, p . xi = 0."""

    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float)
        xi = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", xi)
        if p.shape != xi.shape:
            raise ValueError("point and direction must have the same dimension")
        if abs(np.linalg.norm(p) - 1.0) > TOL_UNIT:
            raise ValueError("contact point must be a unit vector")
        if abs(np.linalg.norm(xi) - 1.0) > TOL_UNIT:
            raise ValueError("contact direction must be a unit vector")
        if abs(float(p @ xi)) > TOL_UNIT:
            raise ValueError("contact direction must be tangent to S^n at the point")

    @property
    def ambient_n(self) -> int:
        return len(self.point) - 1

    def reversed(self) -> "ContactElement":
        return ContactElement(self.point, -self.direction)


@dataclass(frozen=True, eq=False)
class QuadricLine:
    """A projective line on the quadric, stored by its two distinguished points.

    Every such line contains exactly one point sphere (last coordinate 0) and
    one great sphere (first coordinate 0); those two representatives span the
    line and determine the contact element it encodes.
    """

    point_sphere: ProjectivePoint
    great_sphere: ProjectivePoint

    def __post_init__(self):
        k1 = self.point_sphere.canonical()
        k2 = self.great_sphere.canonical()
        object.__setattr__(self, "point_sphere", k1)
        object.__setattr__(self, "great_sphere", k2)
        if k1.ambient_n != k2.ambient_n:
            raise ValueError("spanning points have mismatched ambient dimension")
        if not k1.on_quadric():
            raise ValueError("point-sphere representative is not on the quadric")
        if not k2.on_quadric():
            raise ValueError("great-sphere representative is not on the quadric")
        if abs(float(inner_coords(k1.rep.coords, k2.rep.coords))) > TOL_QUADRIC:
            raise ValueError("spanning points do not span a line on the quadric")
        if abs(k1.rep.coords[-1]) > TOL_QUADRIC:
            raise ValueError("point-sphere representative must have last coordinate 0")
        if abs(k2.rep.coords[0]) > TOL_QUADRIC:
            raise ValueError("great-sphere representative must have first coordinate 0")

    @property
    def ambient_n(self) -> int:
        return self.point_sphere.ambient_n

    @classmethod
    def from_span(cls, a: ProjectivePoint, b: ProjectivePoint) -> "QuadricLine":
        """Re-base an arbitrary spanning pair to the canonical representatives.

        Solves the 2x2 combinations annihilating the last (point sphere) and
        first (great sphere) coordinate.
        """
        u = a.canonical().rep.coords
        w = b.canonical().rep.coords
        n = a.ambient_n
        point_rep = w[-1] * u - u[-1] * w
        great_rep = w[0] * u - u[0] * w
        if np.linalg.norm(point_rep) < 1e-8 or np.linalg.norm(great_rep) < 1e-8:
            raise ValueError("numerically parallel spanning points")
        return cls(
            ProjectivePoint.from_coords(point_rep, n),
            ProjectivePoint.from_coords(great_rep, n),
        )


def sphere_to_quadric(s: OrientedSphere) -> ProjectivePoint:
    """Quadric point [(cos rho, p, sin rho)] of an oriented sphere."""
    rho = s.signed_radius
    coords = np.concatenate(([np.cos(rho)], s.center, [np.sin(rho)]))
    return ProjectivePoint.from_coords(coords, s.ambient_n)


def quadric_to_sphere(q: ProjectivePoint) -> OrientedSphere:
    """Canonical sphere of a quadric point: radius in (-pi/2, pi/2].

    The representative is scaled so x_1^2 + x_{n+3}^2 = 1 with x_1 >= 0
    (and x_{n+3} > 0 when x_1 vanishes); the middle block is then the unit
    center and atan2 recovers the radius.
    """
    if not q.on_quadric():
        raise ValueError("projective point is not on the quadric")
    v = q.canonical().rep.coords
    s2 = v[0] * v[0] + v[-1] * v[-1]
    if s2 < TOL_NONZERO:
        raise ValueError("degenerate middle block: no finite center/radius")
    w = v / np.sqrt(s2)
    if w[0] < 0 or (abs(w[0]) < TOL_QUADRIC and w[-1] < 0):
        w = -w
    rho = float(np.arctan2(w[-1], w[0]))
    return OrientedSphere(w[1:-1], rho)


def oriented_contact(a: OrientedSphere, b: OrientedSphere) -> bool:
    """True when the two oriented spheres are tangent with matching orientation."""
    if a.ambient_n != b.ambient_n:
        raise ValueError("spheres live in different ambient dimensions")
    ka = sphere_to_quadric(a).rep.coords
    kb = sphere_to_quadric(b).rep.coords
    return abs(float(inner_coords(ka, kb))) < TOL_CONTACT


def contact_to_line(c: ContactElement) -> QuadricLine:
    """Line spanned by the point sphere (1, p, 0) and great sphere (0, xi, 1)."""
    n = c.ambient_n
    k1 = np.concatenate(([1.0], c.point, [0.0]))
    k2 = np.concatenate(([0.0], c.direction, [1.0]))
    return QuadricLine(
        ProjectivePoint.from_coords(k1, n),
        ProjectivePoint.from_coords(k2, n),
    )


def line_to_contact(line: QuadricLine) -> ContactElement:
    """Contact element (p, xi) encoded by a line on the quadric."""
    k = line.point_sphere.rep.coords
    g = line.great_sphere.rep.coords
    if abs(k[0]) < TOL_NONZERO or abs(g[-1]) < TOL_NONZERO:
        raise ValueError("degenerate distinguished representatives")
    p = k[1:-1] / k[0]
    xi = g[1:-1] / g[-1]
    return ContactElement(p, xi)


def pencil_sphere(c: ContactElement, t: float) -> OrientedSphere:
    """Member of the parabolic pencil of (p, xi): center cos t p + sin t xi, radius t."""
    t = float(t)
    if not -np.pi < t < np.pi:
        raise ValueError("pencil parameter must lie in (-pi, pi)")
    center = np.cos(t) * c.point + np.sin(t) * c.direction
    return OrientedSphere(center, t)


def lines_intersect(l1: QuadricLine, l2: QuadricLine) -> bool:
    """True when the two lines meet, i.e. their pencils share an oriented sphere.

    Decided by the singular-value ratio of the stacked spanning vectors:
    a common point forces the four representatives into a rank-3 subspace.
    """
    if l1.ambient_n != l2.ambient_n:
        raise ValueError("lines live in different ambient dimensions")
    m = np.vstack(
        [
            l1.point_sphere.rep.coords,
            l1.great_sphere.rep.coords,
            l2.point_sphere.rep.coords,
            l2.great_sphere.rep.coords,
        ]
    )
    sv = np.linalg.svd(m, compute_uv=False)
    return sv[3] / sv[0] < TOL_RANK


def random_contact_element(rng: np.random.Generator, ambient_n: int) -> ContactElement:
    """Uniform draw from the unit tangent bundle of S^n.

    The base point is a normalized isotropic Gaussian; the direction is an
    isotropic Gaussian projected to the tangent space and normalized.
    Deterministic given the generator state.
    """
    if ambient_n < 2:
        raise ValueError("need ambient dimension at least 2")
    while True:
        p = rng.standard_normal(ambient_n + 1)
        norm = np.linalg.norm(p)
        if norm > 1e-8:
            p /= norm
            break
    while True:
        g = rng.standard_normal(ambient_n + 1)
        g -= (g @ p) * p
        norm = np.linalg.norm(g)
        if norm > 1e-6:
            return ContactElement(p, g / norm)
