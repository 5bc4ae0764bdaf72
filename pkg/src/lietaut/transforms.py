"""Projective transformations preserving the quadric: O(n+1,2)/{+-I}.

Group elements are (n+3)x(n+3) matrices A with A^T J A = J for the Gram
matrix J = diag(-1, 1, ..., 1, -1).  They act on quadric points and on lines
of the quadric, hence on oriented spheres and parabolic pencils; oriented
contact is preserved.  The subgroup fixing the last coordinate maps point
spheres to point spheres (conformal transformations of S^n); the rotations
in the (first, last) coordinate plane shift every signed radius by a fixed
amount while fixing centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadric import ProjectivePoint, QuadricLine, signature_matrix
from .tolerances import TOL_GROUP


def group_residual(matrix: np.ndarray, ambient_n: int) -> float:
    """Max-norm of A^T J A - J."""
    j = signature_matrix(ambient_n)
    return float(np.max(np.abs(matrix.T @ j @ matrix - j)))


@dataclass(frozen=True)
class LieTransformation:
    """A validated quadric-preserving projective transformation."""

    matrix: np.ndarray
    ambient_n: int

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", matrix)
        size = self.ambient_n + 3
        if matrix.shape != (size, size):
            raise ValueError(f"expected a {size}x{size} matrix, got {matrix.shape}")
        res = group_residual(matrix, self.ambient_n)
        if res >= TOL_GROUP:
            raise ValueError(
                f"matrix does not preserve the signature form: residual {res:.3e}"
            )

    def inverse(self) -> "LieTransformation":
        j = signature_matrix(self.ambient_n)
        return LieTransformation(j @ self.matrix.T @ j, self.ambient_n)

    def compose(self, other: "LieTransformation") -> "LieTransformation":
        """The transformation acting as self after other."""
        if self.ambient_n != other.ambient_n:
            raise ValueError("ambient dimension mismatch")
        return LieTransformation(self.matrix @ other.matrix, self.ambient_n)

    def is_mobius(self, tol: float = TOL_GROUP) -> bool:
        """True when the last coordinate axis is fixed (point spheres preserved)."""
        last = np.zeros(self.ambient_n + 3)
        last[-1] = 1.0
        col = self.matrix @ last
        row = self.matrix.T @ last
        return (
            float(np.max(np.abs(col - np.sign(col[-1]) * last))) < tol
            and float(np.max(np.abs(row - np.sign(row[-1]) * last))) < tol
        )


def validate(matrix, ambient_n: int | None = None) -> LieTransformation:
    """Wrap a matrix as a transformation, or raise with the residual norm."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("transformation matrix must be square")
    if ambient_n is None:
        ambient_n = matrix.shape[0] - 3
    if ambient_n < 1:
        raise ValueError("matrix too small for any ambient dimension")
    return LieTransformation(matrix, ambient_n)


def identity(ambient_n: int) -> LieTransformation:
    return LieTransformation(np.eye(ambient_n + 3), ambient_n)


def parallel_transformation(t: float, ambient_n: int) -> LieTransformation:
    """Radius shift by t: rotation in the (first, last) coordinate plane.

    On sphere coordinates (cos rho, p, sin rho) the action gives
    (cos(rho+t), p, sin(rho+t)): centers fixed, signed radius shifted by t.
    """
    size = ambient_n + 3
    a = np.eye(size)
    c, s = np.cos(t), np.sin(t)
    a[0, 0] = c
    a[0, -1] = -s
    a[-1, 0] = s
    a[-1, -1] = c
    return LieTransformation(a, ambient_n)


def mobius_from_lorentz(lorentz: np.ndarray) -> LieTransformation:
    """Extend a signature-(n+1,1) orthogonal matrix by a fixed last coordinate.

    The result preserves the hyperplane of point spheres, so it acts as a
    conformal diffeomorphism of S^n.
    """
    lorentz = np.asarray(lorentz, dtype=float)
    if lorentz.ndim != 2 or lorentz.shape[0] != lorentz.shape[1]:
        raise ValueError("Lorentz block must be square")
    m = lorentz.shape[0]
    ambient_n = m - 2
    if ambient_n < 1:
        raise ValueError("Lorentz block too small")
    jm = np.eye(m)
    jm[0, 0] = -1.0
    res = float(np.max(np.abs(lorentz.T @ jm @ lorentz - jm)))
    if res >= TOL_GROUP:
        raise ValueError(
            f"block does not preserve the signature-(n+1,1) form: residual {res:.3e}"
        )
    a = np.eye(m + 1)
    a[:m, :m] = lorentz
    return LieTransformation(a, ambient_n)


def apply_point(t: LieTransformation, q: ProjectivePoint) -> ProjectivePoint:
    """Image [A x], canonically normalized; quadric points stay on the quadric."""
    if t.ambient_n != q.ambient_n:
        raise ValueError("ambient dimension mismatch")
    return ProjectivePoint.from_coords(t.matrix @ q.rep.coords, q.ambient_n)


def apply_line(t: LieTransformation, line: QuadricLine) -> QuadricLine:
    """Transform both spanning points and re-base to the canonical pair."""
    a = apply_point(t, line.point_sphere)
    b = apply_point(t, line.great_sphere)
    return QuadricLine.from_span(a, b)


def rotation_extension(rotation: np.ndarray) -> LieTransformation:
    """diag(1, R, 1) for an orthogonal R acting on the middle block."""
    rotation = np.asarray(rotation, dtype=float)
    m = rotation.shape[0]
    a = np.eye(m + 2)
    a[1:-1, 1:-1] = rotation
    return LieTransformation(a, m - 1)


def mobius_boost(s: float, axis: int, ambient_n: int) -> LieTransformation:
    """Hyperbolic rotation of the (first, axis) plane; fixes the last coordinate.

    ``axis`` indexes a middle-block (spacelike) coordinate, 1-based within
    the homogeneous coordinates.
    """
    if not 1 <= axis <= ambient_n + 1:
        raise ValueError("boost axis must index a middle-block coordinate")
    size = ambient_n + 3
    a = np.eye(size)
    c, sh = np.cosh(s), np.sinh(s)
    a[0, 0] = c
    a[0, axis] = sh
    a[axis, 0] = sh
    a[axis, axis] = c
    return LieTransformation(a, ambient_n)


def random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish rotation from the QR of a Gaussian matrix, det +1."""
    m = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_lie_transformation(
    rng: np.random.Generator,
    ambient_n: int,
    t_range: tuple[float, float] = (-np.pi / 4, np.pi / 4),
    boost_scale: float = 0.5,
) -> LieTransformation:
    """Random group element: rotation o parallel shift o conformal boost.

    With ``t_range=(0, 0)`` and ``boost_scale=0`` the result is a rotation
    extension, hence maps point spheres to point spheres.
    """
    rot = rotation_extension(random_rotation(rng, ambient_n + 1))
    t = float(rng.uniform(*t_range)) if t_range != (0.0, 0.0) else 0.0
    par = parallel_transformation(t, ambient_n)
    if boost_scale > 0:
        s = float(rng.uniform(-boost_scale, boost_scale))
        axis = int(rng.integers(1, ambient_n + 2))
        boost = mobius_boost(s, axis, ambient_n)
    else:
        boost = identity(ambient_n)
    return rot.compose(par).compose(boost)
