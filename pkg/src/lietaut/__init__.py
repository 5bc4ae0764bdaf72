"""Numerical sphere geometry on the projective quadric.

Oriented spheres of S^n as lightlike projective classes, the transformation
group preserving them, lifts of triangulated surfaces to lines on the
quadric, PL Morse counting of sphere-family fields, GF(2) homology checks,
and taut / lift-level taut verdicts.
"""

from ._kernels import KERNEL_BACKEND
from .fields import ScalarField, build_field, pencil_radius
from .homology import (
    SimplicialComplex,
    SublevelComplex,
    betti_numbers,
    betti_sum,
    induced_map_injective,
    kuiper_scan,
    sublevel,
)
from .morse import (
    CriticalReport,
    criticality_residual,
    hessian_analytic,
    pl_critical_points,
    sard_map_F,
)
from .quadric import (
    ContactElement,
    LieVector,
    OrientedSphere,
    ProjectivePoint,
    QuadricLine,
    SphereKind,
    contact_to_line,
    lie_inner,
    line_to_contact,
    lines_intersect,
    oriented_contact,
    pencil_sphere,
    quadric_to_sphere,
    random_contact_element,
    sphere_to_quadric,
)
from .surfaces import (
    AnalyticHandle,
    EmbeddedSurface,
    LegendreLift,
    NormalBundle,
    NormalFrame,
    ShapeData,
    catalog_surface,
    curvature_spheres,
    legendre_lift,
    load_surface,
    normal_bundle,
    save_surface,
    shape_operator,
)
from .transforms import (
    LieTransformation,
    apply_line,
    apply_point,
    mobius_from_lorentz,
    parallel_transformation,
    random_lie_transformation,
    validate,
)
from .verdicts import TautVerdict, lie_taut_check, taut_check

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "AnalyticHandle",
    "ContactElement",
    "CriticalReport",
    "EmbeddedSurface",
    "LegendreLift",
    "LieTransformation",
    "LieVector",
    "NormalBundle",
    "NormalFrame",
    "OrientedSphere",
    "ProjectivePoint",
    "QuadricLine",
    "ScalarField",
    "ShapeData",
    "SimplicialComplex",
    "SphereKind",
    "SublevelComplex",
    "TautVerdict",
    "betti_numbers",
    "betti_sum",
    "build_field",
    "catalog_surface",
    "contact_to_line",
    "criticality_residual",
    "curvature_spheres",
    "hessian_analytic",
    "induced_map_injective",
    "kuiper_scan",
    "legendre_lift",
    "lie_inner",
    "lie_taut_check",
    "line_to_contact",
    "lines_intersect",
    "load_surface",
    "mobius_from_lorentz",
    "normal_bundle",
    "oriented_contact",
    "parallel_transformation",
    "pencil_radius",
    "pencil_sphere",
    "pl_critical_points",
    "quadric_to_sphere",
    "random_contact_element",
    "random_lie_transformation",
    "sard_map_F",
    "save_surface",
    "shape_operator",
    "sphere_to_quadric",
    "sublevel",
    "taut_check",
    "validate",
]
