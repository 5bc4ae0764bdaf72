"""Numerical tolerances shared across the package.

Double-precision constructions in this package are accurate to roughly
1e-13; every threshold below leaves at least two orders of magnitude of
headroom above that floor.
"""

# Quadric membership |<k,k>| after unit normalization of the representative.
TOL_QUADRIC = 1e-9

# Unit-norm and orthogonality checks on geometric vectors (centers, normals).
TOL_UNIT = 1e-9

# Oriented contact |<k1,k2>| for normalized quadric representatives.
TOL_CONTACT = 1e-8

# Singular-value ratio sigma_min/sigma_max below which a stacked span is
# declared rank-deficient.
TOL_RANK = 1e-8

# Projective equality: |cos(angle)| of two representatives must be within
# this of 1.
TOL_PROJ = 1e-10

# Nonzero test for homogeneous coordinates.
TOL_NONZERO = 1e-12

# Max-norm residual of A^T J A - J for group membership.
TOL_GROUP = 1e-8

# Symmetry defect allowed in a shape operator before symmetrization.
TOL_SYM = 1e-6

# Near-zero Hessian eigenvalue: the critical point counts as degenerate.
TOL_EIG = 1e-8

# Curvature-sphere proximity |cot r - kappa| below which a sample is
# rejected as too close to a degenerate configuration.
TOL_CURV = 0.05

# Neighbor-value gap below which a critical vertex is flagged flat.
TOL_FLAT = 1e-10

# Angular distance from a pencil base point to the surface, in units of the
# mesh's maximum edge length.  Samples closer than TOL_BASE_FACTOR * h_max
# are rejected: the field's feature scale near the base point falls below
# what the mesh resolves.
TOL_BASE_FACTOR = 1.0
