"""Pencil-radius fields, PL Morse counting, and the analytic criticality tests."""

import numpy as np
import pytest

from lietaut.fields import build_field, pencil_radius
from lietaut.morse import (
    aligned_normal,
    criticality_residual,
    hessian_analytic,
    pl_critical_points,
    sard_directional_derivative,
    sard_map_F,
    tangent_sphere,
)
from lietaut.quadric import ContactElement, random_contact_element
from lietaut.surfaces import catalog_surface, normal_bundle, shape_operator
from lietaut.verdicts import sample_rng


def _contact(seed=0, n=3):
    return random_contact_element(np.random.default_rng(seed), n)


class TestPencilRadius:
    def test_reference_values(self):
        c = _contact()
        assert pencil_radius(c, c.direction) == pytest.approx(np.pi / 4, abs=1e-12)
        assert pencil_radius(c, -c.point) == pytest.approx(np.pi / 2, abs=1e-12)
        assert pencil_radius(c, -c.direction) == pytest.approx(3 * np.pi / 4, abs=1e-12)

    def test_implicit_equation(self, rng):
        for _ in range(100):
            c = random_contact_element(rng, 3)
            x = rng.normal(size=4)
            x /= np.linalg.norm(x)
            r = float(pencil_radius(c, x))
            assert 0 < r < np.pi
            lhs = np.cos(r)
            rhs = x @ (np.cos(r) * c.point + np.sin(r) * c.direction)
            assert abs(lhs - rhs) < 1e-12

    def test_undefined_at_base_point(self):
        c = _contact()
        with pytest.raises(ValueError, match="base point"):
            pencil_radius(c, c.point)

    def test_level_sets_are_pencil_spheres(self, rng):
        # points at angle r0 from the radius-r0 center evaluate to r0
        for _ in range(40):
            c = random_contact_element(rng, 3)
            r0 = float(rng.uniform(0.2, np.pi - 0.2))
            q = np.cos(r0) * c.point + np.sin(r0) * c.direction
            for _ in range(2):
                tau = rng.normal(size=4)
                tau -= (tau @ q) * q
                tau /= np.linalg.norm(tau)
                x = np.cos(r0) * q + np.sin(r0) * tau
                assert float(pencil_radius(c, x)) == pytest.approx(r0, abs=1e-10)
                assert np.arccos(np.clip(x @ q, -1, 1)) == pytest.approx(r0, abs=1e-10)

    def test_antipodal_direction_law(self, rng):
        for _ in range(100):
            c = random_contact_element(rng, 3)
            x = rng.normal(size=4)
            x /= np.linalg.norm(x)
            total = float(pencil_radius(c, x)) + float(pencil_radius(c.reversed(), x))
            assert total == pytest.approx(np.pi, abs=1e-12)


class TestBuildField:
    def test_distance_at_antipode(self, sphere16):
        p = -sphere16.vertices[17]
        f = build_field(sphere16, "spherical_distance", base_point=p)
        assert f.values[17] == pytest.approx(np.pi)
        assert np.all(f.values >= 0) and np.all(f.values <= np.pi)

    def test_height_is_cosine_of_distance(self, clifford16, rng):
        p = rng.normal(size=4)
        p /= np.linalg.norm(p)
        d = build_field(clifford16, "spherical_distance", base_point=p)
        h = build_field(clifford16, "height", base_point=p)
        assert np.allclose(h.values, np.cos(d.values), atol=1e-12)

    def test_pencil_base_too_close_rejected(self, clifford16):
        f0 = clifford16.vertices[0]
        with pytest.raises(ValueError, match="too close"):
            build_field(
                clifford16,
                "pencil_radius",
                contact=ContactElement(f0, _tangent_at(f0)),
            )

    def test_antipodal_field_relation(self, clifford16, rng):
        c = random_contact_element(rng, 3)
        f1 = build_field(clifford16, "pencil_radius", contact=c, min_base_angle=1e-6)
        f2 = build_field(
            clifford16, "pencil_radius", contact=c.reversed(), min_base_angle=1e-6
        )
        assert np.allclose(f1.values + f2.values, np.pi, atol=1e-12)


def _tangent_at(p):
    g = np.random.default_rng(3).normal(size=len(p))
    g -= (g @ p) * p
    return g / np.linalg.norm(g)


class TestPLCriticalPoints:
    def test_sphere_height_two_critical_points(self, sphere16):
        axis = np.array([0.3, -0.1, 0.24, 0.9])
        axis /= np.linalg.norm(axis)
        f = build_field(sphere16, "height", base_point=axis)
        rep = pl_critical_points(f)
        assert len(rep.minima) == 1
        assert len(rep.maxima) == 1
        assert rep.total == 2
        assert not rep.saddles

    def test_euler_relation_random_fields(self, clifford16, sphere16, bumpy16, rng):
        for surface, chi in ((clifford16, 0), (sphere16, 2), (bumpy16, 0)):
            for _ in range(10):
                from lietaut.fields import ScalarField

                f = ScalarField(surface, rng.normal(size=len(surface.vertices)), "height",
                                base_point=np.array([0, 0, 0, 1.0]))
                rep = pl_critical_points(f)
                saddle_mult = sum(m for _, m in rep.saddles)
                assert len(rep.minima) - saddle_mult + len(rep.maxima) == chi
                assert rep.total == len(rep.minima) + len(rep.maxima) + saddle_mult

    def test_clifford_distance_field_counts_four(self, clifford16):
        # independent oracle: the u- and v-equations decouple on a product torus,
        # giving exactly 2 x 2 = 4 critical points for a generic base point
        p = np.array([0.53, -0.21, 0.62, 0.54])
        p /= np.linalg.norm(p)
        f = build_field(clifford16, "spherical_distance", base_point=p)
        rep = pl_critical_points(f)
        assert rep.total == 4

    def test_tie_breaking_by_index(self, clifford16):
        from lietaut.fields import ScalarField

        values = np.zeros(len(clifford16.vertices))
        f = ScalarField(clifford16, values, "height", base_point=np.array([0, 0, 0, 1.0]))
        rep = pl_critical_points(f)
        saddle_mult = sum(m for _, m in rep.saddles)
        assert len(rep.minima) - saddle_mult + len(rep.maxima) == 0
        assert rep.degenerate_flag  # constant field is flagged, not crashed


class TestCriticalityResidual:
    def test_small_at_pl_criticals(self):
        s = catalog_surface("clifford_torus", 32)
        h = s.max_edge_angle
        checked = 0
        for i in range(60):
            rng = sample_rng(31, i)
            c = random_contact_element(rng, 3)
            try:
                f = build_field(s, "pencil_radius", contact=c)
            except ValueError:
                continue
            rep = pl_critical_points(f)
            if rep.degenerate_flag:
                continue
            for v in rep.critical_vertices():
                assert criticality_residual(s, v, c) < 1.0 * h
                checked += 1
        assert checked >= 40

    def test_large_at_regular_vertices(self, clifford16):
        c = _contact(8)
        f = build_field(clifford16, "pencil_radius", contact=c, min_base_angle=1e-6)
        rep = pl_critical_points(f)
        critical = set(rep.critical_vertices())
        neighborhood = set(critical)
        for v in critical:
            nbrs = clifford16.link_vs[clifford16.link_off[v] : clifford16.link_off[v + 1]]
            neighborhood.update(int(u) for u in nbrs)
        regular = [v for v in range(len(f.values)) if v not in neighborhood]
        residuals = [criticality_residual(clifford16, v, c) for v in regular]
        assert min(residuals) > 0.05 * clifford16.max_edge_angle

    def test_residual_equals_coefficient_times_gradient(self, clifford16):
        # the tangential center component is exactly |C| grad r
        c = _contact(11)
        f = build_field(clifford16, "pencil_radius", contact=c, min_base_angle=1e-6)
        agree = total = 0
        for v in range(0, len(clifford16.vertices), 7):
            x = clifford16.vertices[v]
            q, r = tangent_sphere(c, x)
            coeff = -np.sin(r) - x @ (-np.sin(r) * c.point + np.cos(r) * c.direction)
            nbrs = clifford16.link_vs[clifford16.link_off[v] : clifford16.link_off[v + 1]]
            du = clifford16.vertices[nbrs] - x
            du -= np.outer(du @ x, x)
            tb = clifford16.tangent_basis(v)
            grad, *_ = np.linalg.lstsq(du @ tb.T, f.values[nbrs] - f.values[v], rcond=None)
            predicted = abs(coeff) * np.linalg.norm(grad)
            residual = criticality_residual(clifford16, v, c)
            total += 1
            if abs(residual - predicted) < 0.1 * max(residual, 0.05):
                agree += 1
        assert agree / total > 0.85

    def test_sphere_poles_on_axis(self):
        rho = np.pi / 3
        s = catalog_surface("round_sphere", 16, radius=rho)
        center = np.array([0.0, 0, 0, 1.0])
        pole_dir = np.array([0.0, 0, 1.0, 0])  # embedded north direction
        # pencil along the geodesic through the surface's two poles
        c = ContactElement(-pole_dir, center)
        north, south = 0, len(s.vertices) - 1
        assert np.allclose(s.vertices[north], np.cos(rho) * center + np.sin(rho) * pole_dir)
        assert criticality_residual(s, north, c) < 1e-10
        assert criticality_residual(s, south, c) < 1e-10

    def test_pl_criticals_match_low_residual_set(self):
        # calibrated on a refinement study: critical-vertex residuals stay
        # below 0.7 h, and residuals below 0.15 h pin a critical vertex to
        # within one mesh neighborhood
        s = catalog_surface("clifford_torus", 24)
        h = s.max_edge_angle
        checked = 0
        for i in range(25):
            rng = sample_rng(77, i)
            c = random_contact_element(rng, 3)
            try:
                f = build_field(s, "pencil_radius", contact=c, min_base_angle=1e-6)
            except ValueError:
                continue
            rep = pl_critical_points(f)
            if rep.degenerate_flag:
                continue
            checked += 1
            critical = set(rep.critical_vertices())
            for v in critical:
                assert criticality_residual(s, v, c) < 0.7 * h
            for v in range(len(f.values)):
                if criticality_residual(s, v, c) < 0.15 * h:
                    nbrs = set(map(int, s.link_vs[s.link_off[v] : s.link_off[v + 1]]))
                    assert v in critical or nbrs & critical
        assert checked >= 15


class TestHessianAnalytic:
    def test_great_sphere_focal_degeneracy(self):
        s = catalog_surface("round_sphere", 16, radius=np.pi / 2)
        b = normal_bundle(s)
        axis = np.zeros(4)
        axis[3] = 1.0
        # pencil through the north pole of the great sphere, radius pi/2 there
        north = 0
        x0 = s.vertices[north]
        frame = b.frames[north] if b.frames[north].normal @ axis > 0 else b.frames[len(s.vertices) + north]
        r0 = np.pi / 2
        q = np.cos(r0) * x0 + np.sin(r0) * frame.normal
        eta = np.array([1.0, 0, 0, 0])
        p = np.cos(r0) * q + np.sin(r0) * eta
        xi = np.sin(r0) * q - np.cos(r0) * eta
        c = ContactElement(p, xi)
        sd = shape_operator(s, frame)
        h = hessian_analytic(sd, c, s)
        assert h.degenerate  # cot(pi/2) = 0 is the only principal curvature
        assert np.max(np.abs(h.eigenvalues)) < 1e-10

    def test_clifford_interior_radii_nondegenerate(self, clifford16, clifford16_bundle):
        frame = clifford16_bundle.frames[40]
        x0 = clifford16.vertices[40]
        sd = shape_operator(clifford16, frame)
        for r in (np.pi / 3, np.pi / 2, 2.0):
            q = np.cos(r) * x0 + np.sin(r) * frame.normal
            eta = _unit_tangent_at(q, seed=5)
            c = sard_map_F(clifford16, frame, r, eta)
            h = hessian_analytic(sd, c, clifford16)
            expected = (np.sin(r) * sd.principal_curvatures - np.cos(r)) / h.coefficient
            assert np.allclose(np.sort(h.eigenvalues), np.sort(expected), atol=1e-12)
            assert not h.degenerate

    def test_coefficient_always_negative(self, rng):
        for _ in range(10_000):
            p = rng.normal(size=4)
            p /= np.linalg.norm(p)
            xi = rng.normal(size=4)
            xi -= (xi @ p) * p
            xi /= np.linalg.norm(xi)
            x0 = rng.normal(size=4)
            x0 /= np.linalg.norm(x0)
            c = ContactElement(p, xi)
            r = float(pencil_radius(c, x0))
            coeff = -np.sin(r) - x0 @ (-np.sin(r) * p + np.cos(r) * xi)
            assert coeff < 0

    def test_requires_critical_point(self, clifford16, clifford16_bundle):
        frame = clifford16_bundle.frames[0]
        sd = shape_operator(clifford16, frame)
        c = _contact(21)
        if criticality_residual(clifford16, 0, c) > 2 * clifford16.max_edge_angle:
            with pytest.raises(ValueError, match="not critical"):
                hessian_analytic(sd, c, clifford16)

    def test_rejects_opposite_sheet(self, clifford16, clifford16_bundle):
        m = len(clifford16.vertices)
        frame = clifford16_bundle.frames[40]
        x0 = clifford16.vertices[40]
        r = 1.1
        q = np.cos(r) * x0 + np.sin(r) * frame.normal
        eta = _unit_tangent_at(q, seed=6)
        c = sard_map_F(clifford16, frame, r, eta)
        other = shape_operator(clifford16, clifford16_bundle.frames[m + 40])
        with pytest.raises(ValueError, match="opposite sheet"):
            hessian_analytic(other, c, clifford16)


def _unit_tangent_at(q, seed=0):
    g = np.random.default_rng(seed).normal(size=len(q))
    g -= (g @ q) * q
    return g / np.linalg.norm(g)


class TestSardMap:
    def test_output_is_contact_element(self, clifford16, clifford16_bundle, rng):
        for _ in range(50):
            idx = int(rng.integers(len(clifford16_bundle.frames)))
            frame = clifford16_bundle.frames[idx]
            x = clifford16.vertices[frame.base_index]
            r = float(rng.uniform(0.1, np.pi - 0.1))
            q = np.cos(r) * x + np.sin(r) * frame.normal
            eta = _unit_tangent_at(q, seed=int(rng.integers(1 << 30)))
            c = sard_map_F(clifford16, frame, r, eta)
            assert abs(np.linalg.norm(c.point) - 1) < 1e-12
            assert abs(c.point @ c.direction) < 1e-12

    def test_reconstruction_identities(self, clifford16, clifford16_bundle, rng):
        # the output pencil contains the normal-exponential sphere, and
        # sin r p - cos r xi recovers the fiber vector
        frame = clifford16_bundle.frames[77]
        x = clifford16.vertices[frame.base_index]
        r = 0.8
        q = np.cos(r) * x + np.sin(r) * frame.normal
        eta = _unit_tangent_at(q, seed=2)
        c = sard_map_F(clifford16, frame, r, eta)
        assert np.allclose(np.cos(r) * c.point + np.sin(r) * c.direction, q, atol=1e-12)
        assert np.allclose(np.sin(r) * c.point - np.cos(r) * c.direction, eta, atol=1e-12)
        assert float(pencil_radius(c, x)) == pytest.approx(r, abs=1e-12)

    def test_requires_tangent_eta(self, clifford16, clifford16_bundle):
        frame = clifford16_bundle.frames[0]
        with pytest.raises(ValueError, match="tangent"):
            sard_map_F(clifford16, frame, 0.5, clifford16.vertices[0])

    def test_directional_derivative_vanishes_at_curvature_configs(self, clifford16, clifford16_bundle, rng):
        h_fd = 1e-6
        for _ in range(20):
            idx = int(rng.integers(len(clifford16_bundle.frames)))
            frame = clifford16_bundle.frames[idx]
            sd = shape_operator(clifford16, frame)
            j = int(rng.integers(2))
            kappa = sd.principal_curvatures[j]
            r = float(np.arctan2(1.0, kappa))
            direction = sd.tangent_basis.T @ sd.principal_directions[:, j]
            x = clifford16.vertices[frame.base_index]
            q = np.cos(r) * x + np.sin(r) * frame.normal
            eta = _unit_tangent_at(q, seed=int(rng.integers(1 << 30)))
            norm = sard_directional_derivative(clifford16, frame, r, eta, direction, h_fd)
            assert norm < 10 * h_fd

    def test_directional_derivative_generic_configs_large(self, clifford16, clifford16_bundle, rng):
        h_fd = 1e-6
        for _ in range(20):
            idx = int(rng.integers(len(clifford16_bundle.frames)))
            frame = clifford16_bundle.frames[idx]
            sd = shape_operator(clifford16, frame)
            radii = np.arctan2(1.0, sd.principal_curvatures)
            while True:
                r = float(rng.uniform(0.2, np.pi - 0.2))
                if np.min(np.abs(radii - r)) > 0.2:
                    break
            coeff = rng.normal(size=2)
            direction = sd.tangent_basis.T @ (coeff / np.linalg.norm(coeff))
            x = clifford16.vertices[frame.base_index]
            q = np.cos(r) * x + np.sin(r) * frame.normal
            eta = _unit_tangent_at(q, seed=int(rng.integers(1 << 30)))
            norm = sard_directional_derivative(clifford16, frame, r, eta, direction, h_fd)
            assert norm > 1e3 * h_fd


class TestAlignedNormal:
    def test_matches_bundle_sheet_at_criticals(self, clifford16, clifford16_bundle):
        c = _contact(15)
        f = build_field(clifford16, "pencil_radius", contact=c)
        rep = pl_critical_points(f)
        for v in rep.critical_vertices():
            n = aligned_normal(c, clifford16.vertices[v])
            sheet = clifford16_bundle.match_sheet(v, n)
            # the tangency normal sits clearly on one sheet; the PL vertex is
            # offset from the true tangency by at most one mesh cell
            dot = clifford16_bundle.sheet_normals[sheet, v] @ n
            assert dot > 0.5
            other = clifford16_bundle.sheet_normals[1 - sheet, v] @ n
            assert other < -0.5
