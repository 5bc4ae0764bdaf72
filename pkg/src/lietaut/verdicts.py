"""Taut verdicts for surfaces and their lifts, by random sampling.

For a taut surface every nondegenerate distance function, and equivalently
every nondegenerate pencil-radius function, has exactly beta critical points
(the GF(2) Betti sum).  The check draws random contact elements, rejects the
measure-zero-adjacent configurations a mesh cannot resolve (base point too
close to the surface, flat or multiple saddles, pencil sphere too close to a
curvature sphere), counts PL critical points of each kept field, and
confirms any miscount at doubled resolution before letting it drive the
verdict.  The lift-level check counts normal frames whose line meets a
random probe line on the quadric: the tangency vertex plus the one normal
sheet in oriented contact with the pencil sphere through it; transporting
probe lines through a quadric-preserving transformation must leave every
count unchanged.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import build_field
from .morse import aligned_normal, pl_critical_points
from .quadric import (
    ContactElement,
    contact_to_line,
    line_to_contact,
    random_contact_element,
)
from .surfaces import EmbeddedSurface, LegendreLift, normal_bundle
from .tolerances import TOL_BASE_FACTOR, TOL_CURV, TOL_FLAT
from .transforms import LieTransformation, apply_line


@dataclass
class SampleRecord:
    index: int
    status: str  # kept | rejected
    reason: str | None
    count: int | None
    refined_count: int | None = None


@dataclass
class TautVerdict:
    """Outcome of a sampling check; kept + rejected = requested."""

    samples_requested: int
    samples_used: int
    samples_rejected: int
    counts_histogram: dict
    expected: int
    verdict: str
    seed: int
    rejection_reasons: dict
    records: list
    distance_histogram: dict | None = None
    distance_rejection_reasons: dict | None = None
    example_field: dict | None = None
    diagnostics: dict = dc_field(default_factory=dict)
    transformed_lines: list | None = None
    counted_frames: dict | None = None


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Deterministic per-sample generator derived from (master seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, index)))


def _cot(r):
    return np.cos(r) / np.sin(r)


class _CheckContext:
    """Shared per-check state: bundle, curvatures, tolerances, refinement."""

    def __init__(
        self,
        surface: EmbeddedSurface,
        tol_base_factor: float,
        tol_curv: float,
        tol_flat: float,
        fiber_resolution: int,
        bundle=None,
    ):
        self.surface = surface
        self.tol_base = tol_base_factor * surface.max_edge_angle
        self.tol_curv = tol_curv
        self.tol_flat = tol_flat
        self.bundle = bundle if bundle is not None else normal_bundle(
            surface, fiber_resolution
        )
        self.curvatures = self.bundle.curvatures()
        self._refined: EmbeddedSurface | None = None

    def refined_surface(self) -> EmbeddedSurface:
        if self._refined is None:
            self._refined = self.surface.refined()
        return self._refined


def _evaluate_field_sample(ctx: _CheckContext, contact: ContactElement, kind: str):
    """One field draw: rejection filters, then the PL critical census.

    Returns (status, reason, report, values, counted_frames).
    """
    surface = ctx.surface
    if surface.min_vertex_angle(contact.point) < ctx.tol_base:
        return "rejected", "base_near_surface", None, None, None
    if kind == "spherical_distance":
        if surface.min_vertex_angle(-contact.point) < ctx.tol_base:
            return "rejected", "antipode_near_surface", None, None, None
        field = build_field(surface, kind, base_point=contact.point)
    else:
        field = build_field(
            surface, "pencil_radius", contact=contact, min_base_angle=ctx.tol_base
        )
    report = pl_critical_points(field, tol_flat=ctx.tol_flat)
    if report.degenerate_flag:
        return "rejected", "degenerate_field", report, field.values, None
    counted = []
    for v in report.critical_vertices():
        r = field.values[v]
        if kind == "spherical_distance":
            if not 1e-8 < r < np.pi - 1e-8:
                return "rejected", "tangency_at_base", report, field.values, None
            x = surface.vertices[v]
            n_exp = (contact.point - np.cos(r) * x) / np.sin(r)
            n_exp /= np.linalg.norm(n_exp)
        else:
            n_exp = aligned_normal(contact, surface.vertices[v])
        sheet = ctx.bundle.match_sheet(v, n_exp)
        counted.append(ctx.bundle.frame_index(sheet, v))
        kappas = ctx.curvatures[sheet, v]
        if np.min(np.abs(_cot(r) - kappas)) < ctx.tol_curv:
            return "rejected", "curvature_sphere_proximity", report, field.values, None
    return "kept", None, report, field.values, counted


def _confirm_count(ctx: _CheckContext, contact: ContactElement, kind: str):
    """Recount on the doubled-resolution surface; None when rejected there."""
    refined = ctx.refined_surface()
    tol_base = ctx.tol_base  # keep the coarse scale: same sample, same exclusion zone
    if refined.min_vertex_angle(contact.point) < tol_base:
        return None
    if kind == "spherical_distance":
        field = build_field(refined, kind, base_point=contact.point)
    else:
        field = build_field(
            refined, "pencil_radius", contact=contact, min_base_angle=tol_base
        )
    report = pl_critical_points(field, tol_flat=ctx.tol_flat)
    if report.degenerate_flag:
        return None
    return report.total


def _run_samples(ctx, contacts, kind, expected, refine, threads):
    """Evaluate all samples, confirm miscounts, and fold into verdict parts."""

    def eval_one(i):
        return _evaluate_field_sample(ctx, contacts[i], kind)

    n = len(contacts)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(eval_one, range(n)))
    else:
        outcomes = [eval_one(i) for i in range(n)]

    records: list[SampleRecord] = []
    histogram: dict[int, int] = {}
    reasons: dict[str, int] = {}
    example = None
    counted_frames = {}
    for i, (status, reason, report, values, counted) in enumerate(outcomes):
        rec = SampleRecord(i, status, reason, report.total if report else None)
        if status == "kept":
            if report.total != expected and refine:
                refined_total = _confirm_count(ctx, contacts[i], kind)
                rec.refined_count = refined_total
                if refined_total is None or refined_total == expected:
                    rec.status = "rejected"
                    rec.reason = "mesh_artifact"
            if rec.status == "kept":
                histogram[report.total] = histogram.get(report.total, 0) + 1
                counted_frames[i] = counted
                if example is None:
                    example = {
                        "sample_index": i,
                        "values": values.tolist(),
                        "labels": report.classification(len(values)),
                    }
        if rec.status == "rejected":
            reasons[rec.reason] = reasons.get(rec.reason, 0) + 1
        records.append(rec)
    return records, histogram, reasons, example, counted_frames


def _verdict_from(records, histogram, expected, num_samples):
    used = sum(1 for r in records if r.status == "kept")
    rejected = num_samples - used
    if rejected > 0.5 * num_samples or used == 0:
        return "inconclusive", used, rejected
    if all(count == expected for count in histogram):
        return "taut", used, rejected
    over = [
        r
        for r in records
        if r.status == "kept"
        and r.count is not None
        and r.count > expected
        and (r.refined_count is None or r.refined_count > expected)
    ]
    confirmed = [r for r in over if r.refined_count is not None and r.refined_count > expected]
    if confirmed:
        return "not_taut", used, rejected
    return "inconclusive", used, rejected


def taut_check(
    surface: EmbeddedSurface,
    num_samples: int,
    seed: int,
    *,
    tol_base_factor: float = TOL_BASE_FACTOR,
    tol_curv: float = TOL_CURV,
    tol_flat: float = TOL_FLAT,
    refine: bool = True,
    threads: int = 1,
    fiber_resolution: int = 8,
) -> TautVerdict:
    """Sample pencil-radius fields and count PL critical points.

    Every kept sample of a taut surface must count exactly the Betti sum.
    The classical spherical-distance fields run alongside with the same base
    points; both histograms are reported.
    """
    ctx = _CheckContext(surface, tol_base_factor, tol_curv, tol_flat, fiber_resolution)
    expected = surface.betti_sum_z2
    contacts = [
        random_contact_element(sample_rng(seed, i), surface.ambient_n)
        for i in range(num_samples)
    ]
    records, histogram, reasons, example, _ = _run_samples(
        ctx, contacts, "pencil_radius", expected, refine, threads
    )
    d_records, d_histogram, d_reasons, _, _ = _run_samples(
        ctx, contacts, "spherical_distance", expected, refine, threads
    )
    verdict, used, rejected = _verdict_from(records, histogram, expected, num_samples)
    return TautVerdict(
        samples_requested=num_samples,
        samples_used=used,
        samples_rejected=rejected,
        counts_histogram=histogram,
        expected=expected,
        verdict=verdict,
        seed=seed,
        rejection_reasons=reasons,
        records=records + d_records,
        distance_histogram=d_histogram,
        distance_rejection_reasons=d_reasons,
        example_field=example,
        diagnostics={
            "tol_base": ctx.tol_base,
            "tol_curv": tol_curv,
            "distance_used": sum(1 for r in d_records if r.status == "kept"),
        },
    )


def lie_taut_check(
    lift: LegendreLift,
    transform: LieTransformation | None = None,
    *,
    num_samples: int,
    seed: int,
    probe_transform: LieTransformation | None = None,
    tol_base_factor: float = TOL_BASE_FACTOR,
    tol_curv: float = TOL_CURV,
    tol_flat: float = TOL_FLAT,
    refine: bool = True,
    threads: int = 1,
) -> TautVerdict:
    """Count lift lines meeting random probe lines; expect half the bundle Betti sum.

    Probe lines come from random contact elements (optionally pushed through
    an independent transformation to cover generic lines).  When ``transform``
    is given the lift's lines are mapped through it and the probes are
    transported consistently, so each probe is pulled back before counting;
    seed-matched counts are then identical across transforms.
    """
    surface = lift.surface
    bundle = lift.bundle
    if bundle.num_sheets != 2:
        raise ValueError("lift counting needs a two-sheet (codimension-one) bundle")
    # beta(bundle)/2: the two disjoint sheets double the surface's Betti sum
    expected = surface.betti_sum_z2
    ctx = _CheckContext(
        surface, tol_base_factor, tol_curv, tol_flat, 2, bundle=bundle
    )
    transformed_lines = None
    tinv = None
    if transform is not None:
        transformed_lines = [apply_line(transform, line) for line in lift.lines]
        tinv = transform.inverse()

    contacts = []
    for i in range(num_samples):
        c = random_contact_element(sample_rng(seed, i), surface.ambient_n)
        probe = contact_to_line(c)
        if probe_transform is not None:
            probe = apply_line(probe_transform, probe)
        if transform is not None:
            probe_world = apply_line(transform, probe)
            pulled = apply_line(tinv, probe_world)
        else:
            pulled = probe
        contacts.append(line_to_contact(pulled))

    records, histogram, reasons, example, counted_frames = _run_samples(
        ctx, contacts, "pencil_radius", expected, refine, threads
    )
    verdict, used, rejected = _verdict_from(records, histogram, expected, num_samples)
    diagnostics = {
        "tol_base": ctx.tol_base,
        "transform_given": transform is not None,
        "counted_frames_first_kept": next(iter(counted_frames.values()), None),
    }
    return TautVerdict(
        samples_requested=num_samples,
        samples_used=used,
        samples_rejected=rejected,
        counts_histogram=histogram,
        expected=expected,
        verdict=verdict,
        seed=seed,
        rejection_reasons=reasons,
        records=records,
        example_field=example,
        diagnostics=diagnostics,
        transformed_lines=transformed_lines,
        counted_frames=counted_frames,
    )
