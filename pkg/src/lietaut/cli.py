"""Command-line driver: surface generation, checks, reports, plot data.

Subcommands: ``check`` (taut | lie-taut | kuiper | sard | homology),
``gen-surface``, ``emit-plot``, ``validate-transform``.  Exit codes: 0 for a
passing/taut verdict, 1 for failing/not-taut, 2 for inconclusive, 3 for
configuration errors, 4 for runtime errors.  ``--config`` names a JSON file
whose fields override the flags; ``LIE_TAUT_THREADS`` is the fallback for
``--threads``.
"""

from __future__ import annotations

import json
import os
import sys
import time

import click
import numpy as np

from . import report as report_mod
from .fields import build_field
from .homology import betti_numbers, kuiper_scan
from .morse import pl_critical_points, sard_directional_derivative
from .quadric import random_contact_element
from .surfaces import (
    catalog_surface,
    legendre_lift,
    load_surface,
    normal_bundle,
    save_surface,
    shape_operator,
)
from .tolerances import TOL_BASE_FACTOR, TOL_CURV, TOL_FLAT
from .transforms import (
    group_residual,
    parallel_transformation,
    random_lie_transformation,
    random_rotation,
    rotation_extension,
    validate,
)
from .verdicts import (
    _CheckContext,
    _evaluate_field_sample,
    lie_taut_check,
    sample_rng,
    taut_check,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG = 3
EXIT_ERROR = 4

VERDICT_EXIT = {"taut": EXIT_PASS, "not_taut": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}

SAMPLING_KINDS = ("taut", "lie-taut", "kuiper", "sard")


def _parse_surface(spec: str, resolution: int, betti: int | None):
    if spec.startswith("mesh:"):
        if betti is None:
            raise click.ClickException("field 'betti' is required for mesh surfaces")
        return load_surface(spec[5:], betti)
    name, _, args = spec.partition(":")
    name = name.replace("-", "_")
    params = {}
    if args:
        values = [float(x) for x in args.split(",")]
        if name == "bumpy_torus" and len(values) in (1, 2):
            params["amplitude"] = values[0]
            if len(values) == 2:
                params["width"] = values[1]
        elif name == "round_sphere" and len(values) == 3:
            params = {"k": int(values[0]), "n": int(values[1]), "radius": values[2]}
        elif name == "torus_of_revolution" and len(values) == 2:
            params = {"a": values[0], "b": values[1]}
        else:
            raise click.ClickException(f"field 'surface': bad parameters for {name}")
    return catalog_surface(name, resolution, **params)


def _parse_transform(spec: str | None, ambient_n: int):
    if spec in (None, "", "none"):
        return None
    kind, _, args = spec.partition(":")
    try:
        if kind == "parallel":
            return parallel_transformation(float(args), ambient_n)
        if kind == "rotation":
            rng = np.random.default_rng(int(args))
            return rotation_extension(random_rotation(rng, ambient_n + 1))
        if kind == "random":
            parts = args.split(":")
            seed = int(parts[0])
            t_range = (-np.pi / 4, np.pi / 4)
            if len(parts) > 1:
                lo, hi = (float(x) for x in parts[1].split(","))
                t_range = (lo, hi)
            return random_lie_transformation(
                np.random.default_rng(seed), ambient_n, t_range
            )
    except (ValueError, IndexError) as exc:
        raise click.ClickException(f"field 'transform': {exc}") from exc
    raise click.ClickException(f"field 'transform': unknown kind {kind!r}")


def _threads_default(threads: int | None) -> int:
    if threads is not None:
        return threads
    env = os.environ.get("LIE_TAUT_THREADS", "").strip()
    return int(env) if env else 1


@click.group()
def cli():
    """Numerical sphere-geometry tautness toolkit."""


@cli.command()
@click.argument("kind", type=click.Choice(list(SAMPLING_KINDS) + ["homology"]))
@click.option("--surface", "surface_spec", default="clifford-torus", show_default=True)
@click.option("--betti", type=int, default=None, help="Declared Betti sum for mesh surfaces.")
@click.option("--resolution", type=int, default=32, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=None, help="Mandatory for sampling checks.")
@click.option("--transform", "transform_spec", default="none", show_default=True,
              help="none | parallel:T | rotation:SEED | random:SEED[:TMIN,TMAX]")
@click.option("--field", "field_kind", default="pencil", show_default=True,
              type=click.Choice(["pencil", "distance", "height"]))
@click.option("--output", default=None, help="Report path (default <kind>-report.json).")
@click.option("--threads", type=int, default=None, help="Worker cap; env LIE_TAUT_THREADS.")
@click.option("--config", "config_path", default=None, help="JSON config overriding flags.")
@click.option("--tol-base-factor", type=float, default=TOL_BASE_FACTOR, show_default=True)
@click.option("--tol-curv", type=float, default=TOL_CURV, show_default=True)
@click.option("--tol-flat", type=float, default=TOL_FLAT, show_default=True)
@click.option("--fiber-resolution", type=int, default=8, show_default=True)
@click.option("--h-fd", type=float, default=1e-6, show_default=True)
@click.option("--no-refine", is_flag=True, default=False,
              help="Skip doubled-resolution confirmation of miscounts.")
def check(kind, surface_spec, betti, resolution, samples, seed, transform_spec,
          field_kind, output, threads, config_path, tol_base_factor, tol_curv,
          tol_flat, fiber_resolution, h_fd, no_refine):
    """Run a verification check and write a structured report."""
    config = {
        "kind": kind,
        "surface": surface_spec,
        "betti": betti,
        "resolution": resolution,
        "samples": samples,
        "seed": seed,
        "transform": transform_spec,
        "field": field_kind,
        "output": output,
        "threads": threads,
        "tol_base_factor": tol_base_factor,
        "tol_curv": tol_curv,
        "tol_flat": tol_flat,
        "fiber_resolution": fiber_resolution,
        "h_fd": h_fd,
        "refine": not no_refine,
    }
    if config_path:
        try:
            with open(config_path) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise click.ClickException(f"field 'config': {exc}") from exc
        for key, value in overrides.items():
            if key not in config:
                raise click.ClickException(f"field '{key}': unknown config field")
            config[key] = value
    config["threads"] = _threads_default(config["threads"])
    if config["kind"] in SAMPLING_KINDS and config["seed"] is None:
        raise click.ClickException("field 'seed': required for sampling checks")

    start = time.perf_counter()
    surface = _parse_surface(config["surface"], config["resolution"], config["betti"])
    runner = {
        "taut": _run_taut,
        "lie-taut": _run_lie_taut,
        "kuiper": _run_kuiper,
        "sard": _run_sard,
        "homology": _run_homology,
    }[config["kind"]]
    results, exit_code = runner(surface, config)
    wall = time.perf_counter() - start

    out_path = config["output"] or f"{config['kind']}-report.json"
    config["output"] = out_path
    rep = report_mod.build_report(config["kind"], config, results, wall)
    report_mod.write_report(rep, out_path)
    click.echo(f"{config['kind']}: {results.get('verdict', 'done')} (report: {out_path})")
    sys.exit(exit_code)


def _run_taut(surface, config):
    verdict = taut_check(
        surface,
        config["samples"],
        config["seed"],
        tol_base_factor=config["tol_base_factor"],
        tol_curv=config["tol_curv"],
        tol_flat=config["tol_flat"],
        refine=config["refine"],
        threads=config["threads"],
        fiber_resolution=config["fiber_resolution"],
    )
    return report_mod.verdict_payload(verdict), VERDICT_EXIT[verdict.verdict]


def _run_lie_taut(surface, config):
    transform = _parse_transform(config["transform"], surface.ambient_n)
    bundle = normal_bundle(surface, config["fiber_resolution"])
    lift = legendre_lift(surface, bundle)
    verdict = lie_taut_check(
        lift,
        transform,
        num_samples=config["samples"],
        seed=config["seed"],
        tol_base_factor=config["tol_base_factor"],
        tol_curv=config["tol_curv"],
        tol_flat=config["tol_flat"],
        refine=config["refine"],
        threads=config["threads"],
    )
    payload = report_mod.verdict_payload(verdict)
    payload["transform_matrix"] = (
        transform.matrix.tolist() if transform is not None else None
    )
    return payload, VERDICT_EXIT[verdict.verdict]


def _run_kuiper(surface, config):
    """Scan sublevel-homology injectivity for sampled fields."""
    ctx = _CheckContext(
        surface,
        config["tol_base_factor"],
        config["tol_curv"],
        config["tol_flat"],
        config["fiber_resolution"],
    )
    complex_ = surface.complex()
    beta = surface.betti_sum_z2
    rows = []
    example = None
    kept = failing = disagreements = 0
    for i in range(config["samples"]):
        rng = sample_rng(config["seed"], i)
        contact = random_contact_element(rng, surface.ambient_n)
        if config["field"] == "height":
            field = build_field(surface, "height", base_point=contact.point)
            rep = pl_critical_points(field, tol_flat=config["tol_flat"])
            status, reason, values = (
                ("rejected", "degenerate_field", field.values)
                if rep.degenerate_flag
                else ("kept", None, field.values)
            )
        else:
            kind = "pencil_radius" if config["field"] == "pencil" else "spherical_distance"
            status, reason, rep, values, _ = _evaluate_field_sample(ctx, contact, kind)
        row = {"index": i, "status": status, "reason": reason}
        if status == "kept":
            kept += 1
            scan = kuiper_scan(complex_, values)
            agree = scan.injective == (rep.total == beta)
            row.update(
                mu=rep.total,
                beta_sum=beta,
                injective=scan.injective,
                first_failing_threshold=scan.first_failing_threshold,
                agreement=agree,
            )
            failing += not scan.injective
            disagreements += not agree
            if example is None:
                example = {
                    "sample_index": i,
                    "values": values.tolist(),
                    "labels": rep.classification(len(values)),
                }
        rows.append(row)
    verdict = "pass" if kept and not failing else ("fail" if failing else "inconclusive")
    results = {
        "verdict": verdict,
        "beta_sum": beta,
        "samples_used": kept,
        "samples_rejected": config["samples"] - kept,
        "failing_scans": failing,
        "equivalence_disagreements": disagreements,
        "rows": rows,
    }
    if example is not None:
        results["example_field"] = example
    code = EXIT_PASS if verdict == "pass" else (EXIT_FAIL if verdict == "fail" else EXIT_INCONCLUSIVE)
    return results, code


def _run_sard(surface, config):
    """Directional-derivative separation at curvature vs generic pencil data."""
    if surface.analytic is None or surface.analytic.normal_at is None:
        raise click.ClickException("field 'surface': sard check needs an analytic surface")
    bundle = normal_bundle(surface, config["fiber_resolution"])
    m = len(surface.vertices)
    h_fd = config["h_fd"]
    margin = 0.2
    curvature_norms, generic_norms = [], []
    for i in range(config["samples"]):
        rng = sample_rng(config["seed"], i)
        v = int(rng.integers(m))
        sheet = int(rng.integers(bundle.num_sheets))
        frame = bundle.frames[bundle.frame_index(sheet, v)]
        sd = shape_operator(surface, frame)
        j = int(rng.integers(len(sd.principal_curvatures)))
        kappa = sd.principal_curvatures[j]
        r = float(np.arctan2(1.0, kappa))
        direction = sd.tangent_basis.T @ sd.principal_directions[:, j]
        x = surface.vertices[v]
        q = np.cos(r) * x + np.sin(r) * frame.normal
        eta = _random_tangent(rng, q)
        curvature_norms.append(
            sard_directional_derivative(surface, frame, r, eta, direction, h_fd)
        )
        radii = np.arctan2(1.0, sd.principal_curvatures)
        while True:
            r_g = float(rng.uniform(margin, np.pi - margin))
            if np.min(np.abs(radii - r_g)) > margin:
                break
        coeff = rng.standard_normal(2)
        direction_g = sd.tangent_basis.T @ (coeff / np.linalg.norm(coeff))
        q_g = np.cos(r_g) * x + np.sin(r_g) * frame.normal
        eta_g = _random_tangent(rng, q_g)
        generic_norms.append(
            sard_directional_derivative(surface, frame, r_g, eta_g, direction_g, h_fd)
        )
    max_curv = float(np.max(curvature_norms))
    min_gen = float(np.min(generic_norms))
    ok = max_curv < 10 * h_fd and min_gen > 1e3 * h_fd
    results = {
        "verdict": "pass" if ok else "fail",
        "h_fd": h_fd,
        "max_curvature_config_norm": max_curv,
        "min_generic_config_norm": min_gen,
        "curvature_threshold": 10 * h_fd,
        "generic_threshold": 1e3 * h_fd,
    }
    return results, EXIT_PASS if ok else EXIT_FAIL


def _random_tangent(rng, q):
    while True:
        g = rng.standard_normal(len(q))
        g -= (g @ q) * q
        norm = np.linalg.norm(g)
        if norm > 1e-6:
            return g / norm


def _run_homology(surface, config):
    betti = betti_numbers(surface.complex())
    total = int(sum(betti))
    ok = total == surface.betti_sum_z2
    results = {
        "verdict": "pass" if ok else "fail",
        "betti_numbers": betti,
        "betti_sum": total,
        "declared_betti_sum": surface.betti_sum_z2,
        "euler_characteristic": surface.complex().euler_characteristic(),
    }
    if surface.codim == 1:
        bundle = normal_bundle(surface, config["fiber_resolution"])
        bundle_betti = betti_numbers(bundle.bundle_complex())
        results["bundle_betti_numbers"] = bundle_betti
        results["bundle_betti_sum"] = int(sum(bundle_betti))
        ok = ok and sum(bundle_betti) == 2 * total
        results["verdict"] = "pass" if ok else "fail"
    return results, EXIT_PASS if ok else EXIT_FAIL


@cli.command("gen-surface")
@click.option("--surface", "surface_spec", required=True)
@click.option("--resolution", type=int, default=32, show_default=True)
@click.option("--betti", type=int, default=None)
@click.option("--output", required=True)
def gen_surface(surface_spec, resolution, betti, output):
    """Generate a catalog surface and write it in the mesh format."""
    surface = _parse_surface(surface_spec, resolution, betti)
    save_surface(surface, output)
    click.echo(f"wrote {output}: {len(surface.vertices)} vertices, "
               f"{len(surface.triangles)} triangles")
    sys.exit(EXIT_PASS)


@cli.command("emit-plot")
@click.option("--report", "report_path", required=True)
@click.option("--what", required=True,
              type=click.Choice(["histogram", "field_values", "critical_points"]))
@click.option("--output", required=True)
def emit_plot(report_path, what, output):
    """Emit tab-separated plot data from a report."""
    rep = report_mod.read_report(report_path)
    results = rep.get("results", {})
    lines = []
    if what == "histogram":
        hist = results.get("counts_histogram")
        if hist is None:
            raise click.ClickException("field 'results.counts_histogram': missing")
        lines.append("count\tfrequency")
        for k in sorted(hist, key=int):
            lines.append(f"{k}\t{hist[k]}")
    else:
        example = results.get("example_field")
        if example is None:
            raise click.ClickException("field 'results.example_field': missing")
        values, labels = example["values"], example["labels"]
        if what == "field_values":
            lines.append("vertex\tvalue\tlabel")
            for v, (val, lab) in enumerate(zip(values, labels)):
                lines.append(f"{v}\t{val:.17g}\t{lab}")
        else:
            lines.append("vertex\tlabel\tvalue")
            for v, (val, lab) in enumerate(zip(values, labels)):
                if lab != "regular":
                    lines.append(f"{v}\t{lab}\t{val:.17g}")
    with open(output, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    click.echo(f"wrote {output} ({len(lines) - 1} rows)")
    sys.exit(EXIT_PASS)


@cli.command("validate-transform")
@click.option("--matrix", "matrix_path", required=True)
@click.option("--ambient-n", type=int, default=None)
def validate_transform(matrix_path, ambient_n):
    """Check that a row-major matrix file preserves the signature form."""
    matrix = np.loadtxt(matrix_path)
    t = validate(matrix, ambient_n)
    res = group_residual(t.matrix, t.ambient_n)
    click.echo(f"valid transformation (ambient n={t.ambient_n}, residual {res:.3e})")
    sys.exit(EXIT_PASS)


def run(argv=None) -> int:
    """Execute the CLI and translate failures into the exit-code contract."""
    try:
        cli(args=argv, standalone_mode=False, prog_name="lietaut")
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except click.Abort:
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except Exception as exc:  # noqa: BLE001 - surface every runtime failure as exit 4
        click.echo(f"error: {exc}", err=True)
        return EXIT_ERROR
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
