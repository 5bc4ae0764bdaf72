"""End-to-end command-line runs: exit codes, reports, determinism, plot data."""

import contextlib
import io
import json
import os
from types import SimpleNamespace

import numpy as np
import pytest

from lietaut import report as report_mod
from lietaut.cli import run


def run_cli(args, env=None):
    saved = {}
    if env:
        for key, value in env.items():
            saved[key] = os.environ.get(key)
            os.environ[key] = value
    out, err = io.StringIO(), io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = run([str(a) for a in args])
    finally:
        for key, value in saved.items():
            if value is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = value
    return SimpleNamespace(exit_code=code, output=out.getvalue() + err.getvalue())


@pytest.fixture()
def out(tmp_path):
    return tmp_path


class TestCheckTaut:
    def test_sphere_taut_exit_zero(self, out):
        rep_path = out / "sphere.json"
        result = run_cli([
            "check", "taut", "--surface", "round-sphere:2,3,1.0471975511965976",
            "--resolution", "16", "--samples", "15", "--seed", "7",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 0
        rep = report_mod.read_report(rep_path)
        assert rep["results"]["verdict"] == "taut"
        assert rep["results"]["expected"] == 2
        assert rep["schema_version"] == 1
        assert rep["config"]["seed"] == 7

    def test_clifford_taut(self, out):
        rep_path = out / "torus.json"
        result = run_cli([
            "check", "taut", "--surface", "clifford-torus",
            "--resolution", "32", "--samples", "20", "--seed", "7",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 0
        rep = report_mod.read_report(rep_path)
        assert set(rep["results"]["counts_histogram"]) == {"4"}

    def test_bumpy_not_taut_exit_one(self, out):
        rep_path = out / "bumpy.json"
        result = run_cli([
            "check", "taut", "--surface", "bumpy-torus:0.3",
            "--resolution", "48", "--samples", "120", "--seed", "7",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 1
        rep = report_mod.read_report(rep_path)
        assert rep["results"]["verdict"] == "not_taut"

    def test_inconclusive_exit_two(self, out):
        rep_path = out / "coarse.json"
        result = run_cli([
            "check", "taut", "--surface", "clifford-torus",
            "--resolution", "8", "--samples", "10", "--seed", "1",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 2

    def test_seed_required(self, out):
        result = run_cli(["check", "taut", "--surface", "clifford-torus"])
        assert result.exit_code == 3
        assert "seed" in result.output

    def test_determinism_byte_identical(self, out):
        paths = [out / "a.json", out / "b.json"]
        for p in paths:
            result = run_cli([
                "check", "taut", "--surface", "clifford-torus",
                "--resolution", "32", "--samples", "10", "--seed", "3",
                "--output", str(p),
            ])
            assert result.exit_code == 0
        a = report_mod.read_report(paths[0])
        b = report_mod.read_report(paths[1])
        sa = report_mod.dumps(report_mod.strip_timing(a))
        sb = report_mod.dumps(report_mod.strip_timing(b))
        # identical apart from the output path stored in the config
        assert sa.replace("a.json", "x.json") == sb.replace("b.json", "x.json")

    def test_threads_env_fallback(self, out):
        rep_path = out / "t.json"
        result = run_cli(
            [
                "check", "taut", "--surface", "clifford-torus",
                "--resolution", "32", "--samples", "6", "--seed", "2",
                "--output", str(rep_path),
            ],
            env={"LIE_TAUT_THREADS": "3"},
        )
        assert result.exit_code == 0
        assert report_mod.read_report(rep_path)["config"]["threads"] == 3


class TestCheckLieTaut:
    def test_parallel_transform(self, out):
        rep_path = out / "lt.json"
        result = run_cli([
            "check", "lie-taut", "--surface", "clifford-torus",
            "--transform", "parallel:0.3926990817",
            "--resolution", "32", "--samples", "10", "--seed", "7",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 0
        rep = report_mod.read_report(rep_path)
        assert rep["results"]["expected"] == 4
        matrix = np.array(rep["results"]["transform_matrix"])
        assert matrix.shape == (6, 6)
        assert matrix[0, 0] == pytest.approx(np.cos(0.3926990817))

    def test_transform_specs(self, out):
        for spec in ("rotation:5", "random:5", "random:5:-0.2,0.2", "none"):
            result = run_cli([
                "check", "lie-taut", "--surface", "clifford-torus",
                "--transform", spec,
                "--resolution", "32", "--samples", "5", "--seed", "7",
                "--output", str(out / "lt2.json"),
            ])
            assert result.exit_code == 0, spec

    def test_bad_transform_spec(self, out):
        result = run_cli([
            "check", "lie-taut", "--surface", "clifford-torus",
            "--transform", "spin:1", "--samples", "5", "--seed", "7",
            "--output", str(out / "x.json"),
        ])
        assert result.exit_code == 3
        assert "transform" in result.output


class TestCheckKuiper:
    def test_clifford_pass(self, out):
        rep_path = out / "k.json"
        result = run_cli([
            "check", "kuiper", "--surface", "clifford-torus",
            "--resolution", "32", "--samples", "8", "--seed", "7",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 0
        rep = report_mod.read_report(rep_path)
        assert rep["results"]["equivalence_disagreements"] == 0

    def test_height_field_on_sphere(self, out):
        rep_path = out / "kh.json"
        result = run_cli([
            "check", "kuiper", "--surface", "round-sphere:2,3,1.0471975511965976",
            "--field", "height",
            "--resolution", "32", "--samples", "5", "--seed", "7",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 0


class TestCheckSardAndHomology:
    def test_sard_pass(self, out):
        rep_path = out / "s.json"
        result = run_cli([
            "check", "sard", "--surface", "clifford-torus",
            "--resolution", "16", "--samples", "25", "--seed", "13",
            "--output", str(rep_path),
        ])
        assert result.exit_code == 0
        rep = report_mod.read_report(rep_path)
        assert rep["results"]["max_curvature_config_norm"] < rep["results"]["curvature_threshold"]

    def test_homology_pass(self, out):
        rep_path = out / "h.json"
        result = run_cli([
            "check", "homology", "--surface", "clifford-torus",
            "--resolution", "16", "--output", str(rep_path),
        ])
        assert result.exit_code == 0
        rep = report_mod.read_report(rep_path)
        assert rep["results"]["betti_numbers"] == [1, 2, 1]
        assert rep["results"]["bundle_betti_sum"] == 8


class TestConfigFile:
    def test_config_overrides_flags(self, out):
        cfg = out / "cfg.json"
        cfg.write_text(json.dumps({"samples": 6, "resolution": 32}))
        rep_path = out / "c.json"
        result = run_cli([
            "check", "taut", "--surface", "clifford-torus",
            "--resolution", "64", "--samples", "50", "--seed", "2",
            "--config", str(cfg), "--output", str(rep_path),
        ])
        assert result.exit_code == 0
        rep = report_mod.read_report(rep_path)
        assert rep["config"]["samples"] == 6
        assert rep["config"]["resolution"] == 32

    def test_unknown_config_field(self, out):
        cfg = out / "cfg.json"
        cfg.write_text(json.dumps({"sample": 6}))
        result = run_cli([
            "check", "taut", "--surface", "clifford-torus", "--seed", "2",
            "--config", str(cfg), "--output", str(out / "c.json"),
        ])
        assert result.exit_code == 3
        assert "sample" in result.output

    def test_config_parse_error(self, out):
        cfg = out / "cfg.json"
        cfg.write_text("{nope")
        result = run_cli([
            "check", "taut", "--surface", "clifford-torus", "--seed", "2",
            "--config", str(cfg), "--output", str(out / "c.json"),
        ])
        assert result.exit_code == 3


class TestGenSurfaceAndMesh:
    def test_gen_and_check_mesh(self, out):
        mesh = out / "torus.sphmesh"
        result = run_cli([
            "gen-surface", "--surface", "clifford-torus",
            "--resolution", "12", "--output", str(mesh),
        ])
        assert result.exit_code == 0
        assert mesh.exists()
        result = run_cli([
            "check", "homology", "--surface", f"mesh:{mesh}", "--betti", "4",
            "--output", str(out / "hm.json"),
        ])
        assert result.exit_code == 0

    def test_mesh_requires_betti(self, out):
        mesh = out / "torus.sphmesh"
        run_cli(["gen-surface", "--surface", "clifford-torus",
                 "--resolution", "12", "--output", str(mesh)])
        result = run_cli([
            "check", "homology", "--surface", f"mesh:{mesh}",
            "--output", str(out / "hm.json"),
        ])
        assert result.exit_code == 3
        assert "betti" in result.output

    def test_missing_mesh_is_runtime_error(self, out):
        result = run_cli([
            "check", "homology", "--surface", "mesh:/nonexistent.sphmesh",
            "--betti", "4", "--output", str(out / "hm.json"),
        ])
        assert result.exit_code == 4


class TestEmitPlot:
    @pytest.fixture()
    def taut_report(self, out):
        rep_path = out / "r.json"
        run_cli([
            "check", "taut", "--surface", "clifford-torus",
            "--resolution", "32", "--samples", "10", "--seed", "3",
            "--output", str(rep_path),
        ])
        return rep_path

    def test_histogram_single_bin(self, out, taut_report):
        dest = out / "hist.tsv"
        result = run_cli(["emit-plot", "--report", str(taut_report),
                          "--what", "histogram", "--output", str(dest)])
        assert result.exit_code == 0
        lines = dest.read_text().strip().split("\n")
        assert lines[0] == "count\tfrequency"
        assert len(lines) == 2
        assert lines[1].startswith("4\t")

    def test_field_values_row_count(self, out, taut_report):
        dest = out / "vals.tsv"
        run_cli(["emit-plot", "--report", str(taut_report),
                 "--what", "field_values", "--output", str(dest)])
        lines = dest.read_text().strip().split("\n")
        assert len(lines) == 1 + 32 * 32

    def test_sphere_height_critical_points_two_rows(self, out):
        rep_path = out / "kh.json"
        run_cli([
            "check", "kuiper", "--surface", "round-sphere:2,3,1.0471975511965976",
            "--field", "height", "--resolution", "16", "--samples", "4",
            "--seed", "7", "--output", str(rep_path),
        ])
        dest = out / "crit.tsv"
        result = run_cli(["emit-plot", "--report", str(rep_path),
                          "--what", "critical_points", "--output", str(dest)])
        assert result.exit_code == 0
        lines = dest.read_text().strip().split("\n")
        assert len(lines) == 3  # header + min + max

    def test_missing_section(self, out, taut_report):
        broken = out / "broken.json"
        rep = report_mod.read_report(taut_report)
        del rep["results"]["counts_histogram"]
        report_mod.write_report(rep, broken)
        result = run_cli(["emit-plot", "--report", str(broken),
                          "--what", "histogram", "--output", str(out / "x.tsv")])
        assert result.exit_code == 3


class TestValidateTransform:
    def test_valid_matrix(self, out):
        path = out / "m.txt"
        t = np.eye(6)
        t[0, 0] = t[-1, -1] = np.cos(0.4)
        t[0, -1] = -np.sin(0.4)
        t[-1, 0] = np.sin(0.4)
        np.savetxt(path, t)
        result = run_cli(["validate-transform", "--matrix", str(path)])
        assert result.exit_code == 0
        assert "valid" in result.output

    def test_invalid_matrix(self, out):
        path = out / "m.txt"
        np.savetxt(path, 2 * np.eye(6))
        result = run_cli(["validate-transform", "--matrix", str(path)])
        assert result.exit_code == 4
