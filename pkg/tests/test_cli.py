"""Command-line interface: outputs, manifests, determinism, exit codes."""

import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from bhspectra.cli import main


def run_cli(*argv) -> int:
    return main(list(argv))


def run_subprocess(*argv):
    return subprocess.run(
        [sys.executable, "-m", "bhspectra", *argv], capture_output=True, text=True
    )


def read_csv(path: Path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest_hash=")
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


def stable_manifest(path: Path) -> dict:
    manifest = json.loads(path.read_text())
    manifest.pop("timing")
    return manifest


class TestSpectrumCommand:
    def test_csv_matches_closed_form(self, tmp_path):
        code = run_cli(
            "spectrum",
            "--family", "schwarzschild",
            "--mass", "1",
            "--omega-max", "1",
            "--bins", "4",
            "--normalization", "raw",
            "--output-dir", str(tmp_path),
        )
        assert code == 0
        header, rows = read_csv(tmp_path / "spectrum.csv")
        assert header == ["omega", "q", "j", "log_weight", "weight",
                          "thermal_log_weight", "valid"]
        omegas = [float(r[0]) for r in rows]
        assert omegas == [0.25, 0.5, 0.75, 1.0]
        for r in rows:
            w = float(r[0])
            assert float(r[3]) == pytest.approx(-8.0 * math.pi * w * (1 - w / 2), abs=1e-12)
            assert float(r[5]) == pytest.approx(-8.0 * math.pi * w, abs=1e-12)
            assert r[6] == "true"

    def test_round_trip_17_digits(self, tmp_path):
        run_cli("spectrum", "--mass", "1", "--bins", "3", "--output-dir", str(tmp_path))
        _, rows = read_csv(tmp_path / "spectrum.csv")
        from bhspectra import BlackHoleState, Emission, emission_log_weight

        s = BlackHoleState("schwarzschild", 1.0)
        for r in rows:
            assert float(r[3]) == emission_log_weight(s, Emission(float(r[0])))

    def test_super_extremal_exits_2_naming_the_condition(self, tmp_path):
        proc = run_subprocess(
            "spectrum", "--mass", "1", "--charge", "2", "--family", "rn",
            "--output-dir", str(tmp_path),
        )
        assert proc.returncode == 2
        assert "extremal" in proc.stderr

    def test_byte_determinism_modulo_timing(self, tmp_path):
        args = (
            "spectrum", "--mass", "2", "--omega-max", "2", "--bins", "32",
            "--normalization", "unitsum", "--seed", "7",
            "--output-dir", str(tmp_path),
        )
        run_cli(*args)
        first_csv = (tmp_path / "spectrum.csv").read_bytes()
        first_manifest = stable_manifest(tmp_path / "manifest.json")
        run_cli(*args)
        assert (tmp_path / "spectrum.csv").read_bytes() == first_csv
        assert stable_manifest(tmp_path / "manifest.json") == first_manifest

    def test_data_bytes_independent_of_output_dir(self, tmp_path):
        args = ("spectrum", "--mass", "2", "--omega-max", "2", "--bins", "8")
        run_cli(*args, "--output-dir", str(tmp_path / "a"))
        run_cli(*args, "--output-dir", str(tmp_path / "b"))
        assert (tmp_path / "a/spectrum.csv").read_bytes() == (
            tmp_path / "b/spectrum.csv"
        ).read_bytes()

    def test_manifest_hash_links_outputs(self, tmp_path):
        run_cli("spectrum", "--mass", "1", "--bins", "4", "--output-dir", str(tmp_path))
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        first = (tmp_path / "spectrum.csv").read_text().splitlines()[0]
        assert manifest["manifest_hash"] in first
        assert manifest["config"]["seed"] == 0  # defaulted seed still echoed

    def test_json_and_jsonl_formats(self, tmp_path):
        run_cli("spectrum", "--mass", "1", "--bins", "4", "--format", "json",
                "--output-dir", str(tmp_path / "j"))
        payload = json.loads((tmp_path / "j/spectrum.json").read_text())
        assert len(payload["bins"]) == 4
        run_cli("spectrum", "--mass", "1", "--bins", "4", "--format", "jsonl",
                "--output-dir", str(tmp_path / "l"))
        lines = (tmp_path / "l/spectrum.jsonl").read_text().splitlines()
        assert json.loads(lines[0])["type"] == "header"
        assert len(lines) == 5

    def test_report_flag_writes_info_report(self, tmp_path):
        run_cli("spectrum", "--mass", "1", "--omega-max", "0.5", "--bins", "8",
                "--report", "--output-dir", str(tmp_path))
        report = json.loads((tmp_path / "info_report.json").read_text())
        assert report["e_r"] > 0.0
        assert report["mi_numeric"] >= 0.0

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"mass": 2.0, "bins": 8, "omega_max": 1.0}))
        run_cli("spectrum", "--config", str(cfg), "--bins", "4",
                "--output-dir", str(tmp_path))
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["config"]["mass"] == 2.0   # from file
        assert manifest["config"]["bins"] == 4     # flag wins
        _, rows = read_csv(tmp_path / "spectrum.csv")
        assert len(rows) == 4

    def test_unknown_config_key_is_usage_error(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"masss": 2.0}))
        assert run_cli("spectrum", "--config", str(cfg), "--output-dir", str(tmp_path)) == 1

    def test_extremal_source_gets_nan_thermal_column(self, tmp_path):
        # An extremal hole has no pure-energy channels (any mass loss would
        # be super-extremal), so the grid needs a charge axis; and it has no
        # temperature, so the thermal column is nan.
        code = run_cli("spectrum", "--family", "rn", "--mass", "1", "--charge", "1",
                       "--omega-max", "0.2", "--bins", "2",
                       "--q-step", "0.1", "--n-q", "3", "--output-dir", str(tmp_path))
        assert code == 0
        _, rows = read_csv(tmp_path / "spectrum.csv")
        assert all(r[5] == "nan" for r in rows)
        assert any(r[6] == "true" for r in rows)   # q >= omega channels open
        assert any(r[6] == "false" for r in rows)  # pure-energy channels closed


class TestCascadeCommand:
    def test_jsonl_schema_and_report(self, tmp_path):
        code = run_cli(
            "cascade", "--mass", "0.5", "--energy-quantum", "0.125",
            "--n-samples", "10", "--seed", "3", "--output-dir", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "chains.jsonl").read_text().splitlines()
        header = json.loads(lines[0])
        assert header["type"] == "header" and header["n_samples"] == 10
        step = json.loads(lines[1])
        assert set(step) == {
            "sample_index", "step", "omega", "q", "j",
            "mass_before", "log_weight_raw", "log_prob_norm",
        }
        report = json.loads((tmp_path / "ensemble.json").read_text())
        assert report["n_samples"] == 10
        # complete uncharged cascades: raw chain log-prob is -4 pi M^2
        assert report["mean_raw_log_prob"] == pytest.approx(-math.pi, abs=1e-10)

    def test_invalid_policy_exits_1(self, tmp_path):
        assert run_cli(
            "cascade", "--mass", "0.5", "--energy-quantum", "0.125",
            "--max-steps", "0", "--output-dir", str(tmp_path),
        ) == 1

    def test_non_multiple_mass_exits_1(self, tmp_path):
        assert run_cli(
            "cascade", "--mass", "0.51", "--energy-quantum", "0.125",
            "--output-dir", str(tmp_path),
        ) == 1

    def test_parallel_workers_give_identical_bytes(self, tmp_path):
        args = ("cascade", "--mass", "0.75", "--energy-quantum", "0.125",
                "--n-samples", "64", "--seed", "11")
        run_cli(*args, "--workers", "1", "--output-dir", str(tmp_path / "w1"))
        run_cli(*args, "--workers", "4", "--output-dir", str(tmp_path / "w4"))
        a = (tmp_path / "w1/chains.jsonl").read_bytes()
        b = (tmp_path / "w4/chains.jsonl").read_bytes()
        assert a == b
        ra = json.loads((tmp_path / "w1/ensemble.json").read_text())
        rb = json.loads((tmp_path / "w4/ensemble.json").read_text())
        assert ra == rb

    def test_mass_before_tracks_chain(self, tmp_path):
        run_cli("cascade", "--mass", "0.5", "--energy-quantum", "0.25",
                "--n-samples", "2", "--output-dir", str(tmp_path))
        rows = [json.loads(x) for x in (tmp_path / "chains.jsonl").read_text().splitlines()[1:]]
        for row in rows:
            if row["step"] == 0:
                assert row["mass_before"] == 0.5


class TestVerifyCommand:
    def test_single_suite_passes_and_writes_report(self, tmp_path):
        code = run_cli("verify", "--suite", "cascade", "--output-dir", str(tmp_path))
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["all_passed"] is True
        names = {c["name"] for s in report["suites"] for c in s["checks"]}
        assert "enumeration_raw_equal" in names

    def test_corrupted_alpha_exits_2(self, tmp_path):
        proc = run_subprocess("verify", "--suite", "cascade", "--alpha", "nan",
                              "--output-dir", str(tmp_path))
        assert proc.returncode == 2

    def test_unknown_suite_exits_1(self, tmp_path):
        assert run_cli("verify", "--suite", "bogus", "--output-dir", str(tmp_path)) == 1


class TestTypicalityCommand:
    def test_writes_lab_report(self, tmp_path):
        code = run_cli(
            "typicality", "--dim-b", "4", "--dim-o", "256", "--seeds", "20",
            "--output-dir", str(tmp_path),
        )
        assert code == 0
        lab = json.loads((tmp_path / "typicality.json").read_text())
        assert lab["dim_o"] == 256 and lab["n_seeds"] == 20
        assert 0.2 < lab["rms_ratio"] < 0.9


class TestUsage:
    def test_missing_command_is_usage_error(self):
        assert run_cli() == 1

    def test_unknown_flag_is_usage_error(self):
        assert run_cli("spectrum", "--nope", "1") == 1

    def test_help_exits_zero(self):
        proc = run_subprocess("--help")
        assert proc.returncode == 0
        assert "spectrum" in proc.stdout
