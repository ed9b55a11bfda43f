import json

import pytest

from commands.suite import check_ar_bound_constants, check_condition_checkers, check_ledger, check_orbit_identities
from config import RunConfig
from main import run
from reports import EXIT_INPUT, EXIT_PASS, EXIT_VIOLATION, orbit_csv
from lab.iteration import orbit
from lab.mappings import ZOO, half
from lab.models import SpaceDescriptor, Vector
from version import LIBRARY_VERSION, SCHEMA_VERSION


def read_report(directory, command):
    with open(directory / f"{command}.json", encoding="utf-8") as f:
        return json.load(f)


class TestArBound:
    def test_report(self, tmp_path):
        assert run(["ar-bound", "--delta", "0.5", "--gamma", "0.5", "--out", str(tmp_path)]) == EXIT_PASS
        report = read_report(tmp_path, "ar-bound")
        assert (report["result"]["M"], report["result"]["L"], report["result"]["n0"]) == (5, 64, 321)
        assert report["seed"] == 0
        assert report["config"]["delta"] == 0.5
        assert report["library_version"] == LIBRARY_VERSION
        assert report["schema_version"] == SCHEMA_VERSION

    def test_timing_sidecar(self, tmp_path):
        run(["ar-bound", "--out", str(tmp_path)])
        timing = read_report(tmp_path, "ar-bound.timing")
        assert timing["duration_seconds"] >= 0

    def test_nothing_written_without_out(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run(["ar-bound"]) == EXIT_PASS
        assert list(tmp_path.iterdir()) == []

    @pytest.mark.parametrize("flags", [["--gamma", "1.0"], ["--delta", "-1"], ["--p", "0.5"]])
    def test_schema_violation(self, flags):
        assert run(["ar-bound", *flags]) == EXIT_INPUT


class TestCheckCondition:
    def test_interval_threshold_satisfies_condition_c(self, tmp_path):
        code = run(["check-condition", "--map", "interval_threshold", "--lambda", "0.5", "--step", "0.005", "--out", str(tmp_path)])
        assert code == EXIT_PASS
        report = read_report(tmp_path, "check-condition")["result"]["report"]
        assert report["verdict"] == "no_violation_found"
        assert report["lambda"] == 0.5

    def test_nonexpansive_violation(self, tmp_path):
        code = run(["check-condition", "--condition", "nonexpansive", "--step", "0.01", "--out", str(tmp_path)])
        assert code == EXIT_VIOLATION
        assert read_report(tmp_path, "check-condition")["result"]["report"]["violations"]

    def test_l_witness(self):
        assert run(["check-condition", "--map", "half", "--condition", "L_witness", "--step", "0.1", "--tol", "0.01"]) == EXIT_PASS

    def test_unknown_map(self):
        assert run(["check-condition", "--map", "spiral"]) == EXIT_INPUT

    def test_plane_map_uses_dimension_default_step(self, tmp_path):
        assert run(["check-condition", "--map", "rotation", "--out", str(tmp_path)]) == EXIT_PASS
        assert read_report(tmp_path, "check-condition")["result"]["report"]["verdict"] == "no_violation_found"

    def test_oversized_grid(self):
        assert run(["check-condition", "--map", "rotation", "--step", "0.005"]) == EXIT_INPUT

    def test_config_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("map: half\nlambda: 0.25\nstep: 0.05\nseed: 4\n")
        out = tmp_path / "out"
        assert run(["check-condition", "--config", str(path), "--out", str(out)]) == EXIT_PASS
        report = read_report(out, "check-condition")
        assert report["config"]["lambda"] == 0.25
        assert report["seed"] == 4
        assert report["result"]["report"]["map_name"] == "half"

    def test_missing_config_file(self, tmp_path):
        assert run(["check-condition", "--config", str(tmp_path / "absent.yaml")]) == EXIT_INPUT


class TestIterate:
    def test_orbit_csv(self, tmp_path):
        code = run(["iterate", "--map", "half", "--x0", "1.0", "--steps", "3", "--step", "0.01", "--out", str(tmp_path)])
        assert code == EXIT_PASS
        lines = (tmp_path / "iterate.csv").read_text().splitlines()
        assert lines[0] == f"# schema_version: {SCHEMA_VERSION}"
        assert lines[1] == "step,x1,residual,t_residual"
        assert lines[2] == "0,1.0,0.25,0.5"
        assert lines[-1] == "3,0.421875,,0.2109375"

    def test_default_orbit_of_interval_threshold(self, tmp_path):
        assert run(["iterate", "--out", str(tmp_path)]) == EXIT_PASS
        result = read_report(tmp_path, "iterate")["result"]
        assert result["trace"]["iterates"][:3] == [[3.0], [2.0], [1.0]]
        assert result["monotonicity"]["monotone"]
        assert result["identity3_deviation"] <= 1e-10

    def test_plane_map(self):
        assert run(["iterate", "--map", "rotation", "--steps", "5"]) == EXIT_PASS

    def test_start_outside_body(self):
        assert run(["iterate", "--map", "half", "--x0", "2.0"]) == EXIT_INPUT

    def test_csv_matches_trace(self):
        trace = orbit(half(), 0.5, Vector.of([1.0], SpaceDescriptor.lp(2.0, 1)), 2)
        rows = orbit_csv(trace).splitlines()[2:]
        assert [row.split(",")[0] for row in rows] == ["0", "1", "2"]


class TestModuli:
    @pytest.mark.parametrize("p", ["2", "3", "sup"])
    def test_consistent_models(self, p, tmp_path):
        assert run(["moduli", "--p", p, "--out", str(tmp_path)]) == EXIT_PASS
        result = read_report(tmp_path, "moduli")["result"]
        assert result["equivalence"]["agree"]
        assert all(c["deviation"] <= 1e-6 for c in result["cross_checks"])

    def test_schur_space(self, tmp_path):
        assert run(["moduli", "--p", "1", "--out", str(tmp_path)]) == EXIT_PASS
        result = read_report(tmp_path, "moduli")["result"]
        assert result["profile"]["schur"]
        assert "cross_checks" not in result


class TestLedger:
    def test_reports_are_byte_identical(self, tmp_path):
        args = ["ledger", "--name", "thm21", "--samples", "10000", "--seed", "0", "--out", str(tmp_path)]
        runs = []
        for _ in range(2):
            assert run(args) == EXIT_PASS
            runs.append((tmp_path / "ledger.json").read_bytes())
        assert runs[0] == runs[1]

    def test_all(self, tmp_path):
        assert run(["ledger", "--name", "all", "--samples", "1000", "--out", str(tmp_path)]) == EXIT_PASS
        reports = read_report(tmp_path, "ledger")["result"]["reports"]
        assert [r["name"] for r in reports] == ["lemma33", "lemma41", "lemma_zn", "przs", "thm21"]

    def test_unknown_check(self):
        assert run(["ledger", "--name", "lemma99"]) == EXIT_INPUT


class TestSuite:
    def test_bad_gamma(self):
        assert run(["suite", "--gamma", "1.0"]) == EXIT_INPUT

    def test_single_checks(self):
        run_config = RunConfig(command="suite", samples=1000)
        assert check_ar_bound_constants(run_config)[1]
        assert check_condition_checkers(run_config)[1]
        assert check_ledger(run_config)[1]

    def test_orbit_identities_follow_soundness_starts(self):
        name, passed, detail = check_orbit_identities(RunConfig(command="suite", starts=3, horizon=64))
        assert passed, detail
        assert detail.startswith(f"{len(ZOO) * 3 * 3} orbits of 64 steps")

    @pytest.mark.parametrize("seed", [7, 9])
    def test_verdicts_do_not_depend_on_seed(self, seed):
        name, passed, _ = check_ledger(RunConfig(command="suite", samples=1000, seed=seed))
        assert passed

    def test_full_battery(self, tmp_path):
        code = run(["suite", "--samples", "1000", "--starts", "10", "--out", str(tmp_path)])
        checks = read_report(tmp_path, "suite")["result"]["checks"]
        assert code == EXIT_PASS, checks
        assert {c["name"] for c in checks} == {
            "ar_bound_constants",
            "ar_soundness",
            "condition_checkers",
            "determinism",
            "geometry_moduli",
            "ledger_sweeps",
            "orbit_identities",
        }
