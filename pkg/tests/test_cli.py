import json

import numpy as np
import pytest

from cli import UsageError
from cli.commands import resolve_model, run
from cli.config import RunConfig, parse_run_config
from cli.report import Report
from exterior_algebra import kform_to_json
from local_models import build_model
from orchestrator import main
from utils import config

SMALL_TORUS = {
    "m": 2,
    "n": 2,
    "G": [[1.5, 0.3], [0.3, 0.8]],
    "H": [[1.2, -0.2], [-0.2, 0.9]],
    "Q": [[1, 1], [0, 1]],
    "gridN": 16,
    "modes": 3,
    "amplitude": 0.05,
}


def write_json(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def run_main(capsys, argv):
    code = main(argv + ["--quiet"])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRunConfig:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("CALIBRA_SEED", raising=False)
        cfg = parse_run_config(["oracles"])
        assert cfg.seed == config.DEFAULT_SEED
        assert cfg.fmt == "json"
        assert cfg.count("trials", 100) == 100

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv("CALIBRA_SEED", "77")
        assert parse_run_config(["oracles"]).seed == 77
        assert parse_run_config(["oracles", "--seed", "3"]).seed == 3

    def test_config_file_precedence(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CALIBRA_SEED", "77")
        path = write_json(tmp_path / "run.json", {"seed": 5, "trials": 40})
        cfg = parse_run_config(["verify", "--config", path])
        assert cfg.seed == 5
        assert cfg.count("trials", 100) == 40
        cfg = parse_run_config(["verify", "--config", path, "--trials", "9", "--seed", "1"])
        assert cfg.seed == 1
        assert cfg.count("trials", 100) == 9

    def test_quick_scales_counts(self):
        cfg = parse_run_config(["verify", "--quick", "--trials", "1000"])
        assert cfg.count("trials", 5) == 1000 // config.QUICK_FACTOR

    def test_schema_violation_path(self, tmp_path):
        path = write_json(tmp_path / "bad.json", dict(SMALL_TORUS, gridN=2))
        with pytest.raises(UsageError) as exc:
            parse_run_config(["torus-min", "--config", path])
        assert exc.value.path == "$.gridN"

    def test_nested_path(self, tmp_path):
        path = write_json(tmp_path / "bad.json", dict(SMALL_TORUS, Q=[[1, 1], [0, 0.5]]))
        with pytest.raises(UsageError) as exc:
            parse_run_config(["torus-min", "--config", path])
        assert exc.value.path == "$.Q[1][1]"

    def test_csv_only_for_flows(self):
        with pytest.raises(UsageError):
            parse_run_config(["verify", "--csv"])

    def test_torus_needs_config(self):
        with pytest.raises(UsageError):
            parse_run_config(["intersection"])

    def test_bad_counts(self):
        with pytest.raises(UsageError):
            parse_run_config(["verify", "--trials", "0"])
        with pytest.raises(UsageError):
            parse_run_config(["verify", "--seed", "-1"])

    def test_echo_omits_execution_details(self):
        payload = parse_run_config(["verify", "--workers", "3", "--output", "x.json"]).to_dict()
        assert "workers" not in payload and "output" not in payload


class TestReport:
    def test_digest_ignores_timestamps(self):
        a = Report("oracles", {"seed": 1}, {"x": 1.5}, True, started_at="2026-01-01T00:00:00", duration_ms=3.0)
        b = Report("oracles", {"seed": 1}, {"x": 1.5}, True, started_at="2026-02-01T00:00:00", duration_ms=9.0)
        assert a.digest == b.digest
        assert len(a.digest) == 64

    def test_digest_tracks_results(self):
        a = Report("oracles", {}, {"x": 1.5}, True)
        b = Report("oracles", {}, {"x": 1.5000000000000002}, True)
        assert a.digest != b.digest

    def test_exit_code(self):
        assert Report("models", {}, {}, True).exit_code == 0
        assert Report("models", {}, {}, False).exit_code == 1

    def test_csv(self):
        report = Report("torus-min", {}, {}, True, trace_rows=[(0, 2.5), (1, 2.0)])
        assert report.to_csv() == "iteration,energy\n0,2.5\n1,2.0\n"


class TestModels:
    def test_g2(self, capsys):
        code, out, _ = run_main(capsys, ["models", "--tag", "g2", "--samples", "200", "--trials", "200", "--seed", "7"])
        assert code == 0
        report = json.loads(out)
        model = report["results"]["models"][0]
        assert model["iotaConstSq"] == pytest.approx(3.0)
        assert report["pass"] is True
        assert report["command"] == "models"

    def test_kahler_with_q_flag(self):
        assert resolve_model("kahler", 3).label == "kahler(3)"

    def test_negated_g2_term_fails(self, tmp_path, capsys):
        form = build_model("g2").form
        coeffs = form.coeffs.copy()
        first = int(np.flatnonzero(coeffs)[0])
        coeffs[first] = -coeffs[first]
        payload = kform_to_json(type(form)(form.m, form.k, coeffs))
        path = write_json(tmp_path / "g2_mutant.json", payload)
        code, out, _ = run_main(capsys, ["models", "--tag", "g2", "--form", path, "--samples", "100", "--trials", "100"])
        assert code == 1
        model = json.loads(out)["results"]["models"][0]
        assert model["structure"]["pass"] is False
        assert model["pass"] is False

    def test_form_degree_mismatch(self, tmp_path, capsys):
        path = write_json(tmp_path / "form.json", {"m": 7, "k": 2, "coeffs": [0.0] * 21})
        code, _, err = run_main(capsys, ["models", "--tag", "g2", "--form", path])
        assert code == 2
        assert "$.m" in err

    def test_bad_tag(self, capsys):
        code, _, err = run_main(capsys, ["models", "--tag", "kahler(0)"])
        assert code == 2
        assert "$.tag" in err


class TestVerify:
    def test_amgm(self, capsys):
        code, out, _ = run_main(capsys, ["verify", "--suite", "amgm", "--trials", "500"])
        assert code == 0
        suite = json.loads(out)["results"]["suites"][0]
        assert suite["suite"] == "amgm"
        assert suite["minMargin"] >= -1e-10

    def test_unknown_suite(self, capsys):
        code, _, _ = run_main(capsys, ["verify", "--suite", "hodge"])
        assert code == 2

    def test_workers_keep_digest(self, capsys):
        _, first, _ = run_main(capsys, ["verify", "--suite", "amgm", "--trials", "3000", "--workers", "1"])
        _, second, _ = run_main(capsys, ["verify", "--suite", "amgm", "--trials", "3000", "--workers", "3"])
        assert json.loads(first)["digest"] == json.loads(second)["digest"]

    def test_oracles(self, capsys):
        code, out, _ = run_main(capsys, ["oracles", "--trials", "200"])
        assert code == 0
        assert json.loads(out)["results"]["oracles"]["failures"] == 0


class TestTorusCommands:
    def test_torus_min(self, tmp_path, capsys):
        path = write_json(tmp_path / "t2.json", SMALL_TORUS)
        code, out, _ = run_main(capsys, ["torus-min", "--config", path])
        assert code == 0
        trace = json.loads(out)["results"]["trace"]
        assert trace["relativeGap"] <= config.FLOW_TARGET_RTOL
        assert trace["supDeviation"] <= config.FLOW_SUP_TOL

    def test_torus_min_csv(self, tmp_path, capsys):
        path = write_json(tmp_path / "t2.json", SMALL_TORUS)
        out_path = tmp_path / "trace.csv"
        code, out, _ = run_main(capsys, ["torus-min", "--config", path, "--csv", "--output", str(out_path)])
        assert code == 0
        assert out == ""
        lines = out_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "iteration,energy"
        assert lines[1].startswith("0,")
        energies = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))

    def test_invariance(self, tmp_path, capsys):
        path = write_json(tmp_path / "t2.json", SMALL_TORUS)
        code, out, _ = run_main(capsys, ["torus-invariance", "--config", path, "--trials", "5"])
        assert code == 0
        assert json.loads(out)["results"]["invariance"]["maxDeviation"] <= config.INVARIANCE_TOL

    def test_calibration(self, tmp_path, capsys):
        path = write_json(tmp_path / "t2.json", SMALL_TORUS)
        code, _, _ = run_main(capsys, ["torus-calibration", "--config", path, "--trials", "2000"])
        assert code == 0

    def test_calibration_zero_class(self, tmp_path, capsys):
        path = write_json(tmp_path / "zero.json", dict(SMALL_TORUS, Q=[[0, 0], [0, 0]]))
        code, _, err = run_main(capsys, ["torus-calibration", "--config", path, "--trials", "10"])
        assert code == 2
        assert "$.Q" in err

    def test_bound(self, tmp_path, capsys):
        path = write_json(tmp_path / "t2.json", SMALL_TORUS)
        code, out, _ = run_main(capsys, ["bound", "--config", path])
        assert code == 0
        bounds = json.loads(out)["results"]["bounds"]
        assert [b["k"] for b in bounds] == [1, 2]
        assert all(0 < b["bound"] <= b["linearEnergy"] for b in bounds)

    def test_bound_degree_out_of_range(self, tmp_path, capsys):
        path = write_json(tmp_path / "t2.json", SMALL_TORUS)
        code, _, err = run_main(capsys, ["bound", "--config", path, "--k", "3"])
        assert code == 2
        assert "$.k" in err

    def test_intersection(self, tmp_path, capsys):
        path = write_json(tmp_path / "t2.json", SMALL_TORUS)
        code, out, _ = run_main(capsys, ["intersection", "--config", path, "--samples", "4000", "--seed", "3"])
        assert code == 0
        result = json.loads(out)["results"]["intersection"]
        assert result["closedFormJF"] > 0
        assert result["pass"] is True

    def test_counterexample(self, capsys):
        code, out, _ = run_main(capsys, ["counterexample"])
        assert code == 0
        assert json.loads(out)["results"]["counterexample"]["energy"] == pytest.approx(1.0, abs=1e-10)

    def test_counterexample_with_folding_amplitude_fails(self, tmp_path, capsys):
        path = write_json(tmp_path / "fold.json", {"amplitude": 3.0, "gridN": 400})
        code, out, _ = run_main(capsys, ["counterexample", "--config", path])
        result = json.loads(out)["results"]["counterexample"]
        assert code == 1
        assert result["amplitude"] == 3.0
        assert result["maxResidual"] > 1.0


class TestMain:
    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["fly"])
        assert exc.value.code == 2

    def test_unreadable_config(self, tmp_path, capsys):
        bad = tmp_path / "broken.json"
        bad.write_text("{not json", encoding="utf-8")
        code, _, _ = run_main(capsys, ["torus-min", "--config", str(bad)])
        assert code == 2

    def test_reports_are_reproducible(self, tmp_path, capsys):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        for out_path in (first, second):
            assert run_main(capsys, ["verify", "--suite", "wirtinger", "--trials", "400", "--output", str(out_path)])[0] == 0
        a = json.loads(first.read_text(encoding="utf-8"))
        b = json.loads(second.read_text(encoding="utf-8"))
        for payload in (a, b):
            payload.pop("startedAt")
            payload.pop("durationMs")
        assert a == b

    def test_run_returns_report(self):
        report = run(RunConfig(command="counterexample", seed=1, quiet=True))
        assert report.passed
        assert report.to_dict()["digest"] == report.digest


REDUCED_SUITE = (
    ("TORUS_INSTANCES", 1),
    ("DEFAULT_GRID_N", 16),
    ("IOTA_SAMPLES", 200),
    ("PROP53_TRIALS", 200),
    ("UNITARY_TRIALS", 20),
    ("VERIFY_TRIALS", 300),
    ("ORACLE_TRIALS", 100),
    ("INVARIANCE_TRIALS", 5),
    ("INTERSECTION_SAMPLES", 5000),
)


class TestSuiteAll:
    @pytest.fixture(autouse=True)
    def reduced_counts(self, monkeypatch):
        for name, value in REDUCED_SUITE:
            monkeypatch.setattr(config, name, value)

    def test_reduced_run_passes(self, capsys):
        code, out, _ = run_main(capsys, ["suite-all", "--seed", "11"])
        report = json.loads(out)
        assert code == 0
        results = report["results"]
        assert len(results["models"]) == 5
        assert [s["suite"] for s in results["verify"]] == ["lichnerowicz", "wirtinger", "fibration", "amgm", "lemma41"]
        assert len(results["torusMin"]) == 1
        assert len(results["intersection"]) == 3
        assert [b["k"] for b in results["bounds"]] == [1, 2]
        assert all(b["bound"] <= b["measuredEnergy"] for b in results["bounds"])

    def test_tag_adds_to_acceptance_models(self, capsys):
        code, out, _ = run_main(capsys, ["suite-all", "--seed", "11", "--tag", "g2"])
        models = json.loads(out)["results"]["models"]
        assert code == 0
        assert [model["tag"] for model in models] == ["kahler(2)", "kahler(3)", "quaternionic(2)", "g2", "spin7", "g2"]
