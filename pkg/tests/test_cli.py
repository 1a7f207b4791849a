"""End-to-end tests for the command-line surface."""

import json
from pathlib import Path

import pytest

from cychern import cli
from cychern.cli import build_parser, config_from_args, entrypoint, main
from cychern.fixtures import fix_proj, fix_proj_even
from cychern.io import load_cochain
from cychern.io.codec import category_to_json, module_to_json
from cychern.io.exceptions import EXIT_CHECK_FAILED, EXIT_LOAD_FAILED, EXIT_OK


def report_from(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.mark.integration
class TestCommands:
    def test_validate_fixture(self, capsys):
        assert main(["validate", "fixture:FIX_NIL"]) == EXIT_OK
        report = report_from(capsys)
        assert report["command"] == "validate"
        assert report["pass"] is True

    def test_validate_text(self, capsys):
        code = main(["validate", "fixture:FIX_PROJ_EVEN", "--format", "text"])
        assert code == EXIT_OK
        assert capsys.readouterr().out.startswith("validate: PASS")

    def test_chern_writes_cochain(self, tmp_path, capsys):
        out = tmp_path / "phi2.json"
        code = main(["chern", "--m", "1", "fixture:FIX_PROJ_EVEN", "--out", str(out)])
        assert code == EXIT_OK
        assert report_from(capsys)["artifacts"]["minimal_m"] == 0
        phi = load_cochain(str(out))
        assert phi.degree == 2
        assert phi.at("p", "p", "p") == pytest.approx(-1, abs=1e-12)

    def test_chern_then_cocycle(self, tmp_path, capsys):
        out = tmp_path / "phi1.json"
        assert main(["chern", "--m", "1", "fixture:FIX_M2ODD", "--out", str(out)]) == 0
        assert main(["cocycle", str(out)]) == EXIT_OK
        capsys.readouterr()

    def test_periodicity(self, capsys):
        assert main(["periodicity", "fixture:FIX_PROJ_EVEN"]) == EXIT_OK
        names = [record["check"] for record in report_from(capsys)["records"]]
        assert "FIX_PROJ_EVEN.periodicity" in names

    def test_periodicity_needs_even_module(self, capsys):
        assert main(["periodicity", "fixture:FIX_M2ODD"]) == EXIT_CHECK_FAILED
        assert "even module" in capsys.readouterr().err

    def test_class_solve_reports_non_coboundary(self, tmp_path, capsys):
        path = tmp_path / "generator.json"
        path.write_text(
            json.dumps({"category": "fixture:FIX_PT", "degree": 2, "values": [[1, 0]]}),
            encoding="utf-8",
        )
        assert main(["class-solve", str(path)]) == EXIT_CHECK_FAILED
        record = report_from(capsys)["records"][0]
        assert record["pass"] is False
        assert record["residual"] == pytest.approx(0.5)

    def test_class_solve_with_category_flag(self, tmp_path, capsys):
        path = tmp_path / "zero.json"
        path.write_text(json.dumps({"degree": 1, "values": [[0, 0]]}), encoding="utf-8")
        code = main(["class-solve", str(path), "--category", "fixture:FIX_PT"])
        assert code == EXIT_OK
        capsys.readouterr()

    def test_report_to_file(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["validate", "fixture:FIX_M2", "--out", str(out)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text(encoding="utf-8"))["pass"] is True

    def test_chern_then_cocycle_on_file_category(self, tmp_path, capsys):
        (tmp_path / "cats").mkdir()
        (tmp_path / "out").mkdir()
        category = category_to_json(fix_proj())
        category["name"] = "myproj"
        (tmp_path / "cats" / "proj_cat.json").write_text(
            json.dumps(category), encoding="utf-8"
        )
        module = module_to_json(fix_proj_even(), category="cats/proj_cat.json")
        (tmp_path / "mod.json").write_text(json.dumps(module), encoding="utf-8")
        out = tmp_path / "out" / "phi2.json"

        module_path = str(tmp_path / "mod.json")
        code = main(["chern", "--m", "1", module_path, "--out", str(out)])
        assert code == EXIT_OK
        written = json.loads(out.read_text(encoding="utf-8"))
        assert written["category"] == str(Path("..") / "cats" / "proj_cat.json")
        assert main(["cocycle", str(out)]) == EXIT_OK
        capsys.readouterr()

    def test_cocycle_honours_cap(self, tmp_path, capsys):
        out = tmp_path / "phi2.json"
        chern = ["chern", "--m", "1", "fixture:FIX_PROJ_EVEN", "--out", str(out)]
        assert main(chern) == EXIT_OK
        assert main(["cocycle", str(out)]) == EXIT_OK
        assert main(["cocycle", str(out), "--cap", "4"]) == EXIT_CHECK_FAILED
        assert "exceeding the cap of 4" in capsys.readouterr().err


@pytest.mark.integration
class TestFailures:
    def test_bad_file(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        assert main(["validate", str(path)]) == EXIT_LOAD_FAILED
        assert str(path) in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["chern", str(tmp_path / "absent.json")]) == EXIT_LOAD_FAILED

    def test_unknown_fixture(self, capsys):
        assert main(["fixture", "FIX_NOPE"]) == EXIT_LOAD_FAILED
        assert "FIX_NOPE" in capsys.readouterr().err

    def test_empty_graded_dims(self, tmp_path, capsys):
        module = module_to_json(fix_proj_even())
        module["dims"]["*"] = {"plus": 0, "minus": 0}
        path = tmp_path / "module.json"
        path.write_text(json.dumps(module), encoding="utf-8")
        assert main(["validate", str(path)]) == EXIT_LOAD_FAILED
        assert "dims" in capsys.readouterr().err

    def test_invalid_tolerance(self):
        assert main(["validate", "fixture:FIX_NIL", "--tol", "-1"]) == EXIT_LOAD_FAILED

    def test_entrypoint_exits_with_status(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            entrypoint(["validate", "fixture:FIX_NIL"])
        assert excinfo.value.code == EXIT_OK
        capsys.readouterr()

    def test_entrypoint_handles_interrupt(self, monkeypatch):
        def interrupted(argv):
            raise KeyboardInterrupt

        monkeypatch.setattr(cli, "main", interrupted)
        with pytest.raises(SystemExit) as excinfo:
            entrypoint([])
        assert excinfo.value.code == EXIT_CHECK_FAILED


@pytest.mark.integration
class TestFixtureDump:
    def test_stdout(self, capsys):
        assert main(["fixture", "FIX_NIL"]) == EXIT_OK
        data = report_from(capsys)
        assert data["name"] == "FIX_NIL"
        assert data["objects"] == ["X", "Y"]

    def test_file_round_trip(self, tmp_path, capsys):
        out = tmp_path / "proj.json"
        assert main(["fixture", "FIX_PROJ_EVEN", "--out", str(out)]) == EXIT_OK
        assert main(["validate", str(out)]) == EXIT_OK
        assert report_from(capsys)["pass"] is True


@pytest.mark.unit
class TestArguments:
    def test_flags_override_run_file(self, tmp_path):
        run_file = tmp_path / "run.json"
        run_file.write_text(
            json.dumps({"command": "chern", "m": 2, "outputFormat": "text"}),
            encoding="utf-8",
        )
        args = build_parser().parse_args(
            ["chern", "fixture:FIX_PROJ_EVEN", "--config", str(run_file), "--m", "1"]
        )
        config = config_from_args(args)
        assert config.m == 1
        assert config.output_format == "text"
        assert config.inputs == ["fixture:FIX_PROJ_EVEN"]

    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv("CYCHERN_THREADS", "3")
        args = build_parser().parse_args(["suite"])
        assert config_from_args(args).threads == 3

    def test_window(self):
        args = build_parser().parse_args(
            ["homotopy", "fixture:FIX_ROTATION", "--t1", "0.25", "--t2", "0.75"]
        )
        config = config_from_args(args)
        assert (config.t1, config.t2) == (0.25, 0.75)
