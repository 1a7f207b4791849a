"""Tests for run configuration and tolerances."""

import json

import pytest

from cychern.config import (
    THREADS_ENV,
    TOLERANCES,
    RunConfig,
    Tolerances,
    threads_from_env,
)


@pytest.mark.unit
class TestTolerances:
    def test_defaults(self):
        assert TOLERANCES.cocycle == 1e-10
        assert TOLERANCES.homotopy == 1e-6

    def test_must_be_positive(self):
        with pytest.raises(ValueError, match="cocycle"):
            Tolerances(cocycle=0)

    def test_scaled(self):
        scaled = TOLERANCES.scaled(1e-3)
        assert scaled.cocycle == scaled.homotopy == scaled.golden == 1e-3
        assert scaled.leibniz_ratio == TOLERANCES.leibniz_ratio
        assert TOLERANCES.scaled(None) is TOLERANCES


@pytest.mark.unit
class TestThreads:
    def test_unset(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert threads_from_env() == 1
        assert threads_from_env(4) == 4

    def test_set(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, " 2 ")
        assert threads_from_env() == 2

    @pytest.mark.parametrize("raw", ["two", "0", "-3"])
    def test_invalid(self, monkeypatch, raw):
        monkeypatch.setenv(THREADS_ENV, raw)
        with pytest.raises(ValueError, match=THREADS_ENV):
            threads_from_env()


@pytest.mark.unit
class TestRunConfig:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"command": "explode"},
            {"tol": 0.0},
            {"cap": 0},
            {"output_format": "yaml"},
            {"threads": 0},
            {"m": -1},
            {"degree": -2},
            {"t1": 0.5, "t2": 0.5},
            {"t2": 1.5},
        ],
    )
    def test_validation(self, overrides):
        with pytest.raises(ValueError):
            RunConfig(**overrides)

    def test_tolerances_follow_override(self):
        assert RunConfig(tol=1e-4).tolerances.periodicity == 1e-4
        assert RunConfig().tolerances is TOLERANCES

    def test_from_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        path = tmp_path / "run.json"
        path.write_text(
            json.dumps(
                {
                    "command": "homotopy",
                    "inputs": ["fixture:FIX_ROTATION"],
                    "outputFormat": "text",
                    "t1": 0.25,
                }
            ),
            encoding="utf-8",
        )
        config = RunConfig.from_file(str(path))
        assert config.command == "homotopy"
        assert config.output_format == "text"
        assert (config.t1, config.t2) == (0.25, 1.0)
        assert config.threads == 1

    def test_from_file_errors(self, tmp_path):
        with pytest.raises(ValueError):
            RunConfig.from_file(" ")
        with pytest.raises(ValueError, match="Failed to load"):
            RunConfig.from_file(str(tmp_path / "absent.json"))

    def test_update_revalidates(self):
        config = RunConfig(command="chern", m=1)
        assert config.update(m=2).m == 2
        assert config.m == 1
        with pytest.raises(ValueError):
            config.update(threads=0)

    def test_to_dict(self):
        data = RunConfig(command="fixture", inputs=["FIX_PT"]).to_dict()
        assert data["outputFormat"] == "json"
        assert data["inputs"] == ["FIX_PT"]
        assert "output_format" not in data
