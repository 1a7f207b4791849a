"""Tests for JSON loading, validation and emission."""

import json

import numpy as np
import pytest

from cychern.core.cochain import Cochain, cochain_complex
from cychern.core.exceptions import DimensionError
from cychern.core.fredholm import EvenModule, OddModule, chern_even, chern_odd
from cychern.core.homotopy import HomotopyFamily
from cychern.core.lincat import LinCat
from cychern.fixtures import conjugated_rotation_family
from cychern.io import (
    LoadError,
    SchemaError,
    ShapeError,
    detect_kind,
    dump_json,
    load,
    load_category,
    load_cochain,
    load_family,
    load_module,
    to_json,
    write_json,
)
from cychern.io.codec import category_to_json, family_to_json, module_to_json
from cychern.io.exceptions import EXIT_CHECK_FAILED, EXIT_LOAD_FAILED, exit_code_for


def write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.mark.integration
class TestRoundTrips:
    def test_category(self, tmp_path, nil):
        loaded = load_category(write(tmp_path / "nil.json", to_json(nil)))
        assert isinstance(loaded, LinCat)
        assert category_to_json(loaded) == category_to_json(nil)

    def test_even_module(self, tmp_path, proj_even):
        data = to_json(proj_even)
        assert data["category"] == "fixture:FIX_PROJ"
        loaded = load_module(write(tmp_path / "module.json", data))
        assert isinstance(loaded, EvenModule)
        np.testing.assert_allclose(
            chern_even(loaded, 1).values, chern_even(proj_even, 1).values, atol=1e-12
        )

    def test_odd_module(self, tmp_path, m2_odd):
        loaded = load_module(write(tmp_path / "odd.json", to_json(m2_odd)))
        assert isinstance(loaded, OddModule)
        assert chern_odd(loaded, 1).at("E12", "E21") == pytest.approx(-2)

    def test_module_with_relative_category(self, tmp_path, nil):
        write(tmp_path / "nil.json", to_json(nil))
        data = {
            "category": "nil.json",
            "kind": "odd",
            "dims": {"X": {"dim": 1}, "Y": {"dim": 1}},
            "F": {"X": [[[1, 0]]], "Y": [[[-1, 0]]]},
            "H": {
                name: [[[1, 0]]] if name in ("id_X", "id_Y") else [[[0, 0]]]
                for name in ("id_X", "id_Y", "u", "v", "e")
            },
        }
        loaded = load_module(write(tmp_path / "module.json", data))
        assert loaded.cat.name == "FIX_NIL"
        assert loaded.dims == {"X": 1, "Y": 1}

    def test_family(self, tmp_path, rotation):
        loaded = load_family(write(tmp_path / "family.json", to_json(rotation)))
        assert loaded.grid == rotation.grid
        for left, right in zip(loaded.samples, rotation.samples):
            np.testing.assert_allclose(left["p"], right["p"])

    def test_conjugated_family(self, tmp_path):
        fam = conjugated_rotation_family(5)
        data = family_to_json(fam)
        assert len(data["Q"]) == len(fam.grid)
        loaded = load_family(write(tmp_path / "qp.json", data))
        assert loaded.qp is not None
        for left, right in zip(loaded.samples, fam.samples):
            np.testing.assert_allclose(left["q"], right["q"], atol=1e-12)

    def test_cochain(self, tmp_path, proj_even):
        phi = chern_even(proj_even, 1)
        loaded = load_cochain(write(tmp_path / "phi.json", to_json(phi)))
        assert loaded.degree == 2
        np.testing.assert_array_equal(loaded.values, phi.values)

    def test_file_category_reference(self, tmp_path, proj_even):
        (tmp_path / "cats").mkdir()
        (tmp_path / "out").mkdir()
        category = to_json(proj_even.cat)
        category["name"] = "renamed"
        write(tmp_path / "cats" / "c.json", category)
        module = module_to_json(proj_even, category="cats/c.json")
        loaded = load_module(write(tmp_path / "m.json", module))
        assert loaded.cat.source == str((tmp_path / "cats" / "c.json").resolve())
        data = to_json(chern_even(loaded, 1), tmp_path / "out")
        phi = load_cochain(write(tmp_path / "out" / "phi.json", data))
        assert phi.cat.name == "renamed"
        assert phi.at("p", "p", "p") == pytest.approx(-1, abs=1e-12)

    def test_cochain_with_explicit_category(self, tmp_path, pt):
        data = {"degree": 0, "values": [[2, 1]]}
        loaded = load_cochain(write(tmp_path / "phi.json", data), cat=pt)
        assert loaded.at("1") == 2 + 1j


@pytest.mark.integration
class TestErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(LoadError) as excinfo:
            load_category(str(tmp_path / "absent.json"))
        assert not isinstance(excinfo.value, SchemaError)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_category(str(path))

    def test_shape_error_names_morphism(self, tmp_path, proj_even):
        data = module_to_json(proj_even)
        data["H"]["p"] = data["H"]["p"][:3]
        with pytest.raises(ShapeError) as excinfo:
            load_module(write(tmp_path / "module.json", data))
        assert excinfo.value.name == "p"
        assert "p" in excinfo.value.msg

    def test_bad_complex_entry(self, tmp_path, proj_even):
        data = module_to_json(proj_even)
        data["H"]["p"][0][0] = 1.0
        with pytest.raises(SchemaError) as excinfo:
            load_module(write(tmp_path / "module.json", data))
        assert excinfo.value.location.startswith("H.p")

    def test_unknown_morphism_in_module(self, tmp_path, proj_even):
        data = module_to_json(proj_even)
        data["H"]["pp"] = data["H"]["p"]
        with pytest.raises(SchemaError) as excinfo:
            load_module(write(tmp_path / "module.json", data))
        assert excinfo.value.location == "H.pp"

    def test_empty_graded_dims(self, tmp_path, proj_even):
        data = module_to_json(proj_even)
        data["dims"]["*"] = {"plus": 0, "minus": 0}
        with pytest.raises(SchemaError) as excinfo:
            load_module(write(tmp_path / "module.json", data))
        assert excinfo.value.location.startswith("dims")

    def test_unknown_field(self, tmp_path, nil):
        data = to_json(nil)
        data["comment"] = "extra"
        with pytest.raises(SchemaError):
            load_category(write(tmp_path / "nil.json", data))

    def test_unknown_morphism_in_table(self, tmp_path, nil):
        data = to_json(nil)
        data["compose"].append({"g": "w", "f": "u", "result": []})
        with pytest.raises(SchemaError):
            load_category(write(tmp_path / "nil.json", data))

    def test_dims_kind_checked(self, tmp_path, m2_odd):
        data = module_to_json(m2_odd)
        data["kind"] = "even"
        with pytest.raises(SchemaError):
            load_module(write(tmp_path / "module.json", data))

    def test_cochain_length(self, tmp_path):
        data = {"category": "fixture:FIX_PT", "degree": 1, "values": [[1, 0], [1, 0]]}
        with pytest.raises(ShapeError):
            load_cochain(write(tmp_path / "phi.json", data))

    def test_cochain_chain_order(self, tmp_path, proj_even):
        data = to_json(chern_even(proj_even, 0))
        data["chains"] = list(reversed(data["chains"]))
        with pytest.raises(SchemaError):
            load_cochain(write(tmp_path / "phi.json", data))

    def test_cochain_needs_category(self, tmp_path):
        with pytest.raises(SchemaError):
            load_cochain(write(tmp_path / "phi.json", {"degree": 0, "values": []}))

    def test_family_grid_mismatch(self, tmp_path, rotation):
        data = to_json(rotation)
        data["samples"][1]["t"] = 0.5
        with pytest.raises(SchemaError):
            load_family(write(tmp_path / "family.json", data))

    def test_family_grid_range(self, tmp_path):
        data = family_to_json(conjugated_rotation_family(5))
        data.pop("Q")
        data.pop("P")
        data["grid"] = [t / 2 for t in data["grid"]]
        for sample, t in zip(data["samples"], data["grid"]):
            sample["t"] = t
        with pytest.raises(SchemaError) as excinfo:
            load_family(write(tmp_path / "family.json", data))
        assert excinfo.value.location == "grid"

    def test_unknown_fixture(self):
        with pytest.raises(LoadError):
            load_module("fixture:FIX_NOPE")

    def test_fixture_of_wrong_type(self):
        with pytest.raises(LoadError):
            load_module("fixture:FIX_NIL")

    def test_exit_codes(self):
        assert exit_code_for(LoadError("a", "b")) == EXIT_LOAD_FAILED
        assert exit_code_for(DimensionError("op", "detail")) == EXIT_CHECK_FAILED


@pytest.mark.integration
class TestDetection:
    @pytest.mark.parametrize(
        "reference, kind",
        [
            ("fixture:FIX_NIL", "category"),
            ("fixture:FIX_PROJ_EVEN", "module"),
            ("fixture:FIX_M2ODD", "module"),
            ("fixture:FIX_ROTATION", "family"),
        ],
    )
    def test_fixtures(self, reference, kind):
        assert detect_kind(reference) == kind

    def test_files(self, tmp_path, nil, proj_even):
        assert detect_kind(write(tmp_path / "c.json", to_json(nil))) == "category"
        assert detect_kind(write(tmp_path / "m.json", to_json(proj_even))) == "module"
        phi = Cochain.zeros(cochain_complex(nil), 0)
        assert detect_kind(write(tmp_path / "phi.json", to_json(phi))) == "cochain"

    def test_unknown_shape(self, tmp_path):
        with pytest.raises(SchemaError):
            detect_kind(write(tmp_path / "x.json", {"hello": 1}))
        with pytest.raises(SchemaError):
            detect_kind(write(tmp_path / "y.json", [1, 2]))

    def test_load_dispatch(self):
        assert isinstance(load("fixture:FIX_ROTATION"), HomotopyFamily)
        with pytest.raises(ValueError):
            load("fixture:FIX_NIL", "tensor")


@pytest.mark.unit
class TestEmission:
    def test_sorted_output(self):
        text = dump_json({"b": 1, "a": 2})
        assert text.index('"a"') < text.index('"b"')

    def test_stdout(self, capsys):
        write_json({"pass": True})
        assert json.loads(capsys.readouterr().out) == {"pass": True}

    def test_file(self, tmp_path):
        out = tmp_path / "out.json"
        write_json([1, 2], str(out))
        assert json.loads(out.read_text(encoding="utf-8")) == [1, 2]
