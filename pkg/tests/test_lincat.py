"""Tests for presented linear categories and chain enumeration."""

import pytest

from cychern.core.exceptions import (
    CategoryError,
    CombinatorialBlowupError,
    ComposabilityError,
)
from cychern.core.lincat import (
    LinCat,
    LinComb,
    Morphism,
    chain_count,
    compose,
    enumerate_chains,
    is_cyclic_chain,
    spine,
    unitalize,
    validate_category,
)
from cychern.fixtures import FIXTURES, fix_nil, presented


def nil_with_broken_associativity() -> LinCat:
    cat = fix_nil()
    table = dict(cat.compose_table)
    table[("e", "u")] = LinComb.of({"u": 1})
    return LinCat(
        cat.objects, cat.morphisms, table, cat.identity_decomp, "FIX_NIL_BROKEN"
    )


@pytest.mark.unit
class TestComposition:
    def test_bilinear(self, nil):
        result = compose(nil, nil.basis("u").scale(2), nil.basis("v").scale(3))
        assert result.as_dict() == {"e": 6}
        assert (result.src, result.dst) == ("Y", "Y")

    def test_absent_entry_is_zero(self, nil):
        result = compose(nil, nil.basis("v"), nil.basis("u"))
        assert result.is_zero()
        assert (result.src, result.dst) == ("X", "X")

    def test_identity_acts(self, nil):
        assert compose(nil, nil.identity("Y"), nil.basis("u")).as_dict() == {"u": 1}
        assert compose(nil, nil.basis("u"), nil.identity("X")).as_dict() == {"u": 1}

    def test_non_composable(self, nil):
        with pytest.raises(ComposabilityError):
            compose(nil, nil.basis("u"), nil.basis("u"))

    def test_compose_basis_checks_types(self, nil):
        with pytest.raises(ComposabilityError):
            nil.compose_basis("e", "v")

    def test_unknown_morphism(self, nil):
        with pytest.raises(CategoryError):
            nil.morphism("w")

    def test_hom_bases(self, nil):
        assert nil.end("Y") == ("id_Y", "e")
        assert nil.hom("X", "Y") == ("u",)
        assert nil.hom_into("X") == ("id_X", "v")


@pytest.mark.unit
class TestPresentation:
    def test_duplicate_names(self):
        with pytest.raises(CategoryError):
            morphisms = [("a", "*", "*"), ("a", "*", "*")]
            presented("dup", ["*"], morphisms, {}, {"*": {"a": 1}})

    def test_unknown_endpoint(self):
        with pytest.raises(CategoryError):
            LinCat(("*",), (Morphism("a", "*", "Z"),), {}, {})

    def test_missing_identity(self, nil):
        with pytest.raises(CategoryError):
            nil.identity("Z")

    def test_lincomb_drops_small_terms(self):
        comb = LinComb.of({"a": 1e-16, "b": 2})
        assert comb.as_dict() == {"b": 2}
        assert comb.coefficient("a") == 0


@pytest.mark.unit
class TestValidation:
    @pytest.mark.parametrize(
        "name", ["FIX_PT", "FIX_DUAL", "FIX_NIL", "FIX_PROJ", "FIX_M2"]
    )
    def test_shipped_categories_are_valid(self, name):
        report = validate_category(FIXTURES[name]())
        assert report.ok, [str(v) for v in report.violations]

    def test_associativity_violation(self):
        report = validate_category(nil_with_broken_associativity())
        assert not report.ok
        assert "associativity" in report.kinds()
        assert any(v.where == ("e", "u", "v") for v in report.violations)

    def test_typing_violation(self, nil):
        table = dict(nil.compose_table)
        table[("u", "v")] = LinComb.of({"v": 1})
        broken = LinCat(nil.objects, nil.morphisms, table, nil.identity_decomp, "typed")
        report = validate_category(broken)
        assert report.kinds() == ["typing"]

    def test_wrong_identity(self, nil):
        identities = dict(nil.identity_decomp)
        identities["Y"] = LinComb.of({"id_Y": 1, "e": 1}, "Y", "Y")
        broken = LinCat(
            nil.objects, nil.morphisms, nil.compose_table, identities, "unit"
        )
        report = validate_category(broken)
        assert "identity" in report.kinds()

    def test_report_dict(self):
        report = validate_category(nil_with_broken_associativity())
        data = report.to_dict()
        assert data["subject"] == "FIX_NIL_BROKEN"
        assert data["ok"] is False
        assert data["violations"]


@pytest.mark.unit
class TestChains:
    def test_nil_counts(self, nil):
        assert len(enumerate_chains(nil, 0)) == 3
        assert len(enumerate_chains(nil, 1)) == 7
        assert chain_count(nil, 1) == 7

    @pytest.mark.parametrize("n", [0, 1, 2, 3])
    def test_count_matches_enumeration(self, nil, n):
        assert chain_count(nil, n) == len(enumerate_chains(nil, n))

    def test_point_has_one_chain_per_degree(self, pt):
        for n in range(5):
            assert enumerate_chains(pt, n) == [("1",) * (n + 1)]

    def test_chains_are_cyclic(self, nil):
        for chain in enumerate_chains(nil, 2):
            assert is_cyclic_chain(nil, chain)

    def test_declaration_order(self, nil):
        assert enumerate_chains(nil, 0) == [("id_X",), ("id_Y",), ("e",)]

    def test_spine(self, nil):
        assert spine(nil, ("u", "v")) == ("Y", "X")

    def test_blowup(self, m2):
        with pytest.raises(CombinatorialBlowupError):
            enumerate_chains(m2, 6, cap=100)

    def test_negative_degree(self, nil):
        with pytest.raises(ValueError):
            enumerate_chains(nil, -1)


@pytest.mark.unit
class TestUnitalize:
    def test_adjoins_strict_units(self, dual):
        unital = unitalize(dual)
        assert unital.end("*") == ("1", "x", "1_*")
        assert validate_category(unital).ok
        assert unital.identity("*").as_dict() == {"1_*": 1}

    def test_avoids_name_clash(self):
        cat = presented(
            "clash",
            ["*"],
            [("1_*", "*", "*")],
            {("1_*", "1_*"): {"1_*": 1}},
            {"*": {"1_*": 1}},
        )
        unital = unitalize(cat)
        assert "1_*'" in unital.end("*")
