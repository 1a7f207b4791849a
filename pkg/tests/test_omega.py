"""Tests for the universal DG-semicategory, S and the S-on-B check."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cychern.core.cochain import (
    Cochain,
    cochain_complex,
    hochschild_b,
    is_cyclic_cocycle,
)
from cychern.core.exceptions import (
    ComposabilityError,
    DegreeMismatchError,
    PreconditionError,
)
from cychern.core.fredholm import chern_even
from cychern.core.omega import (
    OmegaForm,
    admissible_s_on_B_inputs,
    basis_form,
    check_s_on_B,
    compose_all,
    compose_forms,
    differential,
    graded_trace_residual,
    periodicity_S,
    random_form,
    s_coboundary_witness,
    spines_between,
    trace_eval,
    unit_form,
)
from cychern.fixtures import fix_dual, fix_nil, fix_proj_even

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def form_distance(a: OmegaForm, b: OmegaForm) -> float:
    difference = a - b
    return max((abs(value) for value in difference.terms.values()), default=0.0)


def point_generator(pt):
    return Cochain.from_mapping(cochain_complex(pt), 2, {("1", "1", "1"): 1})


@pytest.mark.unit
class TestNormalForm:
    def test_dual_square_vanishes(self, dual):
        form = basis_form(dual, "x", ["x"])
        assert compose_forms(form, form).is_zero()

    def test_moving_head_left(self, dual):
        product = compose_forms(unit_form(dual, ["x"]), basis_form(dual, "x"))
        assert product.terms == {("x", ("x",)): -1}

    def test_head_products_expand(self, nil):
        product = compose_forms(basis_form(nil, "u"), basis_form(nil, "v"))
        assert product.terms == {("e", ()): 1}
        assert (product.source, product.target) == ("Y", "Y")

    def test_zero_composite_vanishes(self, nil):
        assert compose_forms(basis_form(nil, "v"), basis_form(nil, "u")).is_zero()

    def test_non_composable(self, nil):
        with pytest.raises(ComposabilityError):
            compose_forms(basis_form(nil, "u"), basis_form(nil, "u"))

    def test_bad_spine(self, nil):
        with pytest.raises(ComposabilityError):
            basis_form(nil, "u", ["u"])

    def test_empty_unit_needs_object(self, nil):
        with pytest.raises(ValueError):
            unit_form(nil)

    def test_differential(self, nil):
        form = basis_form(nil, "u", ["id_X"])
        assert differential(form).terms == {(None, ("u", "id_X")): 1}
        assert differential(differential(form)).is_zero()

    def test_mixed_degree(self, dual):
        mixed = basis_form(dual, "x") + basis_form(dual, "x", ["x"])
        with pytest.raises(DegreeMismatchError):
            mixed.degree

    def test_str(self, dual):
        assert str(basis_form(dual, "x", ["x"])) == "(1+0j) x dx"
        assert str(OmegaForm(dual, "*", "*", {})) == "0"


@pytest.mark.unit
class TestAlgebraLaws:
    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_leibniz(self, seed):
        rng = np.random.default_rng(seed)
        cat = fix_nil()
        a = random_form(cat, 1, "X", "Y", rng)
        b = random_form(cat, 1, "Y", "X", rng)
        left = differential(compose_forms(a, b))
        right = compose_forms(differential(a), b) - compose_forms(a, differential(b))
        assert form_distance(left, right) < 1e-9

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_associative(self, seed):
        rng = np.random.default_rng(seed)
        cat = fix_dual()
        a, b, c = (random_form(cat, k, "*", "*", rng) for k in (1, 0, 2))
        left = compose_forms(compose_forms(a, b), c)
        right = compose_forms(a, compose_forms(b, c))
        assert form_distance(left, right) < 1e-9
        assert form_distance(compose_all([a, b, c]), left) < 1e-12

    def test_spines_compose(self, nil):
        keys = spines_between(nil, 2, "X", "Y")
        assert (None, ("u", "id_X")) in keys
        for head, letters in keys:
            if head is not None:
                assert basis_form(nil, head, letters).source == "X"
            else:
                assert unit_form(nil, letters).source == "X"


@pytest.mark.unit
class TestTrace:
    def test_point_generator(self, pt):
        assert trace_eval(point_generator(pt), basis_form(pt, "1", ["1", "1"])) == 1

    def test_unit_head_is_zero(self, pt):
        assert trace_eval(point_generator(pt), unit_form(pt, ["1", "1"])) == 0

    def test_degree_mismatch(self, pt):
        with pytest.raises(DegreeMismatchError):
            trace_eval(point_generator(pt), basis_form(pt, "1", ["1"]))

    def test_non_endomorphism(self, nil):
        phi = Cochain.zeros(cochain_complex(nil), 0)
        with pytest.raises(ComposabilityError):
            trace_eval(phi, basis_form(nil, "u"))

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_graded_trace_of_character(self, seed):
        rng = np.random.default_rng(seed)
        phi = chern_even(fix_proj_even(), 1)
        cat = phi.cat
        for i in (0, 1, 2):
            a = random_form(cat, i, "*", "*", rng)
            b = random_form(cat, 2 - i, "*", "*", rng)
            assert graded_trace_residual(phi, a, b) < 1e-9
        closed = differential(random_form(cat, 1, "*", "*", rng))
        assert abs(trace_eval(phi, closed)) < 1e-12


@pytest.mark.unit
class TestPeriodicity:
    def test_normalization_on_point(self, pt):
        image = periodicity_S(point_generator(pt))
        assert image.degree == 4
        assert image.at("1", "1", "1", "1", "1") == pytest.approx(2)

    def test_degree_zero_on_point(self, pt):
        phi = Cochain.from_mapping(cochain_complex(pt), 0, {("1",): 1})
        assert periodicity_S(phi).at("1", "1", "1") == pytest.approx(1)

    def test_rejects_non_cocycle(self, nil):
        phi = Cochain.from_mapping(cochain_complex(nil), 1, {("u", "v"): 1})
        with pytest.raises(PreconditionError):
            periodicity_S(phi)

    def test_image_is_cyclic_cocycle(self, proj_even):
        assert is_cyclic_cocycle(periodicity_S(chern_even(proj_even, 0)))

    @pytest.mark.parametrize("degree", [0, 2])
    def test_witness_on_point(self, pt, degree):
        chain = ("1",) * (degree + 1)
        phi = Cochain.from_mapping(cochain_complex(pt), degree, {chain: 1})
        witness = s_coboundary_witness(phi)
        assert (hochschild_b(witness) - periodicity_S(phi)).norm() < 1e-12

    def test_witness_on_projections(self, proj_even):
        phi = chern_even(proj_even, 0)
        witness = s_coboundary_witness(phi)
        assert (hochschild_b(witness) - periodicity_S(phi)).norm() < 1e-10


@pytest.mark.unit
class TestSOnB:
    @pytest.mark.parametrize("n", [2, 3])
    def test_point(self, pt, rng, n):
        cx = cochain_complex(pt)
        inputs = admissible_s_on_B_inputs(cx, n)
        psi = Cochain(cx, n, inputs @ (rng.standard_normal(inputs.shape[1]) + 0j))
        report = check_s_on_B(psi)
        assert report.passed
        assert report.degree == n

    def test_hypothesis_enforced(self, nil, rng):
        psi = Cochain.random(cochain_complex(nil), 1, rng)
        with pytest.raises(PreconditionError):
            check_s_on_B(psi)

    def test_degree_zero_rejected(self, pt):
        with pytest.raises(DegreeMismatchError):
            check_s_on_B(Cochain.zeros(cochain_complex(pt), 0))
