"""Tests for the dense matrix kernel."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cychern.core.exceptions import DimensionError, DomainError
from cychern.core.numkernel import (
    GradedDims,
    as_matrix,
    graded_commutator,
    schatten_norm,
    singular_values,
    swap_symmetry,
    trace,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_matrix(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


@pytest.mark.unit
class TestAsMatrix:
    def test_nested_lists(self):
        matrix = as_matrix([[1, 2j], [3, 4]])
        assert matrix.dtype == np.complex128
        assert matrix[0, 1] == 2j

    def test_rejects_vectors(self):
        with pytest.raises(DimensionError):
            as_matrix([1, 2, 3])

    def test_rejects_nan(self):
        with pytest.raises(DomainError):
            as_matrix([[np.nan]])


@pytest.mark.unit
class TestTrace:
    def test_diagonal_sum(self):
        assert trace(np.diag([1, 2j, -3])) == pytest.approx(-2 + 2j)

    def test_non_square(self):
        with pytest.raises(DimensionError):
            trace(np.zeros((2, 3)))

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_cyclic(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_matrix(rng, 3, 4), random_matrix(rng, 4, 3)
        assert abs(trace(a @ b) - trace(b @ a)) < 1e-9


@pytest.mark.unit
class TestSchatten:
    def test_singular_values_sorted(self):
        values = singular_values(np.diag([3, -4j]))
        np.testing.assert_allclose(values, [4, 3], atol=1e-12)

    def test_rectangular_length(self):
        assert singular_values(np.ones((2, 5))).shape == (2,)

    def test_known_norms(self):
        matrix = np.diag([3.0, 4.0])
        assert schatten_norm(matrix, 1) == pytest.approx(7.0)
        assert schatten_norm(matrix, 2) == pytest.approx(5.0)

    def test_zero_matrix(self):
        assert schatten_norm(np.zeros((3, 3)), 2) == 0.0

    def test_large_exponent_does_not_overflow(self):
        norm = schatten_norm(np.diag([1e3, 1e3]), 400)
        assert np.isfinite(norm)
        assert norm == pytest.approx(1e3 * 2 ** (1 / 400))

    @pytest.mark.parametrize("p", [0.5, float("inf"), float("nan")])
    def test_invalid_exponent(self, p):
        with pytest.raises(DomainError):
            schatten_norm(np.eye(2), p)

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_matrix(rng, 4, 4), random_matrix(rng, 4, 4)
        for p in (1, 2, 3):
            bound = schatten_norm(a, p) + schatten_norm(b, p)
            assert schatten_norm(a + b, p) <= bound + 1e-9

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_frobenius(self, seed):
        rng = np.random.default_rng(seed)
        a = random_matrix(rng, 3, 5)
        assert schatten_norm(a, 2) == pytest.approx(np.linalg.norm(a, "fro"), rel=1e-9)


@pytest.mark.unit
class TestGrading:
    def test_grading_operator(self):
        np.testing.assert_array_equal(GradedDims(2, 1).grading(), np.diag([1, 1, -1]))

    def test_invalid_dims(self):
        with pytest.raises(DomainError):
            GradedDims(0, 0)
        with pytest.raises(DomainError):
            GradedDims(-1, 2)

    def test_even_and_odd_parts(self, rng):
        dims = GradedDims(2, 2)
        matrix = random_matrix(rng, 4, 4)
        even, odd = dims.even_part(matrix), dims.odd_part(matrix)
        np.testing.assert_allclose(even + odd, matrix)
        np.testing.assert_allclose(even[:2, 2:], 0)
        np.testing.assert_allclose(odd[:2, :2], 0)

    def test_swap_is_involution(self):
        swap = swap_symmetry(3)
        np.testing.assert_array_equal(swap @ swap, np.eye(6))
        eps = GradedDims(3, 3).grading()
        np.testing.assert_array_equal(eps @ swap @ eps, -swap)


@pytest.mark.unit
class TestGradedCommutator:
    def test_even_degree_is_commutator(self, rng):
        f = swap_symmetry(1)
        t = random_matrix(rng, 2, 2)
        np.testing.assert_allclose(graded_commutator(f, f, t, 0), f @ t - t @ f)

    def test_odd_degree_is_anticommutator(self, rng):
        f = swap_symmetry(1)
        t = random_matrix(rng, 2, 2)
        np.testing.assert_allclose(graded_commutator(f, f, t, 1), f @ t + t @ f)

    def test_ungraded_ignores_degree(self, rng):
        f = np.diag([1.0, -1.0])
        t = random_matrix(rng, 2, 2)
        commutator = graded_commutator(f, f, t, 1, graded=False)
        np.testing.assert_allclose(commutator, f @ t - t @ f)

    def test_rectangular(self, rng):
        f_source, f_target = np.diag([1.0, -1.0, 1.0]), np.diag([1.0, -1.0])
        t = random_matrix(rng, 2, 3)
        result = graded_commutator(f_source, f_target, t, 0)
        np.testing.assert_allclose(result, f_target @ t - t @ f_source)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            graded_commutator(np.eye(2), np.eye(3), np.zeros((2, 2)), 0)
