"""Unit tests for lp_workbench.lp_norms: norm intervals, Lamperti form and cores."""

import math

import numpy as np
import pytest

from lp_workbench.errors import InvalidInputError
from lp_workbench.exact import ExactMatrix, same_span
from lp_workbench.lp_norms import (
    NormEstimate,
    PExponent,
    core_of,
    diagonal_algebra,
    full_matrix_algebra,
    hermitian_basis,
    is_hermitian,
    is_lamperti_isometry,
    lamperti_decompose,
    p_operator_norm,
    preserves_core,
    random_lamperti,
    random_non_lamperti,
    represented_algebra,
    riesz_thorin_bound,
    scalar_algebra,
    spectrum_points,
    tensor_algebra,
    upper_triangular_algebra,
)

SWAP = ExactMatrix.from_rows([[0, 1], [1, 0]])


class TestPExponent:
    def test_parse_rational_string(self):
        p = PExponent.parse("3/2")
        assert p.p == 1.5
        assert p.label == "3/2"
        assert p.dual == pytest.approx(3.0)

    def test_dual_of_one_is_infinite(self):
        assert PExponent.parse(1).dual == math.inf

    def test_rejects_below_one(self):
        with pytest.raises(InvalidInputError):
            PExponent.parse("1/2")

    def test_require_not_two(self):
        with pytest.raises(InvalidInputError, match="p != 2"):
            PExponent.parse(2).require_not_two("weyl_groupoid")


class TestNormEstimate:
    def test_inverted_interval_rejected(self):
        with pytest.raises(InvalidInputError):
            NormEstimate(2.0, 1.0, "power-iteration")

    def test_contains_with_slack(self):
        est = NormEstimate(1.0, 1.0, "exact-p1")
        assert est.contains(1.0 + 1e-10, 1e-9)
        assert not est.contains(1.1)


class TestPOperatorNorm:
    def test_p1_is_max_column_sum(self):
        est = p_operator_norm([[1, 2], [3, 4]], 1)
        assert est.lower == est.upper == 6.0

    def test_p2_is_spectral_norm(self):
        A = np.array([[1.0, 2.0], [3.0, 4.0]])
        est = p_operator_norm(A, 2)
        assert est.lower == pytest.approx(np.linalg.norm(A, 2))

    def test_interval_is_sound(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        est = p_operator_norm(A, 3)
        assert est.lower <= est.upper
        assert est.upper <= riesz_thorin_bound(A, 3) + 1e-12
        x = rng.standard_normal(4)
        assert np.linalg.norm(A @ x, 3) / np.linalg.norm(x, 3) <= est.upper + 1e-9

    def test_monomial_matrix_collapses(self):
        est = p_operator_norm(ExactMatrix.from_rows([[0, 2], ["i", 0]]), 3)
        assert est.lower == pytest.approx(2.0)
        assert est.width == 0.0

    def test_nonnegative_matrix_is_tight(self):
        est = p_operator_norm([[1, 1], [0, 1]], "3/2")
        assert est.width <= 1e-6 * est.upper

    def test_empty_matrix_rejected(self):
        with pytest.raises(InvalidInputError):
            p_operator_norm(np.zeros((0, 0)), 3)


class TestLamperti:
    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            fact = random_lamperti(5, rng)
            M = fact.recompose()
            assert lamperti_decompose(M, 3) == fact
            assert is_lamperti_isometry(M.to_numpy(), 3)

    def test_non_lamperti_rejected(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            assert not is_lamperti_isometry(random_non_lamperti(4, rng), 1)

    def test_decompose_rejects_non_monomial(self):
        with pytest.raises(InvalidInputError):
            lamperti_decompose(ExactMatrix.from_rows([[1, 1], [0, 1]]), 3)

    def test_p_two_rejected(self):
        with pytest.raises(InvalidInputError):
            is_lamperti_isometry(SWAP, 2)

    def test_rotation_is_not_lamperti(self):
        h = 1 / math.sqrt(2)
        assert not is_lamperti_isometry([[h, -h], [h, h]], 3)


class TestRepresentedAlgebra:
    def test_standard_dimensions(self):
        assert full_matrix_algebra(3).dimension == 9
        assert diagonal_algebra(3).dimension == 3
        assert upper_triangular_algebra(3).dimension == 6
        assert scalar_algebra(4).dimension == 1

    def test_rejects_non_closed_basis(self):
        with pytest.raises(InvalidInputError, match="closed"):
            represented_algebra(
                [ExactMatrix.identity(2), ExactMatrix.unit(2, 0, 1), ExactMatrix.unit(2, 1, 0)]
            )

    def test_rejects_missing_unit(self):
        with pytest.raises(InvalidInputError, match="identity"):
            represented_algebra([ExactMatrix.unit(2, 0, 0)])

    def test_non_unital_allowed_when_flagged(self):
        alg = represented_algebra([ExactMatrix.unit(2, 0, 0)], unital=False)
        assert not alg.unital

    def test_tensor_dimension(self):
        alg = tensor_algebra(full_matrix_algebra(2), diagonal_algebra(2))
        assert alg.n == 4
        assert alg.dimension == 8


class TestHermitianBasis:
    def test_matrix_algebra_p3_is_real_diagonal(self):
        herm = hermitian_basis(full_matrix_algebra(3), 3)
        assert len(herm) == 3
        assert all(h.is_diagonal() and h.is_real() for h in herm)

    def test_matrix_algebra_p2_is_self_adjoint(self):
        herm = hermitian_basis(full_matrix_algebra(2), 2)
        assert len(herm) == 4
        assert all(h.is_self_adjoint() for h in herm)


class TestCore:
    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("p", [1, 3])
    def test_matrix_core_is_diagonal(self, n, p):
        core = core_of(full_matrix_algebra(n), p)
        assert core.dimension == n
        assert same_span(core.basis, diagonal_algebra(n).basis)

    def test_p2_core_is_everything(self):
        core = core_of(full_matrix_algebra(2), 2)
        assert same_span(core.basis, full_matrix_algebra(2).basis)

    def test_upper_triangular_core(self):
        core = core_of(upper_triangular_algebra(3), 3)
        assert same_span(core.basis, diagonal_algebra(3).basis)

    def test_non_unital_rejected(self):
        alg = represented_algebra([ExactMatrix.unit(2, 0, 0)], unital=False)
        with pytest.raises(InvalidInputError):
            core_of(alg, 3)

    def test_spectrum_of_diagonal_core(self):
        spec = spectrum_points(core_of(full_matrix_algebra(3), 3))
        assert spec.points == (0, 1, 2)
        assert spec.point_of(2) == 2


class TestIsHermitian:
    def test_swap_flips_with_p(self):
        M2 = full_matrix_algebra(2)
        at_three = is_hermitian(M2, SWAP, 3)
        at_two = is_hermitian(M2, SWAP, 2)
        assert not at_three.hermitian
        assert at_two.hermitian
        assert at_three.dynamical_agrees
        assert at_two.dynamical_agrees

    def test_real_diagonal_is_hermitian(self):
        verdict = is_hermitian(full_matrix_algebra(2), ExactMatrix.diagonal([1, -2]), 3)
        assert verdict.hermitian
        assert verdict.dynamical_agrees

    def test_imaginary_diagonal_is_not(self):
        verdict = is_hermitian(diagonal_algebra(2), ExactMatrix.diagonal(["i", 0]), 1)
        assert not verdict.hermitian
        assert verdict.reason == "non-real diagonal"
        assert verdict.dynamical_agrees

    def test_element_outside_algebra(self):
        with pytest.raises(InvalidInputError):
            is_hermitian(diagonal_algebra(2), SWAP, 3)


class TestPreservesCore:
    def test_conditional_expectation_onto_diagonal(self):
        M2, D2 = full_matrix_algebra(2), diagonal_algebra(2)

        def expectation(a):
            return ExactMatrix.diagonal([a[(0, 0)], a[(1, 1)]])

        assert preserves_core(expectation, M2, D2, 3)

    def test_non_unital_map_moves_the_unit_out_of_the_core(self):
        C, M2 = scalar_algebra(2), full_matrix_algebra(2)
        half = ExactMatrix.from_rows([["1/2", "1/2"], ["1/2", "1/2"]])

        def phi(a):
            return half.scale(a[(0, 0)])

        assert not preserves_core(phi, C, M2, 3)
