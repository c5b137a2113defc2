"""Unit tests for lp_workbench.exact: scalars, sparse matrices and spans."""

import numpy as np
import pytest
from sympy.polys.domains import QQ, QQ_I

from lp_workbench.errors import InvalidInputError
from lp_workbench.exact import (
    ONE,
    ZERO,
    ExactMatrix,
    block_diag,
    conj,
    format_scalar,
    is_unimodular,
    is_zero,
    kron,
    linear_combination,
    matrix_span,
    parse_scalar,
    rational_nullspace,
    same_span,
    to_scalar,
    unimodular_from_slope,
)


class TestParseScalar:
    def test_integer(self):
        assert parse_scalar("5") == QQ_I(5, 0)

    def test_fraction(self):
        z = parse_scalar("-3/4")
        assert z.x == QQ(-3, 4)
        assert not z.y

    def test_complex(self):
        z = parse_scalar("1/2+3/4 i")
        assert z == QQ_I(QQ(1, 2), QQ(3, 4))

    def test_pure_imaginary(self):
        assert parse_scalar("-i") == QQ_I(0, -1)
        assert parse_scalar("i") == QQ_I(0, 1)
        assert parse_scalar("2/3 i") == QQ_I(0, QQ(2, 3))
        assert is_zero(parse_scalar("0 i"))

    def test_rejects_garbage(self):
        with pytest.raises(InvalidInputError):
            parse_scalar("1.5")

    def test_rejects_zero_denominator(self):
        with pytest.raises(InvalidInputError):
            parse_scalar("1/0")


class TestToScalar:
    def test_accepts_int_and_string(self):
        assert to_scalar(3) == QQ_I(3, 0)
        assert to_scalar("1-i") == QQ_I(1, -1)

    def test_accepts_rational(self):
        assert to_scalar(QQ(1, 3)) == QQ_I(QQ(1, 3), 0)

    def test_rejects_float(self):
        with pytest.raises(InvalidInputError):
            to_scalar(0.5)

    def test_rejects_bool(self):
        with pytest.raises(InvalidInputError):
            to_scalar(True)


class TestFormatScalar:
    def test_round_trips_through_parse(self):
        for text in ("0", "7", "-1/2", "3/4 i", "1/2+3/4 i", "1-2 i"):
            z = parse_scalar(text)
            assert parse_scalar(format_scalar(z)) == z

    def test_real_has_no_imaginary_part(self):
        assert format_scalar(QQ_I(QQ(3, 2), 0)) == "3/2"


class TestUnimodular:
    def test_slope_gives_unit_modulus(self):
        for t in (QQ(0), QQ(1, 2), QQ(-3, 5), QQ(7)):
            assert is_unimodular(unimodular_from_slope(t))
            assert is_unimodular(unimodular_from_slope(t, -1))

    def test_conjugate(self):
        z = QQ_I(1, 2)
        assert conj(z) == QQ_I(1, -2)


class TestExactMatrix:
    def test_zero_entries_are_not_stored(self):
        M = ExactMatrix.from_rows([[1, 0], [0, "0"]])
        assert M.entries == {(0, 0): ONE}

    def test_entry_outside_shape_rejected(self):
        with pytest.raises(InvalidInputError):
            ExactMatrix(2, 2, {(2, 0): ONE})

    def test_ragged_rows_rejected(self):
        with pytest.raises(InvalidInputError):
            ExactMatrix.from_rows([[1, 2], [3]])

    def test_product_matches_numpy(self):
        A = ExactMatrix.from_rows([[1, "i"], [2, 3]])
        B = ExactMatrix.from_rows([["1/2", 0], [1, "-i"]])
        assert np.allclose((A @ B).to_numpy(), A.to_numpy() @ B.to_numpy())

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            ExactMatrix.identity(2) @ ExactMatrix.identity(3)

    def test_permutation_sends_basis_vectors(self):
        P = ExactMatrix.permutation([1, 2, 0])
        assert P[(1, 0)] == ONE
        assert P[(0, 2)] == ONE
        assert P.power(3) == ExactMatrix.identity(3)

    def test_not_a_permutation(self):
        with pytest.raises(InvalidInputError):
            ExactMatrix.permutation([0, 0, 1])

    def test_self_adjoint(self):
        assert ExactMatrix.from_rows([[1, "i"], ["-i", 2]]).is_self_adjoint()
        assert not ExactMatrix.from_rows([[1, "i"], ["i", 2]]).is_self_adjoint()

    def test_hashable_and_equal(self):
        a = ExactMatrix.from_rows([[1, 2], [3, 4]])
        b = ExactMatrix.from_rows([[1, 2], [3, 4]])
        assert a == b
        assert len({a, b}) == 1

    def test_format_uses_spec_syntax(self):
        assert ExactMatrix.from_rows([["1/2", "i"]]).format() == [["1/2", "1 i"]]

    def test_block_diag_and_kron(self):
        X = ExactMatrix.from_rows([[0, 1], [1, 0]])
        D = block_diag([X, ExactMatrix.identity(1)])
        assert D.shape == (3, 3)
        assert D[(2, 2)] == ONE
        K = kron(X, ExactMatrix.identity(2))
        assert K.shape == (4, 4)
        assert K @ K == ExactMatrix.identity(4)


class TestSpan:
    def test_rank_and_dependence(self):
        mats = [ExactMatrix.unit(2, 0, 0), ExactMatrix.unit(2, 1, 1), ExactMatrix.identity(2)]
        span = matrix_span(mats)
        assert span.rank == 2
        assert span.dependent == [2]

    def test_coordinates(self):
        mats = [ExactMatrix.unit(2, 0, 0), ExactMatrix.unit(2, 1, 1)]
        span = matrix_span(mats)
        target = ExactMatrix.diagonal(["2", "3 i"])
        coords = span.coordinates(target.entries)
        assert linear_combination([coords.get(0, ZERO), coords.get(1, ZERO)], mats) == target

    def test_outside_span(self):
        span = matrix_span([ExactMatrix.identity(2)])
        assert span.coordinates(ExactMatrix.unit(2, 0, 1).entries) is None

    def test_zero_vector_is_dependent(self):
        span = matrix_span([ExactMatrix.zeros(2), ExactMatrix.identity(2)])
        assert span.rank == 1
        assert span.dependent == [0]

    def test_add_after_query(self):
        e01 = ExactMatrix.unit(2, 0, 1)
        span = matrix_span([ExactMatrix.identity(2)])
        assert not span.contains(e01.entries)
        assert span.add(e01.entries)
        assert not span.add(e01.scale("2 i").entries)
        assert span.dependent == [2]
        target = ExactMatrix.identity(2).scale("1/2") + e01.scale("-3")
        assert span.coordinates(target.entries) == {0: to_scalar("1/2"), 1: to_scalar(-3)}

    def test_coordinates_of_mixed_basis(self):
        mats = [ExactMatrix.identity(2), ExactMatrix.diagonal([1, -1])]
        coords = matrix_span(mats).coordinates(ExactMatrix.unit(2, 0, 0).entries)
        assert coords == {0: to_scalar("1/2"), 1: to_scalar("1/2")}

    def test_same_span_ignores_basis_choice(self):
        a = [ExactMatrix.unit(2, 0, 0), ExactMatrix.unit(2, 1, 1)]
        b = [ExactMatrix.identity(2), ExactMatrix.diagonal([1, -1])]
        assert same_span(a, b)
        assert not same_span(a, [ExactMatrix.identity(2)])


class TestRationalNullspace:
    def test_no_equations_gives_standard_basis(self):
        assert len(rational_nullspace([], 3)) == 3

    def test_single_equation(self):
        basis = rational_nullspace([{0: QQ(1), 1: QQ(-1)}], 3)
        assert len(basis) == 2
        for vec in basis:
            assert vec[0] == vec[1]

    def test_duplicate_equations_collapse(self):
        eqs = [{0: QQ(1), 1: QQ(1)}, {0: QQ(2), 1: QQ(2)}]
        assert len(rational_nullspace(eqs, 2)) == 1
