"""Unit tests for lp_workbench.leavitt: normal forms, matrix identities and the spatial model."""

import numpy as np
import pytest

from lp_workbench import leavitt
from lp_workbench.errors import InvalidInputError, VerificationError
from lp_workbench.leavitt import (
    LeavittMatrix,
    LeavittWord,
    TruncatedModel,
    absorption_generators,
    canonical_generators,
    check_confluence,
    check_cuntz_relations,
    covariant_images,
    diagonal_monomials,
    from_letters,
    generator,
    leavitt_element,
    letter_element,
    monomial,
    monomials_independent,
    mutated_covariant_images,
    normal_form,
    normal_monomials,
    one,
    product_agrees_in_model,
    random_leavitt_element,
    random_letter_terms,
    reduce_letters,
    truncated_spatial_representation,
    verify_covariant_presentation,
    verify_matrix_absorption,
    zero,
)


def s(j, n):
    return generator("s", j, n)


def t(j, n):
    return generator("t", j, n)


class TestNormalForm:
    def test_toeplitz_relations(self):
        assert t(1, 2) * s(1, 2) == one(2)
        assert (t(1, 2) * s(2, 2)).is_zero()

    def test_last_letter_is_eliminated(self):
        assert monomial(2, [2], [2]) == one(2) - monomial(2, [1], [1])

    def test_sum_relation(self):
        total = zero(3)
        for j in (1, 2, 3):
            total = total + s(j, 3) * t(j, 3)
        assert total == one(3)

    def test_associative(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            a, b, c = (random_leavitt_element(3, rng, degree=2, terms=3) for _ in range(3))
            assert (a * b) * c == a * (b * c)

    def test_distributive(self):
        rng = np.random.default_rng(22)
        a, b, c = (random_leavitt_element(2, rng) for _ in range(3))
        assert a * (b + c) == a * b + a * c

    def test_terms_are_normal(self):
        rng = np.random.default_rng(23)
        e = random_leavitt_element(2, rng, degree=4, terms=6)
        assert all(w.is_normal(2) for w in e.terms)

    def test_letter_out_of_range(self):
        with pytest.raises(InvalidInputError):
            leavitt_element(2, {LeavittWord((3,), ()): 1})

    def test_algebras_must_match(self):
        with pytest.raises(InvalidInputError):
            s(1, 2) * s(1, 3)

    def test_format(self):
        assert (one(2) - monomial(2, [1], [1])).format() == "1 - s1t1"
        assert str(LeavittWord((1, 2), (2,))) == "s1s2t2"
        assert zero(2).format() == "0"


class TestLetterRewriting:
    def test_matches_multiplication(self):
        word = [("t", 1), ("s", 1), ("s", 2), ("t", 2)]
        rng = np.random.default_rng(0)
        assert reduce_letters({tuple(word): 1}, 2, rng) == from_letters(word, 2)
        assert from_letters(word, 2) == one(2) - monomial(2, [1], [1])

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random_order_reaches_the_normal_form(self, n):
        rng = np.random.default_rng(31 + n)
        for _ in range(200):
            terms = random_letter_terms(n, rng, degree=3)
            target = letter_element(terms, n)
            assert normal_form(target) == target
            assert reduce_letters(terms, n, rng) == target
            assert reduce_letters(terms, n, rng) == target

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_confluence_report(self, n):
        report = check_confluence(n, np.random.default_rng(n), samples=40)
        assert report.passed
        assert report.to_dict() == {
            "n": n, "samples": 40, "degree": 3, "reductions": 2, "mismatches": 0,
        }

    def test_wrong_reduction_is_counted(self, monkeypatch):
        monkeypatch.setattr(leavitt, "reduce_letters", lambda terms, n, rng: zero(n))
        report = check_confluence(2, np.random.default_rng(3), samples=20)
        assert not report.passed
        assert report.mismatches > 0


class TestMonomials:
    def test_normal_monomial_count(self):
        assert len(normal_monomials(2, 1)) == 8

    def test_diagonal_monomials(self):
        assert len(diagonal_monomials(2, 1)) == 2
        assert len(diagonal_monomials(3, 2)) == 1 + 2 + 6


class TestCuntzRelations:
    def test_canonical_generators(self):
        S, T = canonical_generators(3)
        report = check_cuntz_relations(S, T)
        assert report.passed
        assert report.to_dict()["checked"] == 10

    def test_mismatched_lengths(self):
        S, T = canonical_generators(2)
        with pytest.raises(InvalidInputError):
            check_cuntz_relations(S, T[:1])

    def test_non_square_matrix_rejected(self):
        with pytest.raises(InvalidInputError):
            LeavittMatrix(2, ((one(2), zero(2)),))


class TestMatrixAbsorption:
    @pytest.mark.parametrize("k", [2, 3])
    def test_identities_hold(self, k):
        report = verify_matrix_absorption(k)
        assert report.passed, report.failures

    def test_k_must_be_at_least_two(self):
        with pytest.raises(InvalidInputError):
            absorption_generators(1)

    def test_broken_generator_is_detected(self):
        X, Y = absorption_generators(2)
        X[0] = X[0].replace(0, 0, -X[0][0, 0])
        report = check_cuntz_relations(X, Y)
        assert not report.passed
        with pytest.raises(VerificationError):
            report.raise_for_failure()


class TestCovariantPresentation:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_relations_hold(self, n):
        report = verify_covariant_presentation(n)
        assert report.passed, report.failures

    def test_order_of_b(self):
        psi = covariant_images(2)
        assert psi.b.power(3).is_identity()
        assert not psi.b.power(1).is_identity()

    def test_mutation_is_detected(self):
        report = verify_covariant_presentation(3, mutated_covariant_images(3))
        assert not report.passed
        assert report.failures

    def test_needs_two_generators(self):
        with pytest.raises(InvalidInputError):
            covariant_images(1)


class TestTruncatedModel:
    def test_report(self):
        model, report = truncated_spatial_representation(2, 4, 3)
        assert model.dim == 31
        assert report.toeplitz_below_depth
        assert report.sum_relation_above_zero
        assert not report.sum_relation_at_empty_word
        assert report.spatial
        assert all(est.contains(1.0, 1e-9) for est in report.s_norms)

    def test_monomials_independent(self):
        assert monomials_independent(2, 2, 6)

    def test_products_agree_on_window(self):
        model = TruncatedModel(2, 10)
        rng = np.random.default_rng(41)
        for _ in range(5):
            e = random_leavitt_element(2, rng, degree=1, terms=2)
            f = random_leavitt_element(2, rng, degree=1, terms=2)
            assert product_agrees_in_model(model, e, f)

    def test_window_too_small(self):
        with pytest.raises(InvalidInputError):
            product_agrees_in_model(TruncatedModel(2, 3), s(1, 2), t(1, 2))

    def test_depth_must_be_positive(self):
        with pytest.raises(InvalidInputError):
            truncated_spatial_representation(2, 0)
