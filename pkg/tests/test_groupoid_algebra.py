"""Unit tests for lp_workbench.groupoid_algebra: convolution, representation and norms."""

import numpy as np
import pytest

from lp_workbench import groupoid_algebra
from lp_workbench.catalog import cyclic_group, named_group, rotation_action
from lp_workbench.errors import InvalidInputError, VerificationError
from lp_workbench.exact import ExactMatrix, same_span
from lp_workbench.groupoid import group_groupoid, pair_groupoid, transformation_groupoid
from lp_workbench.groupoid_algebra import (
    check_conditional_expectation,
    check_jconv,
    check_move_delta,
    check_multiplicativity,
    check_multiplier_contraction,
    conditional_expectation,
    convolve,
    core_of_groupoid_algebra,
    delta,
    element,
    faithful_representation,
    i_norm,
    involution,
    j_map,
    lambda_norm,
    left_map,
    left_multiplier,
    random_element,
    regular_representation,
    right_map,
    right_multiplier,
    sup_norm,
    unit_indicator,
)


@pytest.fixture
def pair3():
    return pair_groupoid([0, 1, 2])


@pytest.fixture
def rot3():
    return transformation_groupoid(rotation_action(3))


class TestConvolution:
    def test_matrix_units_multiply(self, pair3):
        e01, e12 = delta(pair3, (0, 1)), delta(pair3, (1, 2))
        assert e01 * e12 == delta(pair3, (0, 2))
        assert (e12 * e01).is_zero()

    def test_unit_is_identity(self, rot3):
        f = random_element(rot3, np.random.default_rng(3))
        one = unit_indicator(rot3)
        assert one * f == f
        assert f * one == f

    def test_group_algebra_is_group_ring(self):
        G = group_groupoid(cyclic_group(3))
        f = element(G, {1: 2, 2: "i"})
        g = element(G, {1: 1})
        assert f * g == element(G, {2: 2, 0: "i"})

    def test_associative(self, rot3):
        rng = np.random.default_rng(4)
        a, b, c = (random_element(rot3, rng) for _ in range(3))
        assert (a * b) * c == a * (b * c)

    def test_foreign_arrow_rejected(self, pair3):
        with pytest.raises(InvalidInputError):
            element(pair3, {(0, 5): 1})

    def test_groupoid_mismatch(self, pair3):
        other = pair_groupoid([0, 1, 2])
        with pytest.raises(InvalidInputError):
            convolve(delta(pair3, (0, 0)), delta(other, (0, 0)))

    def test_involution_reverses_arrows(self, pair3):
        f = element(pair3, {(0, 1): "1+i"})
        assert involution(f) == element(pair3, {(1, 0): "1-i"})

    def test_subtraction_cancels(self, rot3):
        f = random_element(rot3, np.random.default_rng(8))
        assert (f - f).is_zero()


class TestRegularRepresentation:
    def test_pair_groupoid_block_is_matrix_unit(self, pair3):
        rep = regular_representation(delta(pair3, (0, 1)), (2, 2))
        assert rep.matrix.shape == (3, 3)
        assert rep.entry((0, 2), (1, 2)) == element(pair3, {(0, 1): 1})[(0, 1)]

    def test_multiplicativity(self, rot3):
        rng = np.random.default_rng(5)
        for _ in range(10):
            check_multiplicativity(random_element(rot3, rng), random_element(rot3, rng))

    def test_faithful(self, rot3):
        rep = faithful_representation(rot3)
        f = random_element(rot3, np.random.default_rng(6))
        assert rep.element(rep.matrix(f)) == f

    def test_element_outside_image(self, pair3):
        rep = faithful_representation(pair3)
        with pytest.raises(InvalidInputError):
            rep.element(ExactMatrix.identity(9).scale(2) + ExactMatrix.unit(9, 0, 8))


class TestJMap:
    def test_reproduces_coefficients(self, rot3):
        f = random_element(rot3, np.random.default_rng(7))
        assert j_map(f) == dict(f.coeffs)

    def test_jconv_and_move_delta(self, rot3):
        rng = np.random.default_rng(9)
        a, b = random_element(rot3, rng), random_element(rot3, rng)
        check_jconv(a, b)
        assert check_move_delta(a) == 27

    def test_left_and_right_maps(self, pair3):
        a = element(pair3, {(0, 1): 2, (1, 0): 3})
        assert left_map(a, (1, 1)) == {(0, 1): a[(0, 1)]}
        assert right_map(a, (1, 1)) == {(0, 1): a[(1, 0)]}

    def test_multiplier_formulas(self, rot3):
        f = random_element(rot3, np.random.default_rng(10))
        g = (1, 2)
        assert left_multiplier(g, f) == delta(rot3, g) * f
        assert right_multiplier(f, g) == f * delta(rot3, g)


class TestConditionalExpectation:
    def test_restricts_to_units(self, pair3):
        a = element(pair3, {(0, 0): 4, (0, 1): 1})
        assert conditional_expectation(a) == element(pair3, {(0, 0): 4})

    def test_bimodule_property(self, rot3):
        rng = np.random.default_rng(11)
        a = random_element(rot3, rng)
        f = random_element(rot3, rng, units_only=True)
        g = random_element(rot3, rng, units_only=True)
        check_conditional_expectation(a, f, g)

    def test_requires_unit_supported_outer_terms(self, pair3):
        a = delta(pair3, (0, 1))
        with pytest.raises(InvalidInputError):
            check_conditional_expectation(a, a, unit_indicator(pair3))


class TestMultiplierContraction:
    @pytest.mark.parametrize("name", ["pair3", "rot3", "gZ3"])
    @pytest.mark.parametrize("p", [1, "3/2", 3])
    def test_delta_does_not_increase_the_norm(self, name, p):
        G = {
            "pair3": pair_groupoid([0, 1, 2]),
            "rot3": transformation_groupoid(rotation_action(3)),
            "gZ3": group_groupoid(cyclic_group(3)),
        }[name]
        rng = np.random.default_rng(14)
        for _ in range(3):
            f = random_element(G, rng)
            for g in G.arrows:
                bounds = check_multiplier_contraction(g, f, p)
                assert bounds["left"].lower <= bounds["f"].upper + 1e-9
                assert bounds["right"].lower <= bounds["f"].upper + 1e-9

    def test_growth_is_reported(self, pair3, monkeypatch):
        monkeypatch.setattr(groupoid_algebra, "left_multiplier", lambda g, f: f + f)
        f = element(pair3, {(0, 1): 1})
        with pytest.raises(VerificationError, match=r"delta_g \* f"):
            check_multiplier_contraction((1, 1), f, 3)


class TestNorms:
    @pytest.mark.parametrize("p", [1, "3/2", 3])
    def test_sandwich(self, rot3, p):
        rng = np.random.default_rng(12)
        for _ in range(10):
            f = random_element(rot3, rng)
            est = lambda_norm(f, p)
            assert sup_norm(f) <= est.upper + 1e-9
            assert est.lower <= i_norm(f) + 1e-9

    def test_unit_supported_norm_is_sup(self, pair3):
        f = element(pair3, {(0, 0): 3, (1, 1): "-4i"})
        est = lambda_norm(f, 3)
        assert est.lower == pytest.approx(4.0)
        assert est.upper == pytest.approx(4.0)

    def test_zero(self, pair3):
        est = lambda_norm(element(pair3, {}), 3)
        assert est.upper == 0.0

    def test_p1_is_exact(self, pair3):
        f = element(pair3, {(0, 1): 1, (0, 2): 2})
        est = lambda_norm(f, 1)
        assert est.lower == est.upper == 2.0
        assert i_norm(f) == 3.0


class TestCore:
    @pytest.mark.parametrize("p", [1, 3])
    def test_core_is_diagonal(self, rot3, p):
        core = core_of_groupoid_algebra(rot3, p)
        rep = faithful_representation(rot3)
        expected = [rep.matrix(unit_indicator(rot3, [x])) for x in rot3.units]
        assert same_span(core.basis, expected)

    def test_group_core_is_scalars(self):
        core = core_of_groupoid_algebra(group_groupoid(named_group("S3")), 3)
        assert core.dimension == 1

    def test_p_two_rejected(self, pair3):
        with pytest.raises(InvalidInputError, match="p != 2"):
            core_of_groupoid_algebra(pair3, 2)

    def test_unit_indicator_rejects_non_units(self, pair3):
        with pytest.raises(InvalidInputError):
            unit_indicator(pair3, [(0, 1)])
