"""Unit tests for lp_workbench.groupoid and lp_workbench.catalog."""

import numpy as np
import pytest

from lp_workbench.catalog import (
    cyclic_group,
    group_from_table,
    named_group,
    relabel_action,
    rotation_action,
    swap_action,
    translation_action,
    trivial_action,
)
from lp_workbench.errors import GroupoidAxiomError, GuardExceeded, InvalidInputError
from lp_workbench.groupoid import (
    Bisection,
    PartialBijection,
    bisection_action,
    bisection_product,
    check_bisection_homomorphism,
    coe_search,
    count_bisections,
    enumerate_bisections,
    find_isomorphism,
    germ_groupoid,
    group_groupoid,
    is_principal,
    isotropy_bundle,
    isotropy_group,
    pair_groupoid,
    transformation_groupoid,
    unit_groupoid,
    validate_groupoid,
    verify_coe,
)


class TestGroups:
    def test_named_groups(self):
        assert named_group("Z4").order == 4
        assert named_group("S3").order == 6
        assert named_group("Z2xZ3").order == 6

    def test_unknown_group(self):
        with pytest.raises(InvalidInputError):
            named_group("Q8")

    def test_table_without_identity_rejected(self):
        with pytest.raises(InvalidInputError):
            group_from_table(["a", "b"], [["a", "a"], ["a", "a"]])

    def test_power(self):
        Z5 = cyclic_group(5)
        assert Z5.power(2, 3) == 1


class TestValidateGroupoid:
    def test_missing_inverse(self):
        with pytest.raises(GroupoidAxiomError) as exc:
            validate_groupoid(["e", "g"], {("e", "e"): "e"}, {"e": "e"})
        assert exc.value.axiom == "inverse-total"
        assert exc.value.witnesses == ("g",)

    def test_non_associative_or_undefined_products_rejected(self):
        compose = {("e", "e"): "e", ("g", "g"): "e", ("e", "g"): "g"}
        with pytest.raises(GroupoidAxiomError):
            validate_groupoid(["e", "g"], compose, {"e": "e", "g": "g"})

    def test_declared_units_must_match(self):
        compose = {("e", "e"): "e", ("g", "g"): "e", ("e", "g"): "g", ("g", "e"): "g"}
        with pytest.raises(GroupoidAxiomError) as exc:
            validate_groupoid(["e", "g"], compose, {"e": "e", "g": "g"}, units=["g"])
        assert exc.value.axiom == "units"

    def test_two_element_group(self):
        compose = {("e", "e"): "e", ("g", "g"): "e", ("e", "g"): "g", ("g", "e"): "g"}
        G = validate_groupoid(["e", "g"], compose, {"e": "e", "g": "g"})
        assert G.units == ("e",)
        assert G.dom("g") == G.ran("g") == "e"


class TestConstructions:
    def test_pair_groupoid(self):
        G = pair_groupoid([0, 1, 2])
        assert len(G) == 9
        assert G.compose((0, 1), (1, 2)) == (0, 2)
        assert G.dom((0, 1)) == (1, 1)
        assert is_principal(G)

    def test_not_composable(self):
        G = pair_groupoid([0, 1])
        with pytest.raises(InvalidInputError):
            G.compose((0, 1), (0, 1))

    def test_transformation_groupoid(self):
        G = transformation_groupoid(rotation_action(3))
        assert len(G) == 9
        assert len(G.units) == 3
        assert G.compose((1, 1), (1, 0)) == (2, 0)
        assert G.inverse((1, 0)) == (2, 1)

    def test_group_groupoid_isotropy(self):
        G = group_groupoid(named_group("S3"))
        assert len(G.units) == 1
        assert len(isotropy_group(G, G.units[0])) == 6
        assert not is_principal(G)

    def test_isotropy_bundle_of_stabilized_action(self):
        G = transformation_groupoid(trivial_action(cyclic_group(2), ["a", "b"]))
        assert len(isotropy_bundle(G)) == 4
        assert not is_principal(G)

    def test_isotropy_requires_unit(self):
        G = pair_groupoid([0, 1])
        with pytest.raises(InvalidInputError):
            isotropy_group(G, (0, 1))


class TestBisections:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_unit_groupoid_counts(self, n):
        assert count_bisections(unit_groupoid(list(range(n)))) == 2**n

    def test_pair_groupoid_counts(self):
        assert count_bisections(pair_groupoid([0, 1])) == 7
        assert count_bisections(pair_groupoid([0, 1, 2])) == 34

    def test_group_counts(self):
        assert count_bisections(group_groupoid(cyclic_group(2))) == 3

    def test_translation_of_s3(self):
        G = transformation_groupoid(translation_action(named_group("S3")))
        assert count_bisections(G) == 13327

    def test_enumeration_matches_count(self):
        G = transformation_groupoid(rotation_action(3))
        bis = enumerate_bisections(G)
        assert len(bis) == count_bisections(G)
        assert len(set(bis)) == len(bis)

    def test_guard(self):
        G = pair_groupoid(list(range(4)))
        with pytest.raises(GuardExceeded):
            enumerate_bisections(G, limit=10)

    def test_non_bisection_rejected(self):
        G = pair_groupoid([0, 1])
        with pytest.raises(InvalidInputError):
            bisection_action(G, Bisection(frozenset({(0, 1), (0, 0)})))

    def test_product_acts_by_composition(self):
        G = pair_groupoid([0, 1])
        S = Bisection(frozenset({(0, 1), (1, 0)}))
        SS = bisection_product(G, S, S)
        assert SS.arrows == frozenset(G.units)

    def test_homomorphism_all_pairs(self):
        G = pair_groupoid([0, 1, 2])
        stats = check_bisection_homomorphism(G)
        assert stats["pairs"] == 34 * 34
        assert stats["distinct_maps"] == 34

    def test_homomorphism_sampled(self):
        G = group_groupoid(named_group("S3"))
        stats = check_bisection_homomorphism(G, rng=np.random.default_rng(1), samples=10)
        assert stats["bisections"] == 7
        assert stats["pairs"] == 10
        assert stats["distinct_maps"] == 2


class TestPartialBijection:
    def test_composition_and_inverse(self):
        f = PartialBijection.from_dict({0: 1, 1: 2})
        g = PartialBijection.from_dict({2: 0})
        assert (g @ f).as_dict == {1: 0}
        assert f.inverse().as_dict == {1: 0, 2: 1}

    def test_non_injective_rejected(self):
        with pytest.raises(InvalidInputError):
            PartialBijection.from_dict({0: 1, 1: 1})


class TestGermGroupoid:
    def test_generated_relation(self):
        maps = [PartialBijection.from_dict({0: 1}), PartialBijection.from_dict({1: 2})]
        G = germ_groupoid([0, 1, 2, 3], maps)
        assert len(G) == 10
        assert G.composable((2, 1), (1, 0))

    def test_map_outside_points(self):
        with pytest.raises(InvalidInputError):
            germ_groupoid([0, 1], [PartialBijection.from_dict({0: 5})])


class TestIsomorphism:
    def test_relabelled_transformation_groupoids(self):
        action = rotation_action(3)
        relabelled = relabel_action(action, {0: "a", 1: "b", 2: "c"})
        G, H = transformation_groupoid(action), transformation_groupoid(relabelled)
        psi = find_isomorphism(G, H)
        assert psi is not None
        for (a, b), ab in G.composition.items():
            assert H.compose(psi[a], psi[b]) == psi[ab]

    def test_free_transitive_is_pair_groupoid(self):
        G = transformation_groupoid(translation_action(named_group("Z2xZ2")))
        assert find_isomorphism(G, pair_groupoid([0, 1, 2, 3])) is not None

    def test_different_isotropy(self):
        G = group_groupoid(cyclic_group(4))
        H = group_groupoid(named_group("Z2xZ2"))
        assert find_isomorphism(G, H) is None

    def test_different_sizes(self):
        assert find_isomorphism(pair_groupoid([0, 1]), unit_groupoid([0, 1])) is None


class TestOrbitEquivalence:
    def test_swap_and_translation(self):
        A = translation_action(cyclic_group(2))
        B = swap_action()
        result = coe_search(A, B)
        assert result is not None
        verify_coe(A, B, result)

    def test_orbit_sizes_differ(self):
        assert coe_search(rotation_action(2, copies=2), rotation_action(4)) is None

    def test_agrees_with_groupoid_isomorphism(self):
        pairs = [
            (rotation_action(4), translation_action(named_group("Z2xZ2"))),
            (rotation_action(2, copies=3), rotation_action(3, copies=2)),
        ]
        for A, B in pairs:
            iso = find_isomorphism(transformation_groupoid(A), transformation_groupoid(B))
            assert (coe_search(A, B) is None) == (iso is None)
