"""Finite étale groupoids with the discrete topology.

Arrows are arbitrary hashable labels. ``compose(g, h)`` means "g after h" and
is defined exactly when ``dom(g) == ran(h)``. Pair-groupoid arrows are
``(i, j)`` with range ``i`` and domain ``j``; transformation-groupoid arrows
are ``(g, x)`` with domain ``x`` and range ``g.x``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .config import MAX_BISECTIONS, MAX_SEARCH_NODES
from .errors import GroupoidAxiomError, GuardExceeded, InvalidInputError, VerificationError
from .utils import log

Arrow = Hashable
Point = Hashable

# ---------------------------------------------------------------------------
# Finite groups and actions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its multiplication table."""

    elements: Tuple[Hashable, ...]
    table: Mapping[Tuple[Hashable, Hashable], Hashable]
    identity: Hashable
    inverses: Mapping[Hashable, Hashable]
    name: str = ""

    def mul(self, g: Hashable, h: Hashable) -> Hashable:
        return self.table[(g, h)]

    def inv(self, g: Hashable) -> Hashable:
        return self.inverses[g]

    @property
    def order(self) -> int:
        return len(self.elements)

    def power(self, g: Hashable, k: int) -> Hashable:
        result = self.identity
        for _ in range(k):
            result = self.mul(result, g)
        return result


def validate_group(
    elements: Sequence[Hashable],
    table: Mapping[Tuple[Hashable, Hashable], Hashable],
    name: str = "",
) -> FiniteGroup:
    """Check closure, associativity, identity and inverses."""
    elements = tuple(elements)
    members = set(elements)
    if len(members) != len(elements):
        raise InvalidInputError(f"group {name}: repeated elements")
    for g in elements:
        for h in elements:
            if table.get((g, h)) not in members:
                raise InvalidInputError(
                    f"group {name}: product {g!r}*{h!r} missing or outside the set"
                )
    for g in elements:
        for h in elements:
            gh = table[(g, h)]
            for k in elements:
                if table[(gh, k)] != table[(g, table[(h, k)])]:
                    raise InvalidInputError(f"group {name}: not associative at {(g, h, k)!r}")
    identities = [e for e in elements if all(table[(e, g)] == g == table[(g, e)] for g in elements)]
    if not identities:
        raise InvalidInputError(f"group {name}: no identity element")
    e = identities[0]
    inverses = {}
    for g in elements:
        found = [h for h in elements if table[(g, h)] == e and table[(h, g)] == e]
        if not found:
            raise InvalidInputError(f"group {name}: {g!r} has no inverse")
        inverses[g] = found[0]
    return FiniteGroup(elements, dict(table), e, inverses, name)


@dataclass(frozen=True, eq=False)
class GroupAction:
    """A finite group acting on a finite set by permutations."""

    group: FiniteGroup
    space: Tuple[Point, ...]
    act: Mapping[Hashable, Mapping[Point, Point]]
    name: str = ""

    def apply(self, g: Hashable, x: Point) -> Point:
        return self.act[g][x]

    @cached_property
    def orbits(self) -> Tuple[Tuple[Point, ...], ...]:
        seen = set()
        out = []
        for x in self.space:
            if x in seen:
                continue
            orbit = []
            for g in self.group.elements:
                y = self.apply(g, x)
                if y not in orbit:
                    orbit.append(y)
            orbit.sort(key=self.space.index)
            seen.update(orbit)
            out.append(tuple(orbit))
        return tuple(out)

    def stabilizer(self, x: Point) -> Tuple[Hashable, ...]:
        return tuple(g for g in self.group.elements if self.apply(g, x) == x)

    def is_free(self) -> bool:
        """Free action; on a finite discrete space this is topological freeness."""
        return all(len(self.stabilizer(x)) == 1 for x in self.space)


def validate_action(
    group: FiniteGroup,
    space: Sequence[Point],
    act: Mapping[Hashable, Mapping[Point, Point]],
    name: str = "",
) -> GroupAction:
    """Check each map is a permutation and ``act`` is a homomorphism."""
    space = tuple(space)
    points = set(space)
    for g in group.elements:
        m = act.get(g)
        if m is None or set(m) != points or set(m.values()) != points:
            raise InvalidInputError(f"action {name}: element {g!r} does not act by a permutation")
    for x in space:
        if act[group.identity][x] != x:
            raise InvalidInputError(f"action {name}: identity moves {x!r}")
    for g in group.elements:
        for h in group.elements:
            gh = group.mul(g, h)
            for x in space:
                if act[gh][x] != act[g][act[h][x]]:
                    raise InvalidInputError(
                        f"action {name}: act({g!r}{h!r}) != act({g!r})∘act({h!r}) at {x!r}"
                    )
    return GroupAction(group, space, {g: dict(act[g]) for g in group.elements}, name)


# ---------------------------------------------------------------------------
# Partial bijections and bisections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialBijection:
    """Injective map from a subset of a finite set into it, stored as its graph."""

    graph: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        sources = [x for x, _ in self.graph]
        targets = [y for _, y in self.graph]
        if len(set(sources)) != len(sources):
            raise InvalidInputError("partial bijection: a point has two images")
        if len(set(targets)) != len(targets):
            raise InvalidInputError("partial bijection: map is not injective")

    @classmethod
    def from_dict(cls, mapping: Mapping[Point, Point]) -> "PartialBijection":
        return cls(frozenset(mapping.items()))

    @classmethod
    def identity(cls, points: Iterable[Point]) -> "PartialBijection":
        return cls(frozenset((x, x) for x in points))

    @cached_property
    def as_dict(self) -> Dict[Point, Point]:
        return dict(self.graph)

    @property
    def domain(self) -> frozenset:
        return frozenset(x for x, _ in self.graph)

    @property
    def range(self) -> frozenset:
        return frozenset(y for _, y in self.graph)

    def __call__(self, x: Point) -> Point:
        return self.as_dict[x]

    def inverse(self) -> "PartialBijection":
        return PartialBijection(frozenset((y, x) for x, y in self.graph))

    def __matmul__(self, other: "PartialBijection") -> "PartialBijection":
        """``self ∘ other`` on ``other^{-1}(dom self)``."""
        mine = self.as_dict
        return PartialBijection(frozenset((x, mine[y]) for x, y in other.graph if y in mine))

    def restrict(self, subset: Iterable[Point]) -> "PartialBijection":
        keep = set(subset)
        return PartialBijection(frozenset((x, y) for x, y in self.graph if x in keep))

    def __len__(self) -> int:
        return len(self.graph)


@dataclass(frozen=True)
class Bisection:
    arrows: frozenset = field(default_factory=frozenset)

    def __len__(self) -> int:
        return len(self.arrows)


# ---------------------------------------------------------------------------
# Groupoids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """A validated finite groupoid; build it with ``validate_groupoid``."""

    arrows: Tuple[Arrow, ...]
    units: Tuple[Arrow, ...]
    dom_map: Mapping[Arrow, Arrow]
    ran_map: Mapping[Arrow, Arrow]
    inverse_map: Mapping[Arrow, Arrow]
    composition: Mapping[Tuple[Arrow, Arrow], Arrow]
    name: str = ""

    def dom(self, g: Arrow) -> Arrow:
        return self.dom_map[g]

    def ran(self, g: Arrow) -> Arrow:
        return self.ran_map[g]

    def inverse(self, g: Arrow) -> Arrow:
        return self.inverse_map[g]

    def composable(self, g: Arrow, h: Arrow) -> bool:
        return (g, h) in self.composition

    def compose(self, g: Arrow, h: Arrow) -> Arrow:
        try:
            return self.composition[(g, h)]
        except KeyError:
            raise InvalidInputError(f"{g!r} and {h!r} are not composable (dom != ran)") from None

    def is_unit(self, x: Arrow) -> bool:
        return x in self.unit_set

    def require_unit(self, x: Arrow) -> None:
        if x not in self.unit_set:
            raise InvalidInputError(f"{x!r} is not a unit of {self.name or 'the groupoid'}")

    @cached_property
    def unit_set(self) -> frozenset:
        return frozenset(self.units)

    @cached_property
    def _source_fibres(self) -> Dict[Arrow, Tuple[Arrow, ...]]:
        out: Dict[Arrow, List[Arrow]] = {x: [] for x in self.units}
        for g in self.arrows:
            out[self.dom_map[g]].append(g)
        return {x: tuple(v) for x, v in out.items()}

    @cached_property
    def _range_fibres(self) -> Dict[Arrow, Tuple[Arrow, ...]]:
        out: Dict[Arrow, List[Arrow]] = {x: [] for x in self.units}
        for g in self.arrows:
            out[self.ran_map[g]].append(g)
        return {x: tuple(v) for x, v in out.items()}

    def source_fibre(self, x: Arrow) -> Tuple[Arrow, ...]:
        """``Gx``: arrows with domain x, in arrow order."""
        return self._source_fibres[x]

    def range_fibre(self, x: Arrow) -> Tuple[Arrow, ...]:
        """``xG``: arrows with range x, in arrow order."""
        return self._range_fibres[x]

    @cached_property
    def arrow_index(self) -> Dict[Arrow, int]:
        return {g: k for k, g in enumerate(self.arrows)}

    def __len__(self) -> int:
        return len(self.arrows)

    def __repr__(self) -> str:
        name = self.name or "?"
        return f"FiniteGroupoid({name}: {len(self.arrows)} arrows, {len(self.units)} units)"


def validate_groupoid(
    arrows: Sequence[Arrow],
    compose: Mapping[Tuple[Arrow, Arrow], Arrow],
    inverse: Mapping[Arrow, Arrow],
    *,
    units: Optional[Iterable[Arrow]] = None,
    dom: Optional[Mapping[Arrow, Arrow]] = None,
    ran: Optional[Mapping[Arrow, Arrow]] = None,
    name: str = "",
) -> FiniteGroupoid:
    """Verify raw tables and return a ``FiniteGroupoid``.

    Raises ``GroupoidAxiomError`` naming the first failed axiom and its
    witnessing arrows. Domain and range default to ``g^-1 g`` and ``g g^-1``.
    """
    arrows = tuple(arrows)
    members = set(arrows)
    if len(members) != len(arrows):
        raise GroupoidAxiomError("distinct-arrows", (), "arrow labels repeat")

    for g in arrows:
        if inverse.get(g) not in members:
            raise GroupoidAxiomError("inverse-total", (g,), "no inverse in the arrow set")
    for g in arrows:
        if inverse[inverse[g]] != g:
            raise GroupoidAxiomError("inverse-involution", (g,), "(g^-1)^-1 != g")
    for g in arrows:
        gi = inverse[g]
        if (g, gi) not in compose or (gi, g) not in compose:
            raise GroupoidAxiomError("inverse-composable", (g, gi), "g g^-1 or g^-1 g undefined")
    for (g, h), gh in compose.items():
        if g not in members or h not in members or gh not in members:
            raise GroupoidAxiomError("closure", (g, h), f"product {gh!r} outside the arrow set")

    dom_map = {g: compose[(inverse[g], g)] for g in arrows}
    ran_map = {g: compose[(g, inverse[g])] for g in arrows}
    idempotent_units = [g for g in arrows if inverse[g] == g and compose.get((g, g)) == g]
    unit_set = set(idempotent_units)
    for g in arrows:
        for x in (dom_map[g], ran_map[g]):
            if x not in unit_set:
                raise GroupoidAxiomError(
                    "units", (g, x), "dom/ran is not an idempotent self-inverse arrow"
                )
    if units is not None and set(units) != unit_set:
        raise GroupoidAxiomError(
            "units", tuple(sorted(set(units) ^ unit_set, key=repr)), "declared units differ"
        )
    for label, given, derived in (("dom", dom, dom_map), ("ran", ran, ran_map)):
        if given is None:
            continue
        for g in arrows:
            if given.get(g) != derived[g]:
                raise GroupoidAxiomError(
                    f"{label}-consistency", (g,), f"declared {label} disagrees"
                )

    for (g, h) in compose:
        if dom_map[g] != ran_map[h]:
            raise GroupoidAxiomError(
                "composition-domain", (g, h), "composition defined on a non-matching pair"
            )
    by_range: Dict[Arrow, List[Arrow]] = defaultdict(list)
    for h in arrows:
        by_range[ran_map[h]].append(h)
    for g in arrows:
        for h in by_range[dom_map[g]]:
            if (g, h) not in compose:
                raise GroupoidAxiomError(
                    "composition-domain", (g, h), "matching pair left undefined"
                )

    for g in arrows:
        for h in by_range[dom_map[g]]:
            gh = compose[(g, h)]
            for k in by_range[dom_map[h]]:
                if compose[(gh, k)] != compose[(g, compose[(h, k)])]:
                    raise GroupoidAxiomError("associativity", (g, h, k), "(gh)k != g(hk)")

    for (g, h), gh in compose.items():
        if compose[(inverse[g], gh)] != h or compose[(gh, inverse[h])] != g:
            raise GroupoidAxiomError("cancellation", (g, h), "g^-1(gh) != h or (gh)h^-1 != g")

    ordered_units = tuple(g for g in arrows if g in unit_set)
    return FiniteGroupoid(
        arrows, ordered_units, dom_map, ran_map, dict(inverse), dict(compose), name
    )


# ---------------------------------------------------------------------------
# Standard constructions
# ---------------------------------------------------------------------------


def equivalence_groupoid(
    points: Sequence[Point], classes: Iterable[Iterable[Point]], name: str = ""
) -> FiniteGroupoid:
    """Groupoid of an equivalence relation: arrows ``(y, x)`` for x ~ y."""
    points = tuple(points)
    order = {x: k for k, x in enumerate(points)}
    arrows: List[Tuple[Point, Point]] = []
    members: Dict[Point, List[Point]] = {}
    for cls in classes:
        cls = sorted(set(cls), key=order.__getitem__)
        for x in cls:
            members[x] = cls
    for y in points:
        for x in members.get(y, [y]):
            arrows.append((y, x))
    compose = {}
    for (z, y) in arrows:
        for x in members.get(y, [y]):
            compose[((z, y), (y, x))] = (z, x)
    inverse = {(y, x): (x, y) for (y, x) in arrows}
    return validate_groupoid(arrows, compose, inverse, name=name)


def unit_groupoid(points: Sequence[Point], name: str = "") -> FiniteGroupoid:
    """Only identity arrows ``(x, x)``."""
    return equivalence_groupoid(points, [[x] for x in points], name or f"unit({len(points)})")


def pair_groupoid(points: Sequence[Point], name: str = "") -> FiniteGroupoid:
    """All pairs ``(i, j)`` with range i and domain j."""
    return equivalence_groupoid(points, [list(points)], name or f"pair({len(points)})")


def group_groupoid(group: FiniteGroup, name: str = "") -> FiniteGroupoid:
    """A group as a groupoid with one unit (its identity)."""
    compose = {(g, h): group.mul(g, h) for g in group.elements for h in group.elements}
    inverse = {g: group.inv(g) for g in group.elements}
    return validate_groupoid(group.elements, compose, inverse, name=name or group.name)


def transformation_groupoid(action: GroupAction, name: str = "") -> FiniteGroupoid:
    """``G ⋉ X``: ``(g, h.x)(h, x) = (gh, x)`` and ``(g, x)^-1 = (g^-1, g.x)``."""
    G = action.group
    arrows = [(g, x) for g in G.elements for x in action.space]
    compose = {}
    for (g, y) in arrows:
        for h in G.elements:
            for x in action.space:
                if action.apply(h, x) == y:
                    compose[((g, y), (h, x))] = (G.mul(g, h), x)
    inverse = {(g, x): (G.inv(g), action.apply(g, x)) for (g, x) in arrows}
    units = [(G.identity, x) for x in action.space]
    name = name or f"{G.name}⋉{action.name}"
    return validate_groupoid(arrows, compose, inverse, units=units, name=name)


# ---------------------------------------------------------------------------
# Isotropy
# ---------------------------------------------------------------------------


def isotropy_group(G: FiniteGroupoid, x: Arrow) -> frozenset:
    """``xGx``, checked closed under composition and inverse."""
    G.require_unit(x)
    group = frozenset(g for g in G.source_fibre(x) if G.ran(g) == x)
    for g in group:
        if G.inverse(g) not in group:
            raise VerificationError("isotropy closed under inverse", repr(g))
        for h in group:
            if G.compose(g, h) not in group:
                raise VerificationError("isotropy closed under composition", repr((g, h)))
    return group


def isotropy_bundle(G: FiniteGroupoid) -> frozenset:
    return frozenset(g for g in G.arrows if G.dom(g) == G.ran(g))


def is_principal(G: FiniteGroupoid) -> bool:
    """Trivial isotropy at every unit (dense = all on a finite discrete space)."""
    return all(len(isotropy_group(G, x)) == 1 for x in G.units)


# ---------------------------------------------------------------------------
# Bisections
# ---------------------------------------------------------------------------


def count_bisections(G: FiniteGroupoid) -> int:
    """Exact bisection count by dynamic programming over the ranges already used."""
    index = {x: k for k, x in enumerate(G.units)}
    counts: Dict[int, int] = {0: 1}
    for x in G.units:
        nxt: Dict[int, int] = defaultdict(int)
        for mask, c in counts.items():
            nxt[mask] += c
            for g in G.source_fibre(x):
                bit = 1 << index[G.ran(g)]
                if not mask & bit:
                    nxt[mask | bit] += c
        counts = nxt
    return sum(counts.values())


def is_bisection(G: FiniteGroupoid, arrows: Iterable[Arrow]) -> bool:
    arrows = list(arrows)
    return (
        len({G.dom(g) for g in arrows}) == len(arrows)
        and len({G.ran(g) for g in arrows}) == len(arrows)
    )


def enumerate_bisections(G: FiniteGroupoid, limit: int = MAX_BISECTIONS) -> List[Bisection]:
    """All subsets on which dom and ran are injective, refused above ``limit``."""
    total = count_bisections(G)
    if total > limit:
        raise GuardExceeded(f"bisections of {G.name or 'groupoid'}", total, limit)
    units = G.units
    out: List[Bisection] = []
    chosen: List[Arrow] = []
    used: set = set()

    def extend(k: int) -> None:
        if k == len(units):
            out.append(Bisection(frozenset(chosen)))
            return
        extend(k + 1)
        for g in G.source_fibre(units[k]):
            r = G.ran(g)
            if r in used:
                continue
            used.add(r)
            chosen.append(g)
            extend(k + 1)
            chosen.pop()
            used.discard(r)

    extend(0)
    return out


def bisection_action(G: FiniteGroupoid, S: Bisection) -> PartialBijection:
    """``beta_S``: dom(g) -> ran(g) for the unique g in S over each domain point."""
    if not is_bisection(G, S.arrows):
        raise InvalidInputError("not a bisection: dom or ran is not injective on it")
    return PartialBijection(frozenset((G.dom(g), G.ran(g)) for g in S.arrows))


def bisection_product(G: FiniteGroupoid, S: Bisection, T: Bisection) -> Bisection:
    return Bisection(frozenset(
        G.compose(g, h) for g in S.arrows for h in T.arrows if G.composable(g, h)
    ))


def bisection_inverse(G: FiniteGroupoid, S: Bisection) -> Bisection:
    return Bisection(frozenset(G.inverse(g) for g in S.arrows))


def units_bisection(G: FiniteGroupoid) -> Bisection:
    return Bisection(frozenset(G.units))


def check_bisection_homomorphism(
    G: FiniteGroupoid,
    bisections: Optional[Sequence[Bisection]] = None,
    rng=None,
    samples: int = 20000,
) -> Dict[str, int]:
    """beta(ST) = beta(S)∘beta(T) and beta(S^-1) = beta(S)^-1.

    Products are checked on all ordered pairs when there are at most ``samples``
    of them (or no ``rng``), otherwise on ``samples`` random pairs. For principal
    G also checks that beta is injective on bisections.
    """
    bisections = list(bisections) if bisections is not None else enumerate_bisections(G)
    beta = {S: bisection_action(G, S) for S in bisections}
    for S in bisections:
        if bisection_action(G, bisection_inverse(G, S)) != beta[S].inverse():
            raise VerificationError("beta(S^-1) = beta(S)^-1", repr(sorted(S.arrows, key=repr)))
    n = len(bisections)
    if rng is None or n * n <= samples:
        index_pairs = ((i, j) for i in range(n) for j in range(n))
    else:
        index_pairs = ((int(rng.integers(n)), int(rng.integers(n))) for _ in range(samples))
    pairs = 0
    for i, j in index_pairs:
        S, T = bisections[i], bisections[j]
        if bisection_action(G, bisection_product(G, S, T)) != beta[S] @ beta[T]:
            raise VerificationError("beta(ST) = beta(S)∘beta(T)", repr((S, T)))
        pairs += 1
    injective = len(set(beta.values())) == len(beta)
    if is_principal(G) and not injective:
        raise VerificationError("beta injective on bisections of a principal groupoid")
    return {"bisections": n, "pairs": pairs, "distinct_maps": len(set(beta.values()))}


# ---------------------------------------------------------------------------
# Groupoid of germs
# ---------------------------------------------------------------------------


class _DisjointSet:
    def __init__(self, items: Iterable[Point]) -> None:
        self.parent = {x: x for x in items}

    def find(self, x: Point) -> Point:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Point, b: Point) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def germ_groupoid(
    points: Sequence[Point], maps: Iterable[PartialBijection], name: str = ""
) -> FiniteGroupoid:
    """Groupoid of germs of the inverse semigroup generated by ``maps``.

    With the discrete topology the germ ``[s, x]`` is the pair ``(s(x), x)``;
    closing under products and inverses gives the generated equivalence
    relation, and the identity on every point is included.
    """
    points = tuple(points)
    ds = _DisjointSet(points)
    for s in maps:
        for x, y in s.graph:
            if x not in ds.parent or y not in ds.parent:
                raise InvalidInputError(f"map moves {x!r} -> {y!r} outside the point set")
            ds.union(x, y)
    classes: Dict[Point, List[Point]] = defaultdict(list)
    for x in points:
        classes[ds.find(x)].append(x)
    return equivalence_groupoid(points, classes.values(), name or "germs")


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------


def _unit_signature(G: FiniteGroupoid, x: Arrow) -> Tuple[int, int, int]:
    iso = sum(1 for g in G.source_fibre(x) if G.ran(g) == x)
    return (len(G.source_fibre(x)), len(G.range_fibre(x)), iso)


def find_isomorphism(
    G: FiniteGroupoid, H: FiniteGroupoid, limit: int = MAX_SEARCH_NODES
) -> Optional[Dict[Arrow, Arrow]]:
    """Arrow bijection preserving units, dom, ran, composition and inverse.

    Returns None only after exhausting the backtracking search.
    """
    if len(G.arrows) != len(H.arrows) or len(G.units) != len(H.units):
        return None
    sig_g = {x: _unit_signature(G, x) for x in G.units}
    sig_h = {y: _unit_signature(H, y) for y in H.units}
    if sorted(sig_g.values()) != sorted(sig_h.values()):
        return None

    factorizations: Dict[Arrow, List[Tuple[Arrow, Arrow]]] = defaultdict(list)
    involving: Dict[Arrow, List[Tuple[Arrow, Arrow, Arrow]]] = defaultdict(list)
    for (a, b), ab in G.composition.items():
        factorizations[ab].append((a, b))
        involving[a].append((a, b, ab))
        if b != a:
            involving[b].append((a, b, ab))
    by_ends: Dict[Tuple[Arrow, Arrow], List[Arrow]] = defaultdict(list)
    for h in H.arrows:
        by_ends[(H.dom(h), H.ran(h))].append(h)
    non_units = [g for g in G.arrows if not G.is_unit(g)]
    nodes = [0]
    psi: Dict[Arrow, Arrow] = {}
    used: set = set()

    def tick() -> None:
        nodes[0] += 1
        if nodes[0] > limit:
            raise GuardExceeded("isomorphism search nodes", None, limit)

    def consistent(g: Arrow) -> bool:
        for a, b, ab in involving[g]:
            if a in psi and b in psi and ab in psi:
                if H.composition.get((psi[a], psi[b])) != psi[ab]:
                    return False
        for a, b in factorizations[g]:
            if a in psi and b in psi and H.composition.get((psi[a], psi[b])) != psi[g]:
                return False
        gi = G.inverse(g)
        if gi in psi and H.inverse(psi[g]) != psi[gi]:
            return False
        return True

    def assign_arrows(k: int) -> bool:
        if k == len(non_units):
            return True
        g = non_units[k]
        ends = (psi[G.dom(g)], psi[G.ran(g)])
        for h in by_ends[ends]:
            if h in used:
                continue
            tick()
            psi[g] = h
            used.add(h)
            if consistent(g) and assign_arrows(k + 1):
                return True
            del psi[g]
            used.discard(h)
        return False

    def assign_units(k: int) -> bool:
        if k == len(G.units):
            return assign_arrows(0)
        x = G.units[k]
        for y in H.units:
            if y in used or sig_h[y] != sig_g[x]:
                continue
            tick()
            psi[x] = y
            used.add(y)
            if assign_units(k + 1):
                return True
            del psi[x]
            used.discard(y)
        return False

    if not assign_units(0):
        return None
    for (a, b), ab in G.composition.items():
        if H.composition.get((psi[a], psi[b])) != psi[ab]:
            raise VerificationError("isomorphism preserves composition", repr((a, b)))
    return dict(psi)


# ---------------------------------------------------------------------------
# Continuous orbit equivalence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class COEResult:
    """Orbit-matching bijection with cocycles in both directions.

    Continuity is automatic on finite discrete spaces.
    """

    theta: Dict[Point, Point]
    c_h: Dict[Tuple[Hashable, Point], Hashable]
    c_g: Dict[Tuple[Hashable, Point], Hashable]


def verify_coe(A: GroupAction, B: GroupAction, result: COEResult) -> None:
    theta = result.theta
    theta_inv = {y: x for x, y in theta.items()}
    for g in A.group.elements:
        for x in A.space:
            if theta[A.apply(g, x)] != B.apply(result.c_h[(g, x)], theta[x]):
                raise VerificationError("theta(g.x) = c_H(g,x).theta(x)", repr((g, x)))
    for h in B.group.elements:
        for y in B.space:
            if theta_inv[B.apply(h, y)] != A.apply(result.c_g[(h, y)], theta_inv[y]):
                raise VerificationError("theta^-1(h.y) = c_G(h,y).theta^-1(y)", repr((h, y)))


def coe_search(
    A: GroupAction, B: GroupAction, limit: int = MAX_SEARCH_NODES
) -> Optional[COEResult]:
    """Backtracking search for a continuous orbit equivalence ``A -> B``."""
    if len(A.space) != len(B.space):
        return None
    orbit_a = {x: k for k, orbit in enumerate(A.orbits) for x in orbit}
    orbit_b = {y: k for k, orbit in enumerate(B.orbits) for y in orbit}
    size_a = {k: len(o) for k, o in enumerate(A.orbits)}
    size_b = {k: len(o) for k, o in enumerate(B.orbits)}
    theta: Dict[Point, Point] = {}
    used: set = set()
    orbit_map: Dict[int, int] = {}
    nodes = [0]

    def extend(k: int) -> bool:
        if k == len(A.space):
            return True
        x = A.space[k]
        ox = orbit_a[x]
        for y in B.space:
            if y in used:
                continue
            oy = orbit_b[y]
            if size_a[ox] != size_b[oy]:
                continue
            mapped = orbit_map.get(ox)
            if mapped is not None and mapped != oy:
                continue
            if mapped is None and oy in orbit_map.values():
                continue
            nodes[0] += 1
            if nodes[0] > limit:
                raise GuardExceeded("orbit-equivalence search nodes", None, limit)
            theta[x] = y
            used.add(y)
            fresh = mapped is None
            if fresh:
                orbit_map[ox] = oy
            if extend(k + 1):
                return True
            if fresh:
                del orbit_map[ox]
            del theta[x]
            used.discard(y)
        return False

    if not extend(0):
        return None
    theta_inv = {y: x for x, y in theta.items()}
    c_h = {}
    for g in A.group.elements:
        for x in A.space:
            target = theta[A.apply(g, x)]
            c_h[(g, x)] = next(h for h in B.group.elements if B.apply(h, theta[x]) == target)
    c_g = {}
    for h in B.group.elements:
        for y in B.space:
            target = theta_inv[B.apply(h, y)]
            c_g[(h, y)] = next(g for g in A.group.elements if A.apply(g, theta_inv[y]) == target)
    result = COEResult(dict(theta), c_h, c_g)
    verify_coe(A, B, result)
    log(f"  orbit equivalence {A.name} -> {B.name} found after {nodes[0]} nodes")
    return result
