"""Standard finite groups, actions and groupoids used by spec files and tests."""

from __future__ import annotations

from itertools import permutations, product
from typing import Hashable, List, Mapping, Sequence

from .errors import InvalidInputError
from .groupoid import FiniteGroup, GroupAction, validate_action, validate_group

# ---------------------------------------------------------------------------
# Groups
# ---------------------------------------------------------------------------


def cyclic_group(n: int) -> FiniteGroup:
    """``Z_n`` on ``0..n-1`` under addition mod n."""
    if n < 1:
        raise InvalidInputError(f"cyclic group order must be >= 1, got {n}")
    elements = tuple(range(n))
    table = {(a, b): (a + b) % n for a in elements for b in elements}
    return validate_group(elements, table, name=f"Z{n}")


def symmetric_group(n: int) -> FiniteGroup:
    """``S_n`` as permutation tuples; ``(g*h)[i] = g[h[i]]``."""
    if n < 1:
        raise InvalidInputError(f"symmetric group degree must be >= 1, got {n}")
    elements = tuple(permutations(range(n)))
    table = {(g, h): tuple(g[h[i]] for i in range(n)) for g in elements for h in elements}
    return validate_group(elements, table, name=f"S{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    elements = tuple(product(G.elements, H.elements))
    table = {
        ((g1, h1), (g2, h2)): (G.mul(g1, g2), H.mul(h1, h2))
        for (g1, h1) in elements
        for (g2, h2) in elements
    }
    return validate_group(elements, table, name=f"{G.name}x{H.name}")


def group_from_table(
    elements: Sequence[Hashable], rows: Sequence[Sequence[Hashable]], name: str = ""
) -> FiniteGroup:
    """Build a group from a Cayley table given row by row."""
    elements = tuple(elements)
    if len(rows) != len(elements) or any(len(r) != len(elements) for r in rows):
        size = len(elements)
        raise InvalidInputError(f"group {name}: Cayley table must be {size}x{size}")
    table = {(g, h): rows[i][j] for i, g in enumerate(elements) for j, h in enumerate(elements)}
    return validate_group(elements, table, name=name)


def named_group(spec: str) -> FiniteGroup:
    """Parse ``Z<n>``, ``S<n>`` or ``Z<a>xZ<b>``."""
    text = spec.strip()
    if "x" in text:
        parts = [named_group(part) for part in text.split("x")]
        out = parts[0]
        for part in parts[1:]:
            out = direct_product(out, part)
        return out
    if len(text) >= 2 and text[1:].isdigit():
        if text[0] == "Z":
            return cyclic_group(int(text[1:]))
        if text[0] == "S":
            return symmetric_group(int(text[1:]))
    raise InvalidInputError(f"unknown group '{spec}' (expected Z<n>, S<n> or products like Z2xZ2)")


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------


def action_from_maps(
    group: FiniteGroup,
    space: Sequence[Hashable],
    maps: Mapping[Hashable, Mapping[Hashable, Hashable]],
    name: str = "",
) -> GroupAction:
    return validate_action(group, space, maps, name)


def translation_action(group: FiniteGroup) -> GroupAction:
    """Left translation of a group on itself (free and transitive)."""
    act = {g: {h: group.mul(g, h) for h in group.elements} for g in group.elements}
    return validate_action(group, group.elements, act, name=f"{group.name}-translation")


def trivial_action(group: FiniteGroup, space: Sequence[Hashable]) -> GroupAction:
    act = {g: {x: x for x in space} for g in group.elements}
    return validate_action(group, space, act, name=f"{group.name}-trivial{len(space)}")


def rotation_action(n: int, copies: int = 1) -> GroupAction:
    """``Z_n`` rotating ``copies`` disjoint n-cycles; points are ``(c, i)`` or ``i``."""
    group = cyclic_group(n)
    if copies == 1:
        space: List[Hashable] = list(range(n))
        act = {k: {i: (i + k) % n for i in range(n)} for k in group.elements}
    else:
        space = [(c, i) for c in range(copies) for i in range(n)]
        act = {k: {(c, i): (c, (i + k) % n) for (c, i) in space} for k in group.elements}
    name = f"Z{n}-rotation" + (f"x{copies}" if copies > 1 else "")
    return validate_action(group, space, act, name=name)


def swap_action() -> GroupAction:
    """``Z_2`` swapping two points."""
    return rotation_action(2)


def permutation_action(n: int) -> GroupAction:
    """``S_n`` acting on ``0..n-1``."""
    group = symmetric_group(n)
    act = {g: {i: g[i] for i in range(n)} for g in group.elements}
    return validate_action(group, range(n), act, name=f"S{n}-natural")


def relabel_action(action: GroupAction, relabel: Mapping[Hashable, Hashable]) -> GroupAction:
    """Same action transported along a bijection of points."""
    act = {
        g: {relabel[x]: relabel[action.apply(g, x)] for x in action.space}
        for g in action.group.elements
    }
    return validate_action(
        action.group, [relabel[x] for x in action.space], act, name=f"{action.name}'"
    )
