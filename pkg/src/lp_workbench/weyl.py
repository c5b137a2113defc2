"""Admissible pairs, realizable partial bijections and the Weyl groupoid.

Positivity and "> 0" tests are exact: coefficients are Gaussian rationals.
Condition (1) is checked on indicator functions only; every nonnegative
function on a finite spectrum is a nonnegative combination of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, List, Mapping, Optional, Protocol, Sequence, Set, Tuple, Union

from .config import MAX_BISECTIONS, MAX_SEARCH_NODES
from .errors import InvalidInputError, VerificationError
from .exact import (
    ONE,
    ZERO,
    ExactMatrix,
    Scalar,
    conj,
    is_nonneg_real,
    is_positive_real,
    is_zero,
    to_scalar,
)
from .groupoid import (
    Bisection,
    FiniteGroupoid,
    PartialBijection,
    bisection_action,
    enumerate_bisections,
    find_isomorphism,
    germ_groupoid,
    is_bisection,
    is_principal,
)
from .groupoid_algebra import (
    ConvElement,
    convolve,
    core_of_groupoid_algebra,
    random_element,
    unit_indicator,
)
from .lp_norms import PExponent, RepresentedAlgebra, Spectrum, core_of, spectrum_points
from .utils import log, plural

Point = Hashable

# ---------------------------------------------------------------------------
# Core contexts
# ---------------------------------------------------------------------------


class CoreContext(Protocol):
    """What the admissibility check needs from an algebra with a commutative core."""

    points: Tuple[Point, ...]

    def multiply(self, a, b): ...

    def indicator(self, y: Point): ...

    def values(self, elem) -> Optional[Dict[Point, Scalar]]: ...

    def contains(self, elem) -> bool: ...


@dataclass(frozen=True, eq=False)
class GroupoidCoreContext:
    """``F^p_lambda(G)`` with core ``C(G^(0))``; spectrum points are the units."""

    groupoid: FiniteGroupoid

    @property
    def points(self) -> Tuple[Point, ...]:
        return self.groupoid.units

    def multiply(self, a: ConvElement, b: ConvElement) -> ConvElement:
        return convolve(a, b)

    def indicator(self, y: Point) -> ConvElement:
        return unit_indicator(self.groupoid, [y])

    def values(self, elem: ConvElement) -> Optional[Dict[Point, Scalar]]:
        if not elem.supported_on_units():
            return None
        return {x: elem[x] for x in self.groupoid.units}

    def contains(self, elem) -> bool:
        return isinstance(elem, ConvElement) and elem.groupoid is self.groupoid


@dataclass(frozen=True, eq=False)
class MatrixCoreContext:
    """A represented algebra with its computed core and spectrum (p != 2)."""

    algebra: RepresentedAlgebra
    p: PExponent

    @cached_property
    def core(self) -> RepresentedAlgebra:
        self.p.require_not_two("admissible pairs in a represented algebra")
        return core_of(self.algebra, self.p)

    @cached_property
    def spectrum(self) -> Spectrum:
        return spectrum_points(self.core)

    @property
    def points(self) -> Tuple[Point, ...]:
        return self.spectrum.points

    def multiply(self, a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
        return a @ b

    def indicator(self, y: Point) -> ExactMatrix:
        return self.spectrum.idempotents[y]

    def values(self, elem: ExactMatrix) -> Optional[Dict[Point, Scalar]]:
        if not self.core.contains(elem):
            return None
        return {k: elem[(cls[0], cls[0])] for k, cls in enumerate(self.spectrum.classes)}

    def contains(self, elem) -> bool:
        return isinstance(elem, ExactMatrix) and self.algebra.contains(elem)


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealizedHomeo:
    """``alpha: U -> V`` with ``U = {ba > 0}`` and ``V = {ab > 0}``."""

    U: frozenset
    V: frozenset
    alpha: PartialBijection


@dataclass(frozen=True)
class AdmissibilityResult:
    realized: Optional[RealizedHomeo]
    condition: str = ""
    detail: str = ""
    witness: Tuple = ()

    @property
    def accepted(self) -> bool:
        return self.realized is not None


@dataclass(frozen=True, eq=False)
class AdmissiblePair:
    """An accepted pair ``s = (a, b)`` with the map it realizes."""

    context: CoreContext
    a: object
    b: object
    realized: RealizedHomeo = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def alpha(self) -> PartialBijection:
        return self.realized.alpha


def _reject(condition: str, detail: str, *witness) -> AdmissibilityResult:
    return AdmissibilityResult(None, condition, detail, tuple(witness))


def check_admissible(ctx: CoreContext, a, b) -> AdmissibilityResult:
    """Decide whether ``(a, b)`` is admissible and compute the realized map.

    Conditions are reported as ``condition-1`` (``a f b, b f a`` in
    ``C(X)_+``), ``condition-2`` (U and V from ``ba``, ``ab`` with alpha a
    bijection between them) and ``condition-3`` (``f(alpha(x)) ba(x) = bfa(x)``
    and the reverse identity).
    """
    if ctx is None:
        raise InvalidInputError("check_admissible needs a core context (core and spectrum)")
    if not (ctx.contains(a) and ctx.contains(b)):
        raise InvalidInputError("a and b must belong to the context's algebra")
    points = ctx.points
    b_f_a: Dict[Point, Dict[Point, Scalar]] = {}
    a_f_b: Dict[Point, Dict[Point, Scalar]] = {}
    for y in points:
        e = ctx.indicator(y)
        for name, left, right, store in (("b 1_y a", b, a, b_f_a), ("a 1_y b", a, b, a_f_b)):
            vals = ctx.values(ctx.multiply(ctx.multiply(left, e), right))
            if vals is None:
                return _reject("condition-1", f"{name} is not in the core", y)
            for x, v in vals.items():
                if not is_nonneg_real(v):
                    return _reject("condition-1", f"{name} is not nonnegative at {x!r}", y, x)
            store[y] = vals

    ba = ctx.values(ctx.multiply(b, a))
    ab = ctx.values(ctx.multiply(a, b))
    if ba is None or ab is None:
        return _reject("condition-1", "ba or ab is not in the core")
    U = frozenset(x for x in points if is_positive_real(ba[x]))
    V = frozenset(y for y in points if is_positive_real(ab[y]))

    alpha: Dict[Point, Point] = {}
    for x in points:
        hits = [y for y in points if not is_zero(b_f_a[y][x])]
        if x not in U:
            if hits:
                return _reject("condition-3", f"b 1_y a nonzero at {x!r} outside U", hits[0], x)
            continue
        if len(hits) != 1:
            return _reject("condition-3", f"{len(hits)} points y with (b 1_y a)({x!r}) > 0", x)
        y = hits[0]
        if b_f_a[y][x] != ba[x]:
            return _reject("condition-3", f"(b 1_y a)({x!r}) != ba({x!r})", y, x)
        alpha[x] = y

    if len(set(alpha.values())) != len(alpha) or set(alpha.values()) != V:
        return _reject("condition-2", "alpha is not a bijection from U onto V")
    alpha_inv = {y: x for x, y in alpha.items()}
    for y in points:
        hits = [x for x in points if not is_zero(a_f_b[x][y])]
        if y not in V:
            if hits:
                return _reject("condition-3", f"a 1_x b nonzero at {y!r} outside V", hits[0], y)
            continue
        if hits != [alpha_inv[y]] or a_f_b[hits[0]][y] != ab[y]:
            return _reject("condition-3", f"g(alpha^-1(y)) ab(y) != agb(y) at {y!r}", y)
    return AdmissibilityResult(RealizedHomeo(U, V, PartialBijection.from_dict(alpha)))


def admissible_pair(ctx: CoreContext, a, b) -> AdmissiblePair:
    """Check a pair and wrap it; rejection raises ``VerificationError``."""
    result = check_admissible(ctx, a, b)
    if not result.accepted:
        raise VerificationError(result.condition, result.detail)
    return AdmissiblePair(ctx, a, b, result.realized)


# ---------------------------------------------------------------------------
# Pairs from bisections and functions
# ---------------------------------------------------------------------------


def pair_from_bisection(
    G: FiniteGroupoid,
    S: Bisection,
    h: Optional[Mapping[Point, object]] = None,
    ctx: Optional[GroupoidCoreContext] = None,
) -> AdmissiblePair:
    """``a(g) = h(dom g)`` on S and ``b(g^-1) = h(dom g)``; realizes ``beta_S``."""
    if not is_bisection(G, S.arrows):
        raise InvalidInputError("not a bisection")
    ctx = ctx or GroupoidCoreContext(G)
    weights: Dict[Point, Scalar] = {}
    for g in S.arrows:
        x = G.dom(g)
        w = ONE if h is None else to_scalar(h.get(x, 0))
        if not is_positive_real(w):
            raise InvalidInputError(f"h must be strictly positive on dom(S); h({x!r}) = {w}")
        weights[x] = w
    a = ConvElement(G, {g: weights[G.dom(g)] for g in S.arrows})
    b = ConvElement(G, {G.inverse(g): weights[G.dom(g)] for g in S.arrows})
    pair = admissible_pair(ctx, a, b)
    if pair.alpha != bisection_action(G, S):
        raise VerificationError("pair from a bisection realizes beta_S")
    ba = convolve(b, a)
    if dict(ba.coeffs) != {x: w * w for x, w in weights.items()}:
        raise VerificationError("ba = h^2 on dom(S)")
    return pair


def pair_from_function(
    G: FiniteGroupoid, f: ConvElement, ctx: Optional[GroupoidCoreContext] = None
) -> AdmissiblePair:
    """``s_f = (f, conj f)`` for f on units; realizes the identity on ``{f != 0}``."""
    if not f.supported_on_units():
        raise InvalidInputError("pair_from_function needs a function supported on units")
    ctx = ctx or GroupoidCoreContext(G)
    pair = admissible_pair(ctx, f, ConvElement(G, {x: conj(v) for x, v in f.coeffs.items()}))
    if pair.alpha != PartialBijection.identity(f.support):
        raise VerificationError("s_f realizes the identity on {f != 0}")
    return pair


def unit_pair(G: FiniteGroupoid) -> AdmissiblePair:
    one = unit_indicator(G)
    return admissible_pair(GroupoidCoreContext(G), one, one)


def _same_context(s: AdmissiblePair, t: AdmissiblePair) -> None:
    if s.context is not t.context:
        ga = getattr(s.context, "groupoid", None)
        gb = getattr(t.context, "groupoid", None)
        if ga is None or ga is not gb:
            raise InvalidInputError("admissible pairs live in different algebras")


def compose_pairs(s: AdmissiblePair, t: AdmissiblePair) -> AdmissiblePair:
    """``st = (ac, db)`` realizing ``alpha_s ∘ alpha_t`` on ``U_t ∩ alpha_t^-1(U_s)``."""
    _same_context(s, t)
    ctx = s.context
    st = admissible_pair(ctx, ctx.multiply(s.a, t.a), ctx.multiply(t.b, s.b))
    if st.alpha != s.alpha @ t.alpha:
        raise VerificationError("alpha_st = alpha_s ∘ alpha_t")
    return st


def reverse_pair(s: AdmissiblePair) -> AdmissiblePair:
    """``s# = (b, a)`` realizing ``alpha_s^-1``."""
    rev = admissible_pair(s.context, s.b, s.a)
    if rev.alpha != s.alpha.inverse():
        raise VerificationError("alpha_{s#} = alpha_s^-1")
    return rev


def bisection_from_pair(G: FiniteGroupoid, s: AdmissiblePair) -> Bisection:
    """``S = {g : a(g) != 0 and b(g^-1) != 0}`` for G principal."""
    if not is_principal(G):
        raise InvalidInputError(f"{G.name or 'groupoid'} is not principal")
    a, b = s.a, s.b
    for g in G.arrows:
        prod = a[g] * b[G.inverse(g)]
        if not is_nonneg_real(prod):
            raise VerificationError("a(g) b(g^-1) >= 0", repr(g))
    arrows = frozenset(g for g in G.arrows if not is_zero(a[g]) and not is_zero(b[G.inverse(g)]))
    if not is_bisection(G, arrows):
        raise VerificationError("S is a bisection", repr(sorted(arrows, key=repr)))
    S = Bisection(arrows)
    beta = bisection_action(G, S)
    if beta.domain != s.realized.U:
        raise VerificationError("dom(S) = U_s")
    if beta != s.alpha:
        raise VerificationError("beta_S = alpha_s")
    return S


def bisection_round_trip(
    G: FiniteGroupoid, rng, weights: int = 10, limit: int = MAX_BISECTIONS
) -> int:
    """Pair from every bisection with random positive weights, then back; returns pairs checked."""
    ctx = GroupoidCoreContext(G)
    checked = 0
    for S in enumerate_bisections(G, limit):
        for _ in range(weights):
            h = {x: f"{int(rng.integers(1, 10))}/{int(rng.integers(1, 5))}" for x in G.units}
            pair = pair_from_bisection(G, S, h, ctx=ctx)
            if bisection_from_pair(G, pair) != S:
                detail = repr(sorted(S.arrows, key=repr))
                raise VerificationError("bisection recovered from its pair", detail)
            checked += 1
    return checked


@dataclass(frozen=True)
class SoundnessCounts:
    """Outcome of a random-pair run: rejections are tallied by the condition they broke."""

    accepted: int
    rejected: int
    bisections_recovered: int
    rejections_rechecked: int
    by_condition: Dict[str, int] = field(default_factory=dict)


def _pointwise_violations(
    G: FiniteGroupoid, a: ConvElement, b: ConvElement
) -> Tuple[Set[str], Dict[Point, Point]]:
    """Conditions broken by ``(a, b)`` in a principal G, read off arrow values.

    With ``g(x, y)`` the arrow from x to y, ``(b 1_y a)(g(x', x)) =
    b(g(y, x)) a(g(x', y))``; no convolution is performed.
    """
    arrow = {(G.dom(g), G.ran(g)): g for g in G.arrows}
    units = G.units

    def at(f: ConvElement, x: Point, y: Point) -> Scalar:
        g = arrow.get((x, y))
        return f[g] if g is not None else ZERO

    violated: Set[str] = set()
    for y in units:
        for x in units:
            for x2 in units:
                for left, right in ((b, a), (a, b)):
                    v = at(left, y, x) * at(right, x2, y)
                    if (x2 != x and not is_zero(v)) or (x2 == x and not is_nonneg_real(v)):
                        violated.add("condition-1")

    def hits(f: ConvElement, h: ConvElement, x: Point) -> List[Point]:
        return [y for y in units if not is_zero(at(f, y, x) * at(h, x, y))]

    def total(f: ConvElement, h: ConvElement, x: Point) -> Scalar:
        return sum((at(f, y, x) * at(h, x, y) for y in units), ZERO)

    V = {y for y in units if is_positive_real(total(a, b, y))}
    alpha: Dict[Point, Point] = {}
    for x in units:
        ys = hits(b, a, x)
        if not is_positive_real(total(b, a, x)):
            if ys:
                violated.add("condition-3")
            continue
        if len(ys) != 1:
            violated.add("condition-3")
            continue
        alpha[x] = ys[0]
    if len(set(alpha.values())) != len(alpha) or set(alpha.values()) != V:
        violated.add("condition-2")
    alpha_inv = {y: x for x, y in alpha.items()}
    for y in units:
        xs = hits(a, b, y)
        if y not in V:
            if xs:
                violated.add("condition-3")
        elif y in alpha_inv and xs != [alpha_inv[y]]:
            violated.add("condition-3")
    return violated, alpha


def random_pair_soundness(
    G: FiniteGroupoid, maps: Set[PartialBijection], rng, samples: int = 500
) -> SoundnessCounts:
    """Random pairs are checked against the realizable maps of G.

    An accepted pair must give back a bisection S with ``beta_S = alpha_s``
    whose map lies in ``maps``; a rejected pair must break the condition it
    was rejected for when that condition is re-read from arrow values. Half
    the samples take ``b`` as the adjoint-shaped reverse of ``a`` so that
    acceptances actually occur.
    """
    if not is_principal(G):
        raise InvalidInputError(f"{G.name or 'groupoid'} is not principal")
    ctx = GroupoidCoreContext(G)
    accepted = recovered = rechecked = 0
    by_condition: Dict[str, int] = {}
    for _ in range(samples):
        a = random_element(G, rng, bound=2, density=0.3, real=bool(rng.integers(2)))
        if rng.random() < 0.5:
            b = ConvElement(G, {G.inverse(g): conj(v) for g, v in a.coeffs.items()})
        else:
            b = random_element(G, rng, bound=2, density=0.3, real=True)
        result = check_admissible(ctx, a, b)
        violated, alpha = _pointwise_violations(G, a, b)
        if not result.accepted:
            if result.condition not in violated:
                detail = f"rejected for {result.condition}, arrow values break {sorted(violated)}"
                raise VerificationError("rejected pairs break the named condition", detail)
            by_condition[result.condition] = by_condition.get(result.condition, 0) + 1
            rechecked += 1
            continue
        accepted += 1
        if violated or PartialBijection.from_dict(alpha) != result.realized.alpha:
            detail = repr(sorted(violated))
            raise VerificationError("accepted pairs satisfy every condition", detail)
        S = bisection_from_pair(G, AdmissiblePair(ctx, a, b, result.realized))
        if bisection_action(G, S) != result.realized.alpha:
            raise VerificationError("beta_S = alpha_s", repr(sorted(S.arrows, key=repr)))
        recovered += 1
        if result.realized.alpha not in maps:
            detail = repr(result.realized.alpha)
            raise VerificationError("accepted pairs realize bisection maps", detail)
    return SoundnessCounts(accepted, samples - accepted, recovered, rechecked, by_condition)


# ---------------------------------------------------------------------------
# Realizable maps and the Weyl groupoid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealizableMaps:
    """Maps realized by the pairs built from all bisections."""

    maps: frozenset
    bisections: int
    closure_pairs_checked: int = 0


def _bisection_pairs(
    G: FiniteGroupoid, limit: int
) -> List[Tuple[Bisection, AdmissiblePair]]:
    ctx = GroupoidCoreContext(G)
    return [(S, pair_from_bisection(G, S, ctx=ctx)) for S in enumerate_bisections(G, limit)]


def check_inverse_semigroup(
    pairs: Sequence[AdmissiblePair], maps: Set[PartialBijection], rng=None, samples: int = 2000
) -> int:
    """Products and reverses of accepted pairs realize nothing outside ``maps``.

    All ordered pairs are tried when there are at most ``samples`` of them or
    no ``rng`` is given; otherwise ``samples`` random pairs drawn from ``rng``.
    """
    n = len(pairs)
    if n * n <= samples or rng is None:
        index_pairs = [(i, j) for i in range(n) for j in range(n)]
    else:
        index_pairs = [(int(rng.integers(n)), int(rng.integers(n))) for _ in range(samples)]
    for s in pairs:
        if reverse_pair(s).alpha not in maps:
            raise VerificationError("realizable maps closed under reversal")
    for i, j in index_pairs:
        if compose_pairs(pairs[i], pairs[j]).alpha not in maps:
            raise VerificationError("realizable maps closed under products", repr((i, j)))
    return len(index_pairs)


def realizable_maps(
    G: FiniteGroupoid,
    p: Union[PExponent, float, str],
    *,
    limit: int = MAX_BISECTIONS,
    rng=None,
    closure_samples: int = 2000,
) -> RealizableMaps:
    """Partial bijections of ``G^(0)`` realized by admissible pairs from bisections."""
    p = PExponent.parse(p)
    p.require_not_two("realizable_maps")
    pairs = _bisection_pairs(G, limit)
    maps = {pair.alpha for _, pair in pairs}
    checked = 0
    if is_principal(G):
        checked = check_inverse_semigroup([pair for _, pair in pairs], maps, rng, closure_samples)
    return RealizableMaps(frozenset(maps), len(pairs), checked)


@dataclass(frozen=True, eq=False)
class WeylReconstruction:
    """The Weyl groupoid with the isomorphism onto G found for principal G."""

    groupoid: FiniteGroupoid
    maps: frozenset
    bisections: int
    isomorphism: Optional[Dict[Point, Point]] = None


def reconstruct_weyl(
    G: FiniteGroupoid,
    p: Union[PExponent, float, str],
    *,
    limit: int = MAX_BISECTIONS,
    max_nodes: int = MAX_SEARCH_NODES,
) -> WeylReconstruction:
    """Germ groupoid of the realizable maps of ``F^p_lambda(G)``.

    For principal G the result is checked isomorphic to G and the arrow map is
    kept; otherwise it is the orbit relation of G, a strict quotient when
    isotropy is nontrivial.
    """
    p = PExponent.parse(p)
    p.require_not_two("weyl_groupoid")
    core_of_groupoid_algebra(G, p)
    pairs = _bisection_pairs(G, limit)
    maps = frozenset(pair.alpha for _, pair in pairs)
    found = plural(len(maps), "distinct map")
    log(f"  {G.name}: {plural(len(pairs), 'bisection')} realize {found}")
    W = germ_groupoid(G.units, maps, name=f"Weyl({G.name})")
    iso = None
    if is_principal(G):
        iso = find_isomorphism(W, G, max_nodes)
        if iso is None:
            raise VerificationError("Weyl groupoid of F^p_lambda(G) is isomorphic to G", G.name)
    return WeylReconstruction(W, maps, len(pairs), iso)


def weyl_groupoid(
    G: FiniteGroupoid, p: Union[PExponent, float, str], *, limit: int = MAX_BISECTIONS
) -> FiniteGroupoid:
    return reconstruct_weyl(G, p, limit=limit).groupoid
