"""Convolution algebra of a finite groupoid and its reduced l^p norm.

At finite scale ``C_c(G)`` is finite-dimensional, so the reduced algebra is
``C_c(G)`` with the norm of the block-diagonal regular representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Union

from sympy.polys.domains import QQ_I

from .errors import InvalidInputError, VerificationError
from .exact import (
    ONE,
    ZERO,
    ExactMatrix,
    Scalar,
    _axpy,
    block_diag,
    clean,
    conj,
    is_zero,
    same_span,
    scalar_abs,
    to_scalar,
)
from .groupoid import Arrow, FiniteGroupoid
from .lp_norms import (
    NormEstimate,
    PExponent,
    RepresentedAlgebra,
    core_of,
    p_operator_norm,
    represented_algebra,
)


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConvElement:
    """Finitely supported function on the arrows of ``groupoid``."""

    groupoid: FiniteGroupoid
    coeffs: Mapping[Arrow, Scalar]

    def __getitem__(self, g: Arrow) -> Scalar:
        return self.coeffs.get(g, ZERO)

    @property
    def support(self) -> frozenset:
        return frozenset(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def supported_on_units(self) -> bool:
        return all(self.groupoid.is_unit(g) for g in self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConvElement):
            return NotImplemented
        return self.groupoid is other.groupoid and dict(self.coeffs) == dict(other.coeffs)

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "ConvElement") -> "ConvElement":
        return add(self, other)

    def __sub__(self, other: "ConvElement") -> "ConvElement":
        return add(self, scale(other, -ONE))

    def __neg__(self) -> "ConvElement":
        return scale(self, -ONE)

    def __mul__(self, other: "ConvElement") -> "ConvElement":
        return convolve(self, other)

    def __repr__(self) -> str:
        return f"ConvElement({self.groupoid.name}, {dict(self.coeffs)!r})"


def element(G: FiniteGroupoid, coeffs: Mapping[Arrow, object]) -> ConvElement:
    """Build an element, converting scalars and rejecting foreign arrows."""
    out = {}
    for g, value in coeffs.items():
        if g not in G.arrow_index:
            raise InvalidInputError(f"{g!r} is not an arrow of {G.name or 'the groupoid'}")
        out[g] = to_scalar(value)
    return ConvElement(G, clean(out))


def zero(G: FiniteGroupoid) -> ConvElement:
    return ConvElement(G, {})


def delta(G: FiniteGroupoid, g: Arrow, coeff: object = 1) -> ConvElement:
    return element(G, {g: coeff})


def unit_indicator(G: FiniteGroupoid, units: Optional[List[Arrow]] = None) -> ConvElement:
    """Indicator of a set of units (all of them by default: the algebra unit)."""
    units = G.units if units is None else units
    for x in units:
        G.require_unit(x)
    return ConvElement(G, {x: ONE for x in units})


def _same_groupoid(f: ConvElement, g: ConvElement) -> None:
    if f.groupoid is not g.groupoid:
        raise InvalidInputError(
            f"groupoid mismatch: {f.groupoid.name or '?'} vs {g.groupoid.name or '?'}"
        )


def add(f: ConvElement, g: ConvElement) -> ConvElement:
    _same_groupoid(f, g)
    out = dict(f.coeffs)
    _axpy(out, ONE, g.coeffs)
    return ConvElement(f.groupoid, out)


def scale(f: ConvElement, c: object) -> ConvElement:
    c = to_scalar(c)
    return ConvElement(f.groupoid, clean({g: c * v for g, v in f.coeffs.items()}))


def involution(f: ConvElement) -> ConvElement:
    """``f*(g) = conj(f(g^-1))``; isometric only for p = 2."""
    G = f.groupoid
    return ConvElement(G, {G.inverse(g): conj(v) for g, v in f.coeffs.items()})


def convolve(f: ConvElement, g: ConvElement) -> ConvElement:
    """``(f*g)(gamma) = sum_{sigma in G dom(gamma)} f(gamma sigma^-1) g(sigma)``."""
    _same_groupoid(f, g)
    G = f.groupoid
    by_range: Dict[Arrow, List[Arrow]] = {}
    for s in g.coeffs:
        by_range.setdefault(G.ran(s), []).append(s)
    out: Dict[Arrow, Scalar] = {}
    for t, ft in f.coeffs.items():
        for s in by_range.get(G.dom(t), ()):
            key = G.compose(t, s)
            value = out.get(key, ZERO) + ft * g.coeffs[s]
            if is_zero(value):
                out.pop(key, None)
            else:
                out[key] = value
    return ConvElement(G, out)


def random_element(
    G: FiniteGroupoid,
    rng,
    *,
    bound: int = 3,
    density: float = 0.6,
    real: bool = False,
    units_only: bool = False,
) -> ConvElement:
    """Random Gaussian-integer coefficients on a random subset of arrows."""
    arrows = G.units if units_only else G.arrows
    coeffs = {}
    for g in arrows:
        if rng.random() >= density:
            continue
        x = int(rng.integers(-bound, bound + 1))
        y = 0 if real else int(rng.integers(-bound, bound + 1))
        coeffs[g] = QQ_I(x, y)
    return ConvElement(G, clean(coeffs))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def i_norm(f: ConvElement) -> float:
    """``max(sup_x sum_{Gx} |f|, sup_x sum_{xG} |f|)``."""
    G = f.groupoid
    out = 0.0
    for x in G.units:
        col = sum(scalar_abs(f[g]) for g in G.source_fibre(x))
        row = sum(scalar_abs(f[g]) for g in G.range_fibre(x))
        out = max(out, col, row)
    return out


def sup_norm(f: ConvElement) -> float:
    return max((scalar_abs(v) for v in f.coeffs.values()), default=0.0)


@dataclass(frozen=True)
class RegularRep:
    """``pi_x(f)`` on ``l^p(Gx)``; entry ``(gamma, sigma) = f(gamma sigma^-1)``."""

    unit: Arrow
    index: tuple
    matrix: ExactMatrix

    @cached_property
    def position(self) -> Dict[Arrow, int]:
        return {g: k for k, g in enumerate(self.index)}

    def entry(self, row: Arrow, col: Arrow) -> Scalar:
        return self.matrix[(self.position[row], self.position[col])]


def regular_representation(f: ConvElement, x: Arrow) -> RegularRep:
    """Matrix of left convolution by f on functions supported in ``Gx``."""
    G = f.groupoid
    G.require_unit(x)
    index = G.source_fibre(x)
    pos = {g: k for k, g in enumerate(index)}
    entries: Dict[tuple, Scalar] = {}
    for s in index:
        for t in G.source_fibre(G.ran(s)):
            value = f.coeffs.get(t)
            if value is not None:
                entries[(pos[G.compose(t, s)], pos[s])] = value
    return RegularRep(x, index, ExactMatrix(len(index), len(index), entries))


def check_multiplicativity(f: ConvElement, g: ConvElement) -> None:
    """``pi_x(f*g) = pi_x(f) pi_x(g)`` at every unit."""
    fg = convolve(f, g)
    for x in f.groupoid.units:
        lhs = regular_representation(fg, x).matrix
        rhs = regular_representation(f, x).matrix @ regular_representation(g, x).matrix
        if lhs != rhs:
            raise VerificationError("pi_x(f*g) = pi_x(f)pi_x(g)", f"unit {x!r}")


def lambda_norm(
    f: ConvElement,
    p: Union[PExponent, float, str],
    *,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
    tol: Optional[float] = None,
) -> NormEstimate:
    """``sup_x ||pi_x(f)||_p``; the sup over units is exact, each block carries an interval."""
    p = PExponent.parse(p)
    if f.is_zero():
        return NormEstimate(0.0, 0.0, "interpolation")
    options = (("seed", seed), ("restarts", restarts), ("tol", tol))
    kwargs = {k: v for k, v in options if v is not None}
    best: Optional[NormEstimate] = None
    lower = 0.0
    for x in f.groupoid.units:
        block = regular_representation(f, x).matrix
        if block.is_zero():
            continue
        est = p_operator_norm(block.to_numpy(), p, **kwargs)
        lower = max(lower, est.lower)
        if best is None or est.upper > best.upper:
            best = est
    if best is None:
        return NormEstimate(0.0, 0.0, "interpolation")
    return NormEstimate(lower, max(best.upper, lower), best.method)


# ---------------------------------------------------------------------------
# The injection j and the conditional expectation
# ---------------------------------------------------------------------------


def j_map(a: ConvElement) -> Dict[Arrow, Scalar]:
    """``j_a(gamma) = <pi_dom(gamma)(a) delta_dom(gamma), delta_gamma>``.

    At finite scale this reproduces the coefficients of a; a mismatch raises.
    """
    G = a.groupoid
    out: Dict[Arrow, Scalar] = {}
    for x in G.units:
        rep = regular_representation(a, x)
        col = rep.position[x]
        for g in rep.index:
            value = rep.matrix[(rep.position[g], col)]
            if not is_zero(value):
                out[g] = value
    if out != dict(a.coeffs):
        raise VerificationError("j_a reproduces the coefficients of a")
    return out


def check_jconv(a: ConvElement, b: ConvElement) -> None:
    """``j_{a*b}(gamma) = sum_sigma j_a(gamma sigma^-1) j_b(sigma)``."""
    G = a.groupoid
    ja, jb, jab = j_map(a), j_map(b), j_map(convolve(a, b))
    for g in G.arrows:
        total = ZERO
        for s in G.source_fibre(G.dom(g)):
            total += ja.get(G.compose(g, G.inverse(s)), ZERO) * jb.get(s, ZERO)
        if total != jab.get(g, ZERO):
            raise VerificationError("j_{a*b} = j_a * j_b", f"arrow {g!r}")


def check_move_delta(a: ConvElement) -> int:
    """``<pi_x(a) d_sigma, d_gamma> = <pi_ran(sigma)(a) d_ran(sigma), d_{gamma sigma^-1}>``.

    Returns the number of (sigma, gamma) pairs checked.
    """
    G = a.groupoid
    reps = {x: regular_representation(a, x) for x in G.units}
    checked = 0
    for x in G.units:
        rep = reps[x]
        for s in rep.index:
            r = G.ran(s)
            other = reps[r]
            for g in rep.index:
                lhs = rep.entry(g, s)
                rhs = other.entry(G.compose(g, G.inverse(s)), r)
                if lhs != rhs:
                    raise VerificationError("moving delta_sigma to the unit", repr((s, g)))
                checked += 1
    return checked


def left_map(a: ConvElement, x: Arrow) -> Dict[Arrow, Scalar]:
    """``l_x(a) = pi_x(a) delta_x`` as a function on ``Gx``; equals ``j_a`` there."""
    rep = regular_representation(a, x)
    col = rep.position[x]
    out = {g: rep.matrix[(rep.position[g], col)] for g in rep.index}
    ja = a.coeffs
    for g, value in out.items():
        if value != ja.get(g, ZERO):
            raise VerificationError("l_x(a)(gamma) = j_a(gamma)", f"arrow {g!r}")
    return clean(out)


def right_map(a: ConvElement, x: Arrow) -> Dict[Arrow, Scalar]:
    """``r_x(a) = pi_x(a)^T delta_x`` on ``Gx``; equals ``j_a(gamma^-1)``."""
    G = a.groupoid
    rep = regular_representation(a, x)
    row = rep.position[x]
    out = {g: rep.matrix[(row, rep.position[g])] for g in rep.index}
    for g, value in out.items():
        if value != a[G.inverse(g)]:
            raise VerificationError("r_x(a)(gamma) = j_a(gamma^-1)", f"arrow {g!r}")
    return clean(out)


def left_multiplier(g: Arrow, f: ConvElement) -> ConvElement:
    """``delta_g * f``: ``eta -> f(g^-1 eta)`` when ``ran eta = ran g``."""
    G = f.groupoid
    gi = G.inverse(g)
    out = {eta: f[G.compose(gi, eta)] for eta in G.range_fibre(G.ran(g))}
    result = ConvElement(G, clean(out))
    if result != convolve(delta(G, g), f):
        raise VerificationError("delta_g * f formula", f"arrow {g!r}")
    return result


def right_multiplier(f: ConvElement, g: Arrow) -> ConvElement:
    """``f * delta_g``: ``eta -> f(eta g^-1)`` when ``dom eta = dom g``."""
    G = f.groupoid
    gi = G.inverse(g)
    out = {eta: f[G.compose(eta, gi)] for eta in G.source_fibre(G.dom(g))}
    result = ConvElement(G, clean(out))
    if result != convolve(f, delta(G, g)):
        raise VerificationError("f * delta_g formula", f"arrow {g!r}")
    return result


def check_multiplier_contraction(
    g: Arrow,
    f: ConvElement,
    p: Union[PExponent, float, str],
    slack: float = 1e-9,
    **kwargs,
) -> Dict[str, NormEstimate]:
    """``||delta_g * f||_lambda`` and ``||f * delta_g||_lambda`` do not exceed ``||f||_lambda``.

    Compared through the certified intervals: the lower bound of each product
    may not pass the upper bound for f. ``kwargs`` go to ``lambda_norm``.
    """
    base = lambda_norm(f, p, **kwargs)
    left = lambda_norm(left_multiplier(g, f), p, **kwargs)
    right = lambda_norm(right_multiplier(f, g), p, **kwargs)
    for side, est in (("delta_g * f", left), ("f * delta_g", right)):
        if est.lower > base.upper + slack:
            detail = f"arrow {g!r}: {est} above {base}"
            raise VerificationError(f"||{side}||_lambda <= ||f||_lambda", detail)
    return {"f": base, "left": left, "right": right}


def conditional_expectation(a: ConvElement) -> ConvElement:
    """Restriction of ``j_a`` to the units."""
    G = a.groupoid
    ja = j_map(a)
    return ConvElement(G, {g: v for g, v in ja.items() if G.is_unit(g)})


def check_conditional_expectation(a: ConvElement, f: ConvElement, g: ConvElement) -> None:
    """``E(f a g) = f E(a) g`` and ``E(f) = f`` for unit-supported f, g."""
    if not (f.supported_on_units() and g.supported_on_units()):
        raise InvalidInputError("f and g must be supported on units")
    if conditional_expectation(f) != f or conditional_expectation(g) != g:
        raise VerificationError("E(f) = f on C(G^(0))")
    lhs = conditional_expectation(convolve(convolve(f, a), g))
    rhs = convolve(convolve(f, conditional_expectation(a)), g)
    if lhs != rhs:
        raise VerificationError("E(fag) = fE(a)g")
    e = conditional_expectation(a)
    if conditional_expectation(e) != e:
        raise VerificationError("E is idempotent")


# ---------------------------------------------------------------------------
# Faithful representation and core
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FaithfulRep:
    """``⊕_x pi_x`` as a represented algebra with coordinates back to ``C_c(G)``."""

    groupoid: FiniteGroupoid
    algebra: RepresentedAlgebra

    def matrix(self, f: ConvElement) -> ExactMatrix:
        return block_diag([regular_representation(f, x).matrix for x in self.groupoid.units])

    def element(self, M: ExactMatrix) -> ConvElement:
        coords = self.algebra.coordinates(M)
        if coords is None:
            raise InvalidInputError("matrix is not in the image of the regular representation")
        G = self.groupoid
        return ConvElement(G, clean(dict(zip(G.arrows, coords))))


def faithful_representation(G: FiniteGroupoid, verify: Optional[bool] = None) -> FaithfulRep:
    blocks = [
        block_diag([regular_representation(delta(G, g), x).matrix for x in G.units])
        for g in G.arrows
    ]
    if verify is None:
        verify = len(G.arrows) <= 16
    algebra = represented_algebra(blocks, unital=True, name=f"F_lambda({G.name})", verify=verify)
    if algebra.span.rank != len(G.arrows):
        raise VerificationError("regular representation is faithful", G.name)
    return FaithfulRep(G, algebra)


def core_of_groupoid_algebra(
    G: FiniteGroupoid, p: Union[PExponent, float, str]
) -> RepresentedAlgebra:
    """The C*-core of ``F^p_lambda(G)``, checked equal to the span of unit indicators."""
    p = PExponent.parse(p)
    p.require_not_two("core_of_groupoid_algebra")
    rep = faithful_representation(G)
    core = core_of(rep.algebra, p)
    expected = [rep.matrix(unit_indicator(G, [x])) for x in G.units]
    if not same_span(core.basis, expected):
        raise VerificationError(
            "core(F^p_lambda(G)) = C(G^(0))", f"{G.name}: core dimension {core.dimension}"
        )
    return core
