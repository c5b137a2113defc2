"""Reduced crossed products of finite groups acting on represented algebras.

The crossed product is realised inside the regular covariant representation
on ``l^p(G x {0..m-1})`` induced by the algebra's own representation. Norms
computed here are norms in that one representation and are tagged
``regular-rep``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Hashable, List, Mapping, Tuple, Union

from .errors import InvalidInputError, VerificationError
from .exact import ONE, ExactMatrix, block_diag, kron, linear_combination, same_span, to_scalar
from .catalog import direct_product
from .groupoid import FiniteGroup, GroupAction, transformation_groupoid
from .groupoid_algebra import ConvElement, convolve, delta, lambda_norm, random_element
from .lp_norms import (
    NormEstimate,
    PExponent,
    RepresentedAlgebra,
    core_of,
    diagonal_algebra,
    is_lamperti_isometry,
    p_operator_norm,
    represented_algebra,
    tensor_algebra,
)
from .utils import log

REPRESENTATION_TAG = "regular-rep"

# ---------------------------------------------------------------------------
# Actions by isometric automorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IsometricAlgebraAction:
    """``alpha_g = Ad(u_g)`` with each ``u_g`` a Lamperti isometry."""

    group: FiniteGroup
    algebra: RepresentedAlgebra
    implementers: Mapping[Hashable, ExactMatrix]
    name: str = ""

    @property
    def m(self) -> int:
        return self.algebra.n

    def alpha(self, g: Hashable, a: ExactMatrix) -> ExactMatrix:
        u = self.implementers[g]
        return u @ a @ u.conjugate_transpose()


def isometric_action(
    group: FiniteGroup,
    algebra: RepresentedAlgebra,
    implementers: Mapping[Hashable, ExactMatrix],
    p: Union[PExponent, float, str],
    name: str = "",
) -> IsometricAlgebraAction:
    """Validate implementers and the induced action on the algebra's span."""
    p = PExponent.parse(p)
    m = algebra.n
    identity = ExactMatrix.identity(m)
    for g in group.elements:
        u = implementers.get(g)
        if u is None or u.shape != (m, m):
            raise InvalidInputError(f"action {name}: missing or mis-sized implementer for {g!r}")
        if p.is_two:
            if u @ u.conjugate_transpose() != identity:
                raise InvalidInputError(f"action {name}: implementer of {g!r} is not unitary")
        elif not is_lamperti_isometry(u, p):
            raise InvalidInputError(
                f"action {name}: implementer of {g!r} is not a Lamperti isometry"
            )
    action = IsometricAlgebraAction(group, algebra, dict(implementers), name)
    for g in group.elements:
        for k, b in enumerate(algebra.basis):
            if not algebra.contains(action.alpha(g, b)):
                raise InvalidInputError(
                    f"action {name}: alpha_{g!r} moves basis[{k}] outside the algebra"
                )
    for k, b in enumerate(algebra.basis):
        if action.alpha(group.identity, b) != b:
            raise InvalidInputError(f"action {name}: alpha_e is not the identity on basis[{k}]")
        for g in group.elements:
            for h in group.elements:
                if action.alpha(group.mul(g, h), b) != action.alpha(g, action.alpha(h, b)):
                    raise InvalidInputError(
                        f"action {name}: alpha_{g!r}{h!r} != alpha_{g!r} alpha_{h!r} on basis[{k}]"
                    )
    return action


def trivial_algebra_action(
    group: FiniteGroup, algebra: RepresentedAlgebra, p
) -> IsometricAlgebraAction:
    identity = ExactMatrix.identity(algebra.n)
    implementers = {g: identity for g in group.elements}
    return isometric_action(group, algebra, implementers, p, f"{group.name}-trivial")


def action_from_group_action(
    action: GroupAction, p: Union[PExponent, float, str] = 3
) -> IsometricAlgebraAction:
    """``G`` acting on ``C(X)`` (diagonal matrices) by ``f -> f ∘ sigma_g^-1``."""
    position = {x: k for k, x in enumerate(action.space)}
    implementers = {
        g: ExactMatrix.permutation([position[action.apply(g, x)] for x in action.space])
        for g in action.group.elements
    }
    return isometric_action(
        action.group, diagonal_algebra(len(action.space)), implementers, p, name=f"C({action.name})"
    )


# ---------------------------------------------------------------------------
# Regular covariant representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossedElement:
    """Formal sum ``sum_g a_g u_g`` with ``a_g`` in the algebra."""

    coeffs: Mapping[Hashable, ExactMatrix]


@dataclass(frozen=True, eq=False)
class CovariantRepresentation:
    """``(pi, v)`` on ``l^p(G x {0..m-1})``; index ``(h, i) -> idx(h) m + i``."""

    action: IsometricAlgebraAction
    p: PExponent

    @cached_property
    def group_index(self) -> Dict[Hashable, int]:
        return {g: k for k, g in enumerate(self.action.group.elements)}

    @property
    def dim(self) -> int:
        return self.action.group.order * self.action.m

    @cached_property
    def v(self) -> Dict[Hashable, ExactMatrix]:
        """``v_g delta_(h, i) = delta_(gh, i)``."""
        G, m, idx = self.action.group, self.action.m, self.group_index
        out = {}
        for g in G.elements:
            entries = {
                (idx[G.mul(g, h)] * m + i, idx[h] * m + i): ONE
                for h in G.elements
                for i in range(m)
            }
            out[g] = ExactMatrix(self.dim, self.dim, entries)
        return out

    def pi(self, a: ExactMatrix) -> ExactMatrix:
        """Block ``h`` of ``pi(a)`` is ``alpha_{h^-1}(a)``."""
        G = self.action.group
        return block_diag([self.action.alpha(G.inv(h), a) for h in G.elements])

    def image(self, x: CrossedElement) -> ExactMatrix:
        """``(pi ⋊ v)(sum a_g u_g) = sum pi(a_g) v_g``."""
        out = ExactMatrix.zeros(self.dim)
        for g, a in x.coeffs.items():
            out = out + self.pi(a) @ self.v[g]
        return out

    def expectation(self, X: ExactMatrix) -> ExactMatrix:
        """``F(X) = (X(delta_e ⊗ xi))(e)``: the ``(e, e)`` block."""
        m = self.action.m
        k = self.group_index[self.action.group.identity]
        return X.submatrix(k * m, k * m, m, m)

    def check_covariance(self) -> None:
        """``v_g pi(a) v_g^-1 = pi(alpha_g(a))`` and ``v`` is a homomorphism."""
        G = self.action.group
        for g in G.elements:
            vg, vg_inv = self.v[g], self.v[G.inv(g)]
            for h in G.elements:
                if self.v[G.mul(g, h)] != vg @ self.v[h]:
                    raise VerificationError("v_gh = v_g v_h", repr((g, h)))
            for k, b in enumerate(self.action.algebra.basis):
                if vg @ self.pi(b) @ vg_inv != self.pi(self.action.alpha(g, b)):
                    raise VerificationError("u_g a u_g^-1 = alpha_g(a)", f"g={g!r}, basis[{k}]")

    def check_multiplicativity(self) -> None:
        basis = self.action.algebra.basis
        for i, a in enumerate(basis):
            for j, b in enumerate(basis):
                if self.pi(a @ b) != self.pi(a) @ self.pi(b):
                    raise VerificationError("pi(ab) = pi(a)pi(b)", f"basis[{i}], basis[{j}]")


def regular_covariant_representation(
    action: IsometricAlgebraAction, p: Union[PExponent, float, str]
) -> CovariantRepresentation:
    rep = CovariantRepresentation(action, PExponent.parse(p))
    rep.check_multiplicativity()
    rep.check_covariance()
    return rep


# ---------------------------------------------------------------------------
# The crossed-product algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CrossedProduct:
    """Span of ``pi(b_k) v_g`` with basis index ``(g, k)`` in group-major order."""

    rep: CovariantRepresentation
    algebra: RepresentedAlgebra
    labels: Tuple[Tuple[Hashable, int], ...]

    @property
    def action(self) -> IsometricAlgebraAction:
        return self.rep.action

    def norm(self, X: ExactMatrix, **kwargs) -> Tuple[NormEstimate, str]:
        """Norm of X in the induced regular representation, with its tag."""
        return p_operator_norm(X.to_numpy(), self.rep.p, **kwargs), REPRESENTATION_TAG


def crossed_product_algebra(
    action: IsometricAlgebraAction, p: Union[PExponent, float, str]
) -> CrossedProduct:
    rep = regular_covariant_representation(action, p)
    labels = []
    basis = []
    for g in action.group.elements:
        for k, b in enumerate(action.algebra.basis):
            labels.append((g, k))
            basis.append(rep.pi(b) @ rep.v[g])
    algebra = represented_algebra(
        basis,
        unital=action.algebra.unital,
        name=f"F^p({action.group.name},{action.algebra.name})",
        verify=True,
    )
    return CrossedProduct(rep, algebra, tuple(labels))


def crossed_coefficients(cp: CrossedProduct, X: ExactMatrix) -> CrossedElement:
    """``a_g = F(X v_g^-1)``, confirmed by reassembling X."""
    if not cp.algebra.contains(X):
        raise InvalidInputError("element is outside the crossed-product span")
    G = cp.action.group
    coeffs = {}
    for g in G.elements:
        a = cp.rep.expectation(X @ cp.rep.v[G.inv(g)])
        if not cp.action.algebra.contains(a):
            raise VerificationError("coefficient a_g lies in A", repr(g))
        if not a.is_zero():
            coeffs[g] = a
    x = CrossedElement(coeffs)
    if cp.rep.image(x) != X:
        raise VerificationError("X = sum pi(a_g) v_g from its extracted coefficients")
    return x


def crossed_conditional_expectation(cp: CrossedProduct, X: ExactMatrix) -> ExactMatrix:
    """``F(X)``, checked against ``E(sum a_g u_g) = a_e`` from basis coordinates."""
    coords = cp.algebra.coordinates(X)
    if coords is None:
        raise InvalidInputError("element is outside the crossed-product span")
    e = cp.action.group.identity
    basis = cp.action.algebra.basis
    a_e = ExactMatrix.zeros(cp.action.m)
    for c, (g, k) in zip(coords, cp.labels):
        if g == e:
            a_e = a_e + basis[k].scale(c)
    F = cp.rep.expectation(X)
    if F != a_e:
        raise VerificationError("F ∘ (pi ⋊ v) = pi_0 ∘ E")
    return F


def check_expectation_bimodule(
    cp: CrossedProduct, X: ExactMatrix, a: ExactMatrix, b: ExactMatrix
) -> None:
    """``E(pi(a) X pi(b)) = a E(X) b`` for a, b in A."""
    algebra = cp.action.algebra
    if not (algebra.contains(a) and algebra.contains(b)):
        raise InvalidInputError("a and b must lie in the coefficient algebra")
    lhs = crossed_conditional_expectation(cp, cp.rep.pi(a) @ X @ cp.rep.pi(b))
    if lhs != a @ crossed_conditional_expectation(cp, X) @ b:
        raise VerificationError("E(a x b) = a E(x) b")


def check_expectation_faithful(cp: CrossedProduct, X: ExactMatrix) -> bool:
    """``E(x* x) = 0`` exactly when the extracted coefficients of x all vanish.

    Returns whether x is zero.
    """
    vanishes = cp.rep.expectation(X.conjugate_transpose() @ X).is_zero()
    x = crossed_coefficients(cp, X)
    if vanishes != (not x.coeffs):
        detail = f"E(x* x) {'=' if vanishes else '!='} 0 with {len(x.coeffs)} nonzero a_g"
        raise VerificationError("E is faithful", detail)
    return vanishes


def _random_combination(rng, mats: Tuple[ExactMatrix, ...]) -> ExactMatrix:
    return linear_combination([to_scalar(int(rng.integers(-2, 3))) for _ in mats], list(mats))


def check_crossed_expectation(cp: CrossedProduct, rng, samples: int = 5) -> int:
    """Bimodule and faithfulness checks of E on random elements and on zero."""
    basis, coefficient_basis = cp.algebra.basis, cp.action.algebra.basis
    if not check_expectation_faithful(cp, ExactMatrix.zeros(cp.rep.dim)):
        raise VerificationError("E(0) = 0 recovers x = 0")
    for _ in range(samples):
        X = _random_combination(rng, basis)
        a = _random_combination(rng, coefficient_basis)
        b = _random_combination(rng, coefficient_basis)
        crossed_conditional_expectation(cp, X)
        check_expectation_bimodule(cp, X, a, b)
        check_expectation_faithful(cp, X)
    return samples


@dataclass(frozen=True)
class CoreTheoremReport:
    crossed_core_dimension: int
    algebra_core_dimension: int
    expectation_checks: int

    def to_dict(self) -> dict:
        return {
            "crossed_core_dimension": self.crossed_core_dimension,
            "algebra_core_dimension": self.algebra_core_dimension,
            "expectation_checks": self.expectation_checks,
        }


def verify_core_theorem(
    action: IsometricAlgebraAction, p: Union[PExponent, float, str]
) -> CoreTheoremReport:
    """core of the crossed product equals ``pi(core(A))``, and ``E(x u_g) = 0`` on it."""
    p = PExponent.parse(p)
    p.require_not_two("verify_core_theorem")
    cp = crossed_product_algebra(action, p)
    core_cp = core_of(cp.algebra, p)
    core_a = core_of(action.algebra, p)
    embedded = [cp.rep.pi(c) for c in core_a.basis]
    if not same_span(core_cp.basis, embedded):
        raise VerificationError(
            "core(F^p(G, A)) = core(A)",
            f"dimensions {core_cp.dimension} vs {core_a.dimension}",
        )
    G = action.group
    checks = 0
    for c in core_cp.basis:
        for g in G.elements:
            if g == G.identity:
                continue
            if not cp.rep.expectation(c @ cp.rep.v[g]).is_zero():
                raise VerificationError("E(x u_g) = 0 for x in the core, g != e", repr(g))
            checks += 1
    log(f"  core({cp.algebra.name}) has dimension {core_cp.dimension} = dim core(A)")
    return CoreTheoremReport(core_cp.dimension, core_a.dimension, checks)


# ---------------------------------------------------------------------------
# Comparison with the transformation groupoid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupoidComparison:
    basis_products: int
    samples: int
    intervals: Tuple[Tuple[NormEstimate, NormEstimate], ...]

    def to_dict(self) -> dict:
        return {
            "basis_products": self.basis_products,
            "samples": self.samples,
            "intervals": [
                {
                    "groupoid": a.to_dict(),
                    "crossed": b.to_dict(),
                    "representation": REPRESENTATION_TAG,
                }
                for a, b in self.intervals
            ],
        }


def compare_with_transformation_groupoid(
    action: GroupAction,
    p: Union[PExponent, float, str],
    rng=None,
    samples: int = 5,
    slack: float = 1e-9,
) -> GroupoidComparison:
    """Match ``1_y u_g`` with ``delta_(g, sigma_g^-1 y)`` and compare products and norms."""
    p = PExponent.parse(p)
    iso = action_from_group_action(action, p)
    cp = crossed_product_algebra(iso, p)
    G = transformation_groupoid(action)
    position = {x: k for k, x in enumerate(action.space)}
    m = len(action.space)
    images = {}
    for (g, x) in G.arrows:
        y = action.apply(g, x)
        images[(g, x)] = cp.rep.pi(ExactMatrix.unit(m, position[y], position[y])) @ cp.rep.v[g]

    def phi(f: ConvElement) -> ExactMatrix:
        return linear_combination([f[a] for a in G.arrows], [images[a] for a in G.arrows])

    products = 0
    for a in G.arrows:
        for b in G.arrows:
            lhs = phi(convolve(delta(G, a), delta(G, b)))
            if lhs != images[a] @ images[b]:
                raise VerificationError("coefficient bijection is multiplicative", repr((a, b)))
            products += 1
    if not same_span(list(images.values()), list(cp.algebra.basis)):
        raise VerificationError("coefficient bijection is onto the crossed product")

    intervals: List[Tuple[NormEstimate, NormEstimate]] = []
    if rng is not None:
        for _ in range(samples):
            f = random_element(G, rng)
            if f.is_zero():
                continue
            left = lambda_norm(f, p)
            right = p_operator_norm(phi(f).to_numpy(), p)
            if not left.overlaps(right, slack):
                raise VerificationError("lambda-norm intervals overlap", f"{left} vs {right}")
            intervals.append((left, right))
    return GroupoidComparison(products, len(intervals), tuple(intervals))


# ---------------------------------------------------------------------------
# Tensor products of crossed products
# ---------------------------------------------------------------------------


def product_action(
    first: IsometricAlgebraAction, second: IsometricAlgebraAction, p: Union[PExponent, float, str]
) -> IsometricAlgebraAction:
    """``G x H`` acting on ``A ⊗ B`` by ``Ad(u_g ⊗ v_h)``."""
    group = direct_product(first.group, second.group)
    implementers = {
        (g, h): kron(first.implementers[g], second.implementers[h]) for (g, h) in group.elements
    }
    algebra = tensor_algebra(first.algebra, second.algebra)
    return isometric_action(group, algebra, implementers, p, f"{first.name}⊗{second.name}")


def verify_tensor_compatibility(
    first: IsometricAlgebraAction, second: IsometricAlgebraAction, p: Union[PExponent, float, str]
) -> int:
    """``(a u_g) ⊗ (b v_h) -> (a ⊗ b) w_(g,h)`` is a multiplicative coefficient bijection.

    Checked exactly on all products of basis tensors; returns how many.
    """
    p = PExponent.parse(p)
    cp1 = crossed_product_algebra(first, p)
    cp2 = crossed_product_algebra(second, p)
    joint = product_action(first, second, p)
    cp12 = crossed_product_algebra(joint, p)
    rep12 = cp12.rep
    m2 = second.algebra.dimension

    image: Dict[Tuple[int, int], ExactMatrix] = {}
    for i, (g, k) in enumerate(cp1.labels):
        for j, (h, l) in enumerate(cp2.labels):
            ab = joint.algebra.basis[k * m2 + l]
            image[(i, j)] = rep12.pi(ab) @ rep12.v[(g, h)]
    if not same_span(list(image.values()), list(cp12.algebra.basis)):
        raise VerificationError("tensor map is onto the product crossed product")

    def psi(P: ExactMatrix, Q: ExactMatrix) -> ExactMatrix:
        c = cp1.algebra.coordinates(P)
        d = cp2.algebra.coordinates(Q)
        if c is None or d is None:
            raise VerificationError("products stay in the crossed products")
        coeffs, mats = [], []
        for i, ci in enumerate(c):
            for j, dj in enumerate(d):
                coeffs.append(ci * dj)
                mats.append(image[(i, j)])
        return linear_combination(coeffs, mats)

    checked = 0
    B1, B2 = cp1.algebra.basis, cp2.algebra.basis
    for i1, P1 in enumerate(B1):
        for j1, Q1 in enumerate(B2):
            for i2, P2 in enumerate(B1):
                for j2, Q2 in enumerate(B2):
                    if psi(P1 @ P2, Q1 @ Q2) != image[(i1, j1)] @ image[(i2, j2)]:
                        raise VerificationError(
                            "tensor map is multiplicative", repr(((i1, j1), (i2, j2)))
                        )
                    checked += 1
    return checked
