"""l^p operator norms, Lamperti isometries, hermitian elements and C*-cores.

Everything algebraic is exact (``exact.ExactMatrix`` over ``QQ_I``); floats
appear only inside norm estimation, which always reports an interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm
from sympy.polys.domains import QQ, QQ_I

from .config import (
    DEFAULT_SEED,
    HERMITIAN_GRID,
    HERMITIAN_TAU,
    MAX_BASIS_STARTS,
    POWER_ITERATION_MAX_STEPS,
    POWER_ITERATION_RESTARTS,
    POWER_ITERATION_TOL,
)
from .errors import InvalidInputError, VerificationError
from .exact import (
    ONE,
    ExactMatrix,
    Scalar,
    Span,
    is_unimodular,
    kron,
    linear_combination,
    matrix_span,
    parse_rational,
    rational_nullspace,
    rational_to_float,
    to_scalar,
    unimodular_from_slope,
)
from .utils import fmt_float

MatrixLike = Union[ExactMatrix, np.ndarray, Sequence[Sequence[complex]]]

# ---------------------------------------------------------------------------
# Exponents and estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PExponent:
    """A finite exponent p >= 1 with its Hoelder dual."""

    p: float
    label: str = ""

    def __post_init__(self) -> None:
        if not math.isfinite(self.p) or self.p < 1:
            raise InvalidInputError(f"p must be a finite real >= 1, got {self.p!r}")
        if not self.label:
            object.__setattr__(self, "label", fmt_float(self.p))

    @classmethod
    def parse(cls, value: Union["PExponent", int, float, str]) -> "PExponent":
        if isinstance(value, PExponent):
            return value
        if isinstance(value, str):
            q = parse_rational(value)
            return cls(rational_to_float(q), value.replace(" ", ""))
        return cls(float(value), str(value))

    @property
    def is_one(self) -> bool:
        return self.p == 1.0

    @property
    def is_two(self) -> bool:
        return self.p == 2.0

    @property
    def dual(self) -> float:
        return math.inf if self.is_one else self.p / (self.p - 1.0)

    def require_not_two(self, what: str) -> None:
        if self.is_two:
            raise InvalidInputError(
                f"{what} requires p != 2 (the Lamperti form and the commutative core "
                "are specific to p != 2)"
            )

    def __str__(self) -> str:
        return self.label


NORM_METHODS = ("exact-p1", "exact-p2", "power-iteration", "interpolation", "nonneg-exact")


@dataclass(frozen=True)
class NormEstimate:
    """Certified interval ``[lower, upper]`` for an operator norm."""

    lower: float
    upper: float
    method: str

    def __post_init__(self) -> None:
        if self.method not in NORM_METHODS:
            raise InvalidInputError(f"unknown norm method {self.method!r}")
        if self.lower > self.upper:
            raise InvalidInputError(f"inverted interval [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def overlaps(self, other: "NormEstimate", slack: float = 0.0) -> bool:
        return self.lower <= other.upper + slack and other.lower <= self.upper + slack

    def to_dict(self) -> dict:
        return {
            "lower": fmt_float(self.lower),
            "upper": fmt_float(self.upper),
            "method": self.method,
        }

    def __str__(self) -> str:
        return f"[{fmt_float(self.lower)}, {fmt_float(self.upper)}] ({self.method})"


def _as_array(M: MatrixLike) -> np.ndarray:
    if isinstance(M, ExactMatrix):
        return M.to_numpy()
    return np.asarray(M, dtype=complex)


# ---------------------------------------------------------------------------
# Norm estimation
# ---------------------------------------------------------------------------


def _dual_vector(v: np.ndarray, r: float) -> np.ndarray:
    """Unit vector in l^{r'} norming ``v`` in l^r."""
    a = np.abs(v)
    norm = np.linalg.norm(v, ord=r)
    if norm == 0:
        return np.zeros_like(v)
    phase = np.divide(v, a, out=np.zeros_like(v), where=a > 0)
    return phase * (a / norm) ** (r - 1.0)


def _power_iteration(
    M: np.ndarray, x0: np.ndarray, p: float, q: float, tol: float, max_steps: int
) -> float:
    """Boyd/Higham dual-vector iteration; returns the best ``||Mx||_p`` seen."""
    norm0 = np.linalg.norm(x0, ord=p)
    if norm0 == 0:
        return 0.0
    x = x0 / norm0
    adjoint = M.conj().T
    best = 0.0
    previous = -1.0
    for _ in range(max_steps):
        y = M @ x
        value = float(np.linalg.norm(y, ord=p))
        best = max(best, value)
        if value == 0 or value - previous <= tol * value:
            break
        previous = value
        z = adjoint @ _dual_vector(y, p)
        if np.linalg.norm(z, ord=q) <= float(np.real(np.vdot(x, z))) * (1 + tol):
            break
        x = _dual_vector(z, q)
    return best


def _starts(n: int, rng: np.random.Generator, restarts: int, positive: bool) -> List[np.ndarray]:
    """Deterministic start list: ones, basis vectors, then seeded random vectors."""
    starts = [np.ones(n, dtype=complex)]
    if n <= MAX_BASIS_STARTS:
        for j in range(n):
            e = np.zeros(n, dtype=complex)
            e[j] = 1.0
            starts.append(e)
    for _ in range(restarts):
        re = rng.standard_normal(n)
        im = rng.standard_normal(n)
        starts.append(np.abs(re) + 0j if positive else re + 1j * im)
    return starts


def riesz_thorin_bound(M: MatrixLike, p: Union[PExponent, float, str]) -> float:
    """``||M||_1^{1/p} ||M||_inf^{1-1/p}``."""
    p = PExponent.parse(p)
    A = np.abs(_as_array(M))
    col = float(A.sum(axis=0).max())
    row = float(A.sum(axis=1).max())
    return col ** (1.0 / p.p) * row ** (1.0 - 1.0 / p.p)


def p_operator_norm(
    M: MatrixLike,
    p: Union[PExponent, float, str],
    *,
    seed: int = DEFAULT_SEED,
    restarts: int = POWER_ITERATION_RESTARTS,
    tol: float = POWER_ITERATION_TOL,
    max_steps: int = POWER_ITERATION_MAX_STEPS,
) -> NormEstimate:
    """Certified interval for ``||M||_{l^p -> l^p}``."""
    p = PExponent.parse(p)
    A = _as_array(M)
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError("empty or non-2D matrix")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")

    if p.is_one:
        value = float(np.abs(A).sum(axis=0).max())
        return NormEstimate(value, value, "exact-p1")
    if p.is_two:
        value = float(np.linalg.norm(A, 2))
        return NormEstimate(value, value, "exact-p2")

    upper = riesz_thorin_bound(A, p)
    if upper == 0.0:
        return NormEstimate(0.0, 0.0, "interpolation")

    nonneg = bool(np.all(A.imag == 0) and np.all(A.real >= 0))
    rng = np.random.default_rng(seed)
    lower = 0.0
    for x0 in _starts(A.shape[1], rng, restarts, positive=nonneg):
        lower = max(lower, _power_iteration(A, x0, p.p, p.dual, tol, max_steps))

    # Bound attained (monomial matrices, J_n): the interval collapses.
    if lower >= upper * (1.0 - 1e-12):
        return NormEstimate(upper, upper, "interpolation")
    if nonneg:
        return NormEstimate(lower, min(upper, lower * (1.0 + 10.0 * tol)), "nonneg-exact")
    return NormEstimate(lower, upper, "power-iteration")


# ---------------------------------------------------------------------------
# Lamperti isometries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LampertiFactorization:
    """``M = D P`` with ``D = diag(diagonal)`` and ``P e_j = e_{permutation[j]}``."""

    diagonal: Tuple[Scalar, ...]
    permutation: Tuple[int, ...]

    def recompose(self) -> ExactMatrix:
        return ExactMatrix.diagonal(self.diagonal) @ ExactMatrix.permutation(self.permutation)


def _monomial_pattern(M: ExactMatrix) -> Optional[Tuple[int, ...]]:
    """Row index of the single nonzero in each column, if M is a monomial matrix."""
    if not M.is_square():
        return None
    cols = M.column_support()
    rows = M.row_support()
    n = M.rows
    if len(cols) != n or len(rows) != n:
        return None
    if any(len(v) != 1 for v in cols.values()) or any(len(v) != 1 for v in rows.values()):
        return None
    return tuple(cols[j][0] for j in range(n))


def _float_monomial_pattern(A: np.ndarray, tol: float) -> Optional[Tuple[int, ...]]:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return None
    mask = np.abs(A) > tol
    if not (np.all(mask.sum(axis=0) == 1) and np.all(mask.sum(axis=1) == 1)):
        return None
    return tuple(int(np.argmax(mask[:, j])) for j in range(A.shape[1]))


def is_lamperti_isometry(
    M: MatrixLike, p: Union[PExponent, float, str], tol: float = 1e-12
) -> bool:
    """True iff M is (unimodular diagonal) x (permutation)."""
    p = PExponent.parse(p)
    p.require_not_two("Lamperti form")
    if isinstance(M, ExactMatrix):
        perm = _monomial_pattern(M)
        return perm is not None and all(is_unimodular(v) for v in M.entries.values())
    A = _as_array(M)
    perm = _float_monomial_pattern(A, tol)
    if perm is None:
        return False
    return all(abs(abs(A[perm[j], j]) - 1.0) <= tol for j in range(A.shape[1]))


def lamperti_decompose(M: ExactMatrix, p: Union[PExponent, float, str]) -> LampertiFactorization:
    """Unique (D, P) with M = D P; the round trip is checked exactly."""
    p = PExponent.parse(p)
    if not is_lamperti_isometry(M, p):
        raise InvalidInputError(
            "matrix is not of Lamperti form (unimodular diagonal x permutation)"
        )
    perm = _monomial_pattern(M)
    inverse = {row: col for col, row in enumerate(perm)}
    diagonal = tuple(M[(i, inverse[i])] for i in range(M.rows))
    fact = LampertiFactorization(diagonal, perm)
    if fact.recompose() != M:
        raise VerificationError("Lamperti recomposition", "D P differs from the input")
    return fact


def random_lamperti(n: int, rng) -> LampertiFactorization:
    """Exact unimodular diagonal (rational points of the circle) and a random permutation."""
    perm = tuple(int(k) for k in rng.permutation(n))
    diagonal = tuple(
        unimodular_from_slope(
            QQ(int(rng.integers(-5, 6)), int(rng.integers(1, 6))),
            1 if rng.random() < 0.5 else -1,
        )
        for _ in range(n)
    )
    return LampertiFactorization(diagonal, perm)


def random_non_lamperti(n: int, rng) -> ExactMatrix:
    """A Lamperti matrix with one entry broken: rescaled, or an extra nonzero."""
    M = random_lamperti(n, rng).recompose()
    i, j = int(rng.integers(n)), int(rng.integers(n))
    entries = dict(M.entries)
    if (i, j) in entries:
        entries[(i, j)] = entries[(i, j)] * QQ_I(2, 0)
    else:
        entries[(i, j)] = ONE
    return ExactMatrix(n, n, entries)


# ---------------------------------------------------------------------------
# Represented algebras
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RepresentedAlgebra:
    """Span of exact n x n matrices closed under multiplication."""

    n: int
    basis: Tuple[ExactMatrix, ...]
    unital: bool = True
    name: str = ""

    @cached_property
    def span(self) -> Span:
        return matrix_span(self.basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def element(self, coeffs: Sequence) -> ExactMatrix:
        return linear_combination([to_scalar(c) for c in coeffs], self.basis)

    def coordinates(self, a: ExactMatrix) -> Optional[List[Scalar]]:
        if a.shape != (self.n, self.n):
            return None
        coords = self.span.coordinates(a.entries)
        if coords is None:
            return None
        return [coords.get(k, QQ_I(0, 0)) for k in range(self.dimension)]

    def contains(self, a: ExactMatrix) -> bool:
        return a.shape == (self.n, self.n) and self.span.contains(a.entries)

    def is_commutative(self) -> bool:
        return all(
            self.basis[i].commutes_with(self.basis[j])
            for i in range(self.dimension)
            for j in range(i + 1, self.dimension)
        )

    def random_element(self, rng, bound: int = 3, real: bool = False) -> ExactMatrix:
        """Gaussian-integer (or integer) combination of the basis."""
        coeffs = []
        for _ in range(self.dimension):
            x = int(rng.integers(-bound, bound + 1))
            y = 0 if real else int(rng.integers(-bound, bound + 1))
            coeffs.append(QQ_I(x, y))
        return linear_combination(coeffs, self.basis)


def represented_algebra(
    basis: Sequence[ExactMatrix],
    unital: bool = True,
    name: str = "",
    verify: bool = True,
) -> RepresentedAlgebra:
    """Validate a basis: square, independent, closed under products, unital if flagged."""
    basis = tuple(basis)
    if not basis:
        raise InvalidInputError("an algebra needs a nonempty basis")
    n = basis[0].rows
    for k, b in enumerate(basis):
        if b.shape != (n, n):
            raise InvalidInputError(f"basis[{k}] has shape {b.shape}, expected ({n}, {n})")
    alg = RepresentedAlgebra(n, basis, unital, name)
    if not verify:
        return alg
    if alg.span.dependent:
        raise InvalidInputError(f"basis is linearly dependent (element {alg.span.dependent[0]})")
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            if not alg.span.contains((a @ b).entries):
                raise InvalidInputError(
                    f"span not closed under multiplication: basis[{i}]*basis[{j}]"
                )
    if unital and not alg.span.contains(ExactMatrix.identity(n).entries):
        raise InvalidInputError("algebra flagged unital does not contain the identity")
    return alg


def full_matrix_algebra(n: int) -> RepresentedAlgebra:
    basis = [ExactMatrix.unit(n, i, j) for i in range(n) for j in range(n)]
    return represented_algebra(basis, name=f"M_{n}", verify=False)


def diagonal_algebra(n: int) -> RepresentedAlgebra:
    basis = [ExactMatrix.unit(n, i, i) for i in range(n)]
    return represented_algebra(basis, name=f"D_{n}", verify=False)


def upper_triangular_algebra(n: int) -> RepresentedAlgebra:
    basis = [ExactMatrix.unit(n, i, j) for i in range(n) for j in range(i, n)]
    return represented_algebra(basis, name=f"T_{n}", verify=False)


def scalar_algebra(n: int) -> RepresentedAlgebra:
    return represented_algebra([ExactMatrix.identity(n)], name=f"C*1_{n}", verify=False)


def tensor_algebra(A: RepresentedAlgebra, B: RepresentedAlgebra) -> RepresentedAlgebra:
    """Spatial tensor product realised by Kronecker products."""
    basis = [kron(a, b) for a in A.basis for b in B.basis]
    name = f"{A.name}(x){B.name}"
    return represented_algebra(basis, unital=A.unital and B.unital, name=name, verify=False)


# ---------------------------------------------------------------------------
# Hermitian elements and cores
# ---------------------------------------------------------------------------


def _hermitian_equations(basis: Sequence[ExactMatrix], p: PExponent) -> List[Dict[int, object]]:
    """Real-linear equations on (Re c_k, Im c_k) for sum c_k B_k to be hermitian."""
    positions = set()
    for b in basis:
        positions.update(b.entries)
    equations: List[Dict[int, object]] = []
    zero = QQ_I(0, 0)
    if p.is_two:
        positions |= {(s, r) for (r, s) in positions}
        for (r, s) in positions:
            re_eq: Dict[int, object] = {}
            im_eq: Dict[int, object] = {}
            for k, b in enumerate(basis):
                z1, z2 = b.entries.get((r, s), zero), b.entries.get((s, r), zero)
                re_eq[2 * k], re_eq[2 * k + 1] = z1.x - z2.x, z2.y - z1.y
                im_eq[2 * k], im_eq[2 * k + 1] = z1.y + z2.y, z1.x + z2.x
            equations.extend((re_eq, im_eq))
        return equations
    for (r, s) in positions:
        re_eq = {}
        im_eq = {}
        for k, b in enumerate(basis):
            z = b.entries.get((r, s))
            if z is None:
                continue
            re_eq[2 * k], re_eq[2 * k + 1] = z.x, -z.y
            im_eq[2 * k], im_eq[2 * k + 1] = z.y, z.x
        if r != s:
            equations.append(re_eq)
        equations.append(im_eq)
    return equations


def hermitian_basis(A: RepresentedAlgebra, p: Union[PExponent, float, str]) -> List[ExactMatrix]:
    """Real basis of A_h, checked to satisfy ``A_h ∩ iA_h = {0}``.

    For p != 2 the hermitian elements are the real diagonal matrices of A; for
    p = 2 they are the self-adjoint ones.
    """
    p = PExponent.parse(p)
    kernel = rational_nullspace(_hermitian_equations(A.basis, p), 2 * A.dimension)
    result = []
    for vec in kernel:
        coeffs = [QQ_I(vec[2 * k], vec[2 * k + 1]) for k in range(A.dimension)]
        result.append(linear_combination(coeffs, A.basis))
    # Real independence of a real-form basis is complex independence iff A_h ∩ iA_h = 0.
    if matrix_span(result).rank != len(result):
        raise VerificationError("A_h ∩ iA_h = {0}", "hermitian basis is complex-dependent")
    return result


def core_of(A: RepresentedAlgebra, p: Union[PExponent, float, str]) -> RepresentedAlgebra:
    """The C*-core ``A_h + iA_h`` as a represented algebra."""
    p = PExponent.parse(p)
    if not A.unital:
        raise InvalidInputError("core_of needs a unital algebra")
    herm = hermitian_basis(A, p)
    core = represented_algebra(herm, unital=True, name=f"core({A.name})")
    if not p.is_two and not core.is_commutative():
        raise VerificationError("commutativity of the core", f"core of {A.name} at p={p}")
    return core


@dataclass(frozen=True)
class HermitianVerdict:
    hermitian: bool
    reason: str
    evidence: Tuple[Tuple[float, NormEstimate], ...] = field(default=())
    dynamical_agrees: bool = True

    def to_dict(self) -> dict:
        return {
            "hermitian": self.hermitian,
            "reason": self.reason,
            "dynamical_agrees": self.dynamical_agrees,
            "evidence": [{"t": fmt_float(t), "norm": est.to_dict()} for t, est in self.evidence],
        }


def is_hermitian(
    A: RepresentedAlgebra,
    a: ExactMatrix,
    p: Union[PExponent, float, str],
    *,
    grid: Sequence[float] = HERMITIAN_GRID,
    tau: float = HERMITIAN_TAU,
    seed: int = DEFAULT_SEED,
    restarts: int = POWER_ITERATION_RESTARTS,
) -> HermitianVerdict:
    """Structural verdict plus the ``||exp(ita)|| = 1`` cross-check on a t-grid."""
    p = PExponent.parse(p)
    if not A.contains(a):
        raise InvalidInputError("element is not in the algebra's span")
    if p.is_two:
        verdict = a.is_self_adjoint()
        reason = "self-adjoint" if verdict else "not self-adjoint"
    else:
        diagonal, real = a.is_diagonal(), a.is_real()
        verdict = diagonal and real
        if verdict:
            reason = "real diagonal"
        else:
            reason = "not diagonal" if not diagonal else "non-real diagonal"
    X = a.to_numpy()
    evidence = []
    for t in grid:
        est = p_operator_norm(expm(1j * t * X), p, seed=seed, restarts=restarts)
        evidence.append((float(t), est))
    if verdict:
        agrees = all(1 - tau <= est.lower and est.upper <= 1 + tau for _, est in evidence)
    else:
        agrees = any(est.lower > 1 + tau for _, est in evidence)
    return HermitianVerdict(verdict, reason, tuple(evidence), agrees)


# ---------------------------------------------------------------------------
# Spectrum of a commutative core
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Points of the spectrum as classes of diagonal coordinates."""

    classes: Tuple[Tuple[int, ...], ...]
    idempotents: Tuple[ExactMatrix, ...]

    @property
    def points(self) -> Tuple[int, ...]:
        return tuple(range(len(self.classes)))

    def point_of(self, coordinate: int) -> int:
        for k, cls in enumerate(self.classes):
            if coordinate in cls:
                return k
        raise InvalidInputError(f"coordinate {coordinate} not covered")


def spectrum_points(C: RepresentedAlgebra) -> Spectrum:
    """Partition coordinates into classes on which every element of C is constant."""
    if not C.is_commutative():
        raise InvalidInputError("spectrum_points needs a commutative algebra")
    if not all(b.is_diagonal() for b in C.basis):
        raise InvalidInputError("spectrum_points needs a diagonal realisation")
    groups: Dict[tuple, List[int]] = {}
    for i in range(C.n):
        key = tuple((b[(i, i)].x, b[(i, i)].y) for b in C.basis)
        groups.setdefault(key, []).append(i)
    classes = tuple(sorted((tuple(v) for v in groups.values()), key=lambda c: c[0]))
    idempotents = tuple(ExactMatrix(C.n, C.n, {(i, i): ONE for i in cls}) for cls in classes)
    total = ExactMatrix.zeros(C.n)
    for e in idempotents:
        if not C.contains(e):
            raise VerificationError("minimal idempotents lie in C", f"class {e!r}")
        total = total + e
    if total != ExactMatrix.identity(C.n):
        raise VerificationError("minimal idempotents sum to 1")
    return Spectrum(classes, idempotents)


# ---------------------------------------------------------------------------
# Core preservation by linear maps
# ---------------------------------------------------------------------------


def preserves_core(
    phi: Callable[[ExactMatrix], ExactMatrix],
    A: RepresentedAlgebra,
    B: RepresentedAlgebra,
    p: Union[PExponent, float, str],
) -> bool:
    """Whether ``phi(core(A)) ⊆ core(B)``, checked on a basis of core(A)."""
    core_a, core_b = core_of(A, p), core_of(B, p)
    return all(core_b.contains(phi(c)) for c in core_a.basis)
