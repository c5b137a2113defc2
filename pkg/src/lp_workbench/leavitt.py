"""Leavitt algebras L_n with an exact normal form, matrices over them, and the
generator-level homomorphism checks for Cuntz-type algebras.

A monomial ``s_mu t_nu`` stands for ``s_{mu_1}...s_{mu_k} t_{nu_l}...t_{nu_1}``
(``t_nu`` is the reverse of ``s_nu``). Normal form: never both ``mu`` and
``nu`` end in the letter n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import InvalidInputError, VerificationError
from .exact import (
    ONE,
    ZERO,
    ExactMatrix,
    Scalar,
    clean,
    format_scalar,
    is_zero,
    matrix_span,
    to_scalar,
)
from .lp_norms import NormEstimate, PExponent, p_operator_norm

Word = Tuple[int, ...]
Letter = Tuple[str, int]

# ---------------------------------------------------------------------------
# Monomials and elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class LeavittWord:
    mu: Word = ()
    nu: Word = ()

    def is_normal(self, n: int) -> bool:
        return not (self.mu and self.nu and self.mu[-1] == n and self.nu[-1] == n)

    @property
    def degree(self) -> int:
        return max(len(self.mu), len(self.nu))

    def __str__(self) -> str:
        if not self.mu and not self.nu:
            return "1"
        s = "".join(f"s{j}" for j in self.mu)
        t = "".join(f"t{j}" for j in reversed(self.nu))
        return s + t


def _word_product(left: LeavittWord, right: LeavittWord) -> Optional[LeavittWord]:
    """``(s_mu t_nu)(s_alpha t_beta)`` in the Cuntz-Toeplitz relations, or None for 0."""
    nu, alpha = left.nu, right.mu
    if alpha[: len(nu)] == nu:
        return LeavittWord(left.mu + alpha[len(nu):], right.nu)
    if nu[: len(alpha)] == alpha:
        return LeavittWord(left.mu, right.nu + nu[len(alpha):])
    return None


def _reduce_word(n: int, word: LeavittWord, coeff: Scalar, out: Dict[LeavittWord, Scalar]) -> None:
    """Add ``coeff * word`` to ``out`` in normal form.

    ``s_{mu n} t_{nu n} -> s_mu t_nu - sum_{j<n} s_{mu j} t_{nu j}``; each step
    shortens the words or ends them in a letter below n.
    """
    stack = [(word, coeff)]
    while stack:
        w, c = stack.pop()
        if w.is_normal(n):
            value = out.get(w, ZERO) + c
            if is_zero(value):
                out.pop(w, None)
            else:
                out[w] = value
            continue
        mu, nu = w.mu[:-1], w.nu[:-1]
        stack.append((LeavittWord(mu, nu), c))
        for j in range(1, n):
            stack.append((LeavittWord(mu + (j,), nu + (j,)), -c))


@dataclass(frozen=True, eq=False)
class LeavittElement:
    """Element of ``L_n``; build with ``leavitt_element`` so terms stay normal."""

    n: int
    terms: Mapping[LeavittWord, Scalar] = field(default_factory=dict)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, LeavittElement):
            return NotImplemented
        return self.n == other.n and dict(self.terms) == dict(other.terms)

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "LeavittElement") -> "LeavittElement":
        return add(self, other)

    def __sub__(self, other: "LeavittElement") -> "LeavittElement":
        return add(self, other.scale(-ONE))

    def __neg__(self) -> "LeavittElement":
        return self.scale(-ONE)

    def __mul__(self, other: "LeavittElement") -> "LeavittElement":
        return multiply(self, other)

    def scale(self, c) -> "LeavittElement":
        c = to_scalar(c)
        return LeavittElement(self.n, clean({w: c * v for w, v in self.terms.items()}))

    @property
    def degree(self) -> int:
        return max((w.degree for w in self.terms), default=0)

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w.mu) + len(w.nu), w)):
            c = self.terms[w]
            if c == ONE:
                parts.append(str(w))
            elif c == -ONE:
                parts.append(f"-{w}")
            else:
                coeff = format_scalar(c)
                parts.append(coeff if str(w) == "1" else f"({coeff}){w}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"L{self.n}[{self.format()}]"


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidInputError(f"Leavitt algebra needs n >= 1, got {n}")


def leavitt_element(n: int, terms: Mapping[LeavittWord, object]) -> LeavittElement:
    """Element from arbitrary (possibly non-normal) monomials."""
    _check_n(n)
    out: Dict[LeavittWord, Scalar] = {}
    for w, c in terms.items():
        if any(not 1 <= j <= n for j in w.mu + w.nu):
            raise InvalidInputError(f"monomial {w} uses a letter outside 1..{n}")
        c = to_scalar(c)
        if not is_zero(c):
            _reduce_word(n, w, c, out)
    return LeavittElement(n, out)


def normal_form(e: LeavittElement) -> LeavittElement:
    return leavitt_element(e.n, e.terms)


def one(n: int) -> LeavittElement:
    _check_n(n)
    return LeavittElement(n, {LeavittWord(): ONE})


def zero(n: int) -> LeavittElement:
    _check_n(n)
    return LeavittElement(n, {})


def generator(kind: str, j: int, n: int) -> LeavittElement:
    """``s_j`` (kind ``"s"``) or ``t_j`` (kind ``"t"``)."""
    if kind not in ("s", "t"):
        raise InvalidInputError(f"generator kind must be 's' or 't', got {kind!r}")
    if not 1 <= j <= n:
        raise InvalidInputError(f"generator index {j} outside 1..{n}")
    word = LeavittWord((j,), ()) if kind == "s" else LeavittWord((), (j,))
    return LeavittElement(n, {word: ONE})


def monomial(n: int, mu: Sequence[int], nu: Sequence[int], coeff: object = 1) -> LeavittElement:
    return leavitt_element(n, {LeavittWord(tuple(mu), tuple(nu)): coeff})


def _same_n(e: LeavittElement, f: LeavittElement) -> None:
    if e.n != f.n:
        raise InvalidInputError(f"Leavitt algebras differ: L_{e.n} vs L_{f.n}")


def add(e: LeavittElement, f: LeavittElement) -> LeavittElement:
    _same_n(e, f)
    out = dict(e.terms)
    for w, c in f.terms.items():
        value = out.get(w, ZERO) + c
        if is_zero(value):
            out.pop(w, None)
        else:
            out[w] = value
    return LeavittElement(e.n, out)


def multiply(e: LeavittElement, f: LeavittElement) -> LeavittElement:
    """Concatenate monomials, then reduce to normal form."""
    _same_n(e, f)
    out: Dict[LeavittWord, Scalar] = {}
    for w1, c1 in e.terms.items():
        for w2, c2 in f.terms.items():
            w = _word_product(w1, w2)
            if w is not None:
                _reduce_word(e.n, w, c1 * c2, out)
    return LeavittElement(e.n, out)


def normal_monomials(n: int, degree: int) -> List[LeavittWord]:
    """Normal monomials ``s_mu t_nu`` with ``|mu|, |nu| <= degree``."""
    words = [w for k in range(degree + 1) for w in product(range(1, n + 1), repeat=k)]
    return [
        LeavittWord(mu, nu)
        for mu in words
        for nu in words
        if LeavittWord(mu, nu).is_normal(n)
    ]


def diagonal_monomials(n: int, depth: int) -> List[LeavittElement]:
    """``s_mu t_mu`` for ``|mu| <= depth`` with mu not ending in n."""
    return [
        LeavittElement(n, {LeavittWord(mu, mu): ONE})
        for k in range(depth + 1)
        for mu in product(range(1, n + 1), repeat=k)
        if not mu or mu[-1] != n
    ]


def random_leavitt_element(
    n: int, rng, degree: int = 3, terms: int = 4, bound: int = 3
) -> LeavittElement:
    """Random combination of (not necessarily normal) monomials."""
    raw: Dict[LeavittWord, Scalar] = {}
    for _ in range(terms):
        mu = tuple(int(x) for x in rng.integers(1, n + 1, size=int(rng.integers(0, degree + 1))))
        nu = tuple(int(x) for x in rng.integers(1, n + 1, size=int(rng.integers(0, degree + 1))))
        c = int(rng.integers(-bound, bound + 1)) or 1
        w = LeavittWord(mu, nu)
        raw[w] = raw.get(w, ZERO) + to_scalar(c)
    return leavitt_element(n, raw)


# ---------------------------------------------------------------------------
# Letter-level rewriting
# ---------------------------------------------------------------------------


def from_letters(word: Iterable[Letter], n: int) -> LeavittElement:
    """Product of generators, e.g. ``[("t", 1), ("s", 1)]`` -> 1."""
    out = one(n)
    for kind, j in word:
        out = multiply(out, generator(kind, j, n))
    return out


def letters_of(w: LeavittWord) -> Tuple[Letter, ...]:
    return tuple(("s", j) for j in w.mu) + tuple(("t", j) for j in reversed(w.nu))


def _redexes(word: Tuple[Letter, ...], n: int) -> List[int]:
    out = []
    for i in range(len(word) - 1):
        (k1, j1), (k2, j2) = word[i], word[i + 1]
        if k1 == "t" and k2 == "s":
            out.append(i)
        elif k1 == "s" and k2 == "t" and j1 == n and j2 == n:
            out.append(i)
    return out


def reduce_letters(
    terms: Mapping[Tuple[Letter, ...], object], n: int, rng
) -> LeavittElement:
    """Rewrite letter words with ``t_j s_k -> delta_jk`` and
    ``s_n t_n -> 1 - sum_{j<n} s_j t_j``, choosing redexes at random.

    The irreducible words are exactly the normal monomials, so the result is
    compared against ``normal_form`` to test confluence.
    """
    current: Dict[Tuple[Letter, ...], Scalar] = {}
    for w, c in terms.items():
        c = to_scalar(c)
        current[tuple(w)] = current.get(tuple(w), ZERO) + c
    current = clean(current)
    while True:
        reducible = sorted((w for w in current if _redexes(w, n)), key=str)
        if not reducible:
            break
        w = reducible[int(rng.integers(len(reducible)))]
        spots = _redexes(w, n)
        i = spots[int(rng.integers(len(spots)))]
        c = current.pop(w)
        head, tail = w[:i], w[i + 2:]
        (k1, j1), (_, j2) = w[i], w[i + 1]
        if k1 == "t":
            replacements = [(head + tail, c)] if j1 == j2 else []
        else:
            replacements = [(head + tail, c)]
            replacements += [(head + (("s", j), ("t", j)) + tail, -c) for j in range(1, n)]
        for new, coeff in replacements:
            value = current.get(new, ZERO) + coeff
            if is_zero(value):
                current.pop(new, None)
            else:
                current[new] = value
    out: Dict[LeavittWord, Scalar] = {}
    for w, c in current.items():
        mu = tuple(j for k, j in w if k == "s")
        nu = tuple(reversed([j for k, j in w if k == "t"]))
        out[LeavittWord(mu, nu)] = c
    return LeavittElement(n, clean(out))


def letter_element(terms: Mapping[Tuple[Letter, ...], object], n: int) -> LeavittElement:
    """``sum c_w w`` in normal form, multiplied out generator by generator."""
    out = zero(n)
    for word, c in terms.items():
        out = out + from_letters(word, n).scale(to_scalar(c))
    return normal_form(out)


def random_letter_terms(n: int, rng, degree: int = 3) -> Dict[Tuple[Letter, ...], int]:
    """Up to three interleaved letter words, each with at most ``degree`` s and t letters."""
    terms: Dict[Tuple[Letter, ...], int] = {}
    for _ in range(int(rng.integers(1, 4))):
        kinds = ["s"] * int(rng.integers(0, degree + 1)) + ["t"] * int(rng.integers(0, degree + 1))
        rng.shuffle(kinds)
        word = tuple((k, int(rng.integers(1, n + 1))) for k in kinds)
        terms[word] = int(rng.integers(-3, 4)) or 1
    return terms


@dataclass(frozen=True)
class ConfluenceReport:
    n: int
    samples: int
    degree: int
    reductions: int
    mismatches: int

    @property
    def passed(self) -> bool:
        return self.mismatches == 0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "degree": self.degree,
            "reductions": self.reductions,
            "mismatches": self.mismatches,
        }


def check_confluence(
    n: int, rng, samples: int = 1000, degree: int = 3, reductions: int = 2
) -> ConfluenceReport:
    """Every random-order reduction of a random element lands on its normal form.

    Each sample is reduced ``reductions`` times with fresh redex choices; the
    ring laws of the normal-form product are sampled alongside.
    """
    _check_n(n)
    mismatches = 0
    for _ in range(samples):
        terms = random_letter_terms(n, rng, degree)
        target = letter_element(terms, n)
        mismatches += sum(reduce_letters(terms, n, rng) != target for _ in range(reductions))
        a, b, c = (random_leavitt_element(n, rng, degree=degree, terms=3) for _ in range(3))
        if (a * b) * c != a * (b * c) or a * (b + c) != a * b + a * c:
            mismatches += 1
    return ConfluenceReport(n, samples, degree, reductions, mismatches)


# ---------------------------------------------------------------------------
# Matrices over L_n
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LeavittMatrix:
    n: int
    rows: Tuple[Tuple[LeavittElement, ...], ...]

    def __post_init__(self) -> None:
        size = len(self.rows)
        for row in self.rows:
            if len(row) != size:
                raise InvalidInputError("Leavitt matrices must be square")
            for e in row:
                if e.n != self.n:
                    raise InvalidInputError(f"entry over L_{e.n} in a matrix over L_{self.n}")

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, key: Tuple[int, int]) -> LeavittElement:
        i, j = key
        return self.rows[i][j]

    @classmethod
    def from_entries(
        cls, n: int, entries: Sequence[Sequence[Union[LeavittElement, int]]]
    ) -> "LeavittMatrix":
        rows = []
        for row in entries:
            rows.append(tuple(e if isinstance(e, LeavittElement) else one(n).scale(e) for e in row))
        return cls(n, tuple(rows))

    @classmethod
    def identity(cls, n: int, size: int) -> "LeavittMatrix":
        return cls(n, tuple(
            tuple(one(n) if i == j else zero(n) for j in range(size)) for i in range(size)
        ))

    @classmethod
    def unit(
        cls, n: int, size: int, r: int, s: int, value: Optional[LeavittElement] = None
    ) -> "LeavittMatrix":
        """``e_rs ⊗ value`` (value defaults to 1); indices are 0-based."""
        value = one(n) if value is None else value
        return cls(n, tuple(
            tuple(value if (i, j) == (r, s) else zero(n) for j in range(size)) for i in range(size)
        ))

    def _check(self, other: "LeavittMatrix") -> None:
        if self.n != other.n or self.size != other.size:
            raise InvalidInputError("Leavitt matrices of different shape or algebra")

    def __matmul__(self, other: "LeavittMatrix") -> "LeavittMatrix":
        self._check(other)
        size = self.size
        out = []
        for i in range(size):
            row = []
            for j in range(size):
                acc = zero(self.n)
                for k in range(size):
                    if self[i, k].terms and other[k, j].terms:
                        acc = acc + self[i, k] * other[k, j]
                row.append(acc)
            out.append(tuple(row))
        return LeavittMatrix(self.n, tuple(out))

    def __add__(self, other: "LeavittMatrix") -> "LeavittMatrix":
        self._check(other)
        return LeavittMatrix(self.n, tuple(
            tuple(self[i, j] + other[i, j] for j in range(self.size)) for i in range(self.size)
        ))

    def __sub__(self, other: "LeavittMatrix") -> "LeavittMatrix":
        self._check(other)
        return LeavittMatrix(self.n, tuple(
            tuple(self[i, j] - other[i, j] for j in range(self.size)) for i in range(self.size)
        ))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LeavittMatrix):
            return NotImplemented
        return self.n == other.n and self.size == other.size and all(
            self[i, j] == other[i, j] for i in range(self.size) for j in range(self.size)
        )

    __hash__ = None  # type: ignore[assignment]

    def power(self, k: int) -> "LeavittMatrix":
        out = LeavittMatrix.identity(self.n, self.size)
        for _ in range(k):
            out = out @ self
        return out

    def replace(self, i: int, j: int, value: LeavittElement) -> "LeavittMatrix":
        rows = [list(row) for row in self.rows]
        rows[i][j] = value
        return LeavittMatrix(self.n, tuple(tuple(r) for r in rows))

    def is_identity(self) -> bool:
        return self == LeavittMatrix.identity(self.n, self.size)

    def format(self) -> List[List[str]]:
        return [[e.format() for e in row] for row in self.rows]


def _difference(lhs: LeavittMatrix, rhs: LeavittMatrix) -> str:
    diff = lhs - rhs
    cells = [
        f"[{i + 1},{j + 1}] {diff[i, j].format()}"
        for i in range(diff.size)
        for j in range(diff.size)
        if not diff[i, j].is_zero()
    ]
    return "; ".join(cells)


# ---------------------------------------------------------------------------
# Relation checks
# ---------------------------------------------------------------------------


@dataclass
class IdentityReport:
    """Named identities checked exactly; failures carry the normal-form difference."""

    checks: List[Tuple[str, bool, str]] = field(default_factory=list)

    def record(self, name: str, lhs: LeavittMatrix, rhs: LeavittMatrix) -> bool:
        ok = lhs == rhs
        self.checks.append((name, ok, "" if ok else _difference(lhs, rhs)))
        return ok

    def note(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, ok, detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def failures(self) -> List[Tuple[str, str]]:
        return [(name, detail) for name, ok, detail in self.checks if not ok]

    def raise_for_failure(self) -> None:
        if not self.passed:
            name, detail = self.failures[0]
            raise VerificationError(name, detail)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": len(self.checks),
            "failures": [
                {"identity": name, "difference": detail} for name, detail in self.failures
            ],
        }


def check_cuntz_relations(S: Sequence[LeavittMatrix], T: Sequence[LeavittMatrix]) -> IdentityReport:
    """``T_j S_k = delta_jk I`` and ``sum_j S_j T_j = I``."""
    if len(S) != len(T) or not S:
        raise InvalidInputError("need equally many (and at least one) S and T matrices")
    n, size = S[0].n, S[0].size
    for m in list(S) + list(T):
        if m.n != n or m.size != size:
            raise InvalidInputError("all matrices must share size and algebra")
    identity = LeavittMatrix.identity(n, size)
    zero_matrix = LeavittMatrix(n, tuple(tuple(zero(n) for _ in range(size)) for _ in range(size)))
    report = IdentityReport()
    for j, t in enumerate(T, start=1):
        for k, s in enumerate(S, start=1):
            expected = identity if j == k else zero_matrix
            report.record(f"T_{j} S_{k} = {'I' if j == k else '0'}", t @ s, expected)
    total = zero_matrix
    for s, t in zip(S, T):
        total = total + s @ t
    report.record("sum_j S_j T_j = I", total, identity)
    return report


def canonical_generators(n: int) -> Tuple[List[LeavittMatrix], List[LeavittMatrix]]:
    """``s_j``, ``t_j`` as 1x1 matrices."""
    S = [LeavittMatrix(n, ((generator("s", j, n),),)) for j in range(1, n + 1)]
    T = [LeavittMatrix(n, ((generator("t", j, n),),)) for j in range(1, n + 1)]
    return S, T


def absorption_generators(k: int) -> Tuple[List[LeavittMatrix], List[LeavittMatrix]]:
    """``x_1..x_2k`` and ``y_1..y_2k`` in ``M_2(L_2k)``.

    ``x_{2j-1}`` has first row ``(s_{2j-1}, s_{2j})``, ``x_{2j}`` the same second
    row; ``y_{2j-1}``, ``y_{2j}`` carry ``(t_{2j-1}, t_{2j})`` in the first and
    second column.
    """
    if k < 2:
        raise InvalidInputError(f"matrix absorption needs k >= 2, got {k}")
    n = 2 * k
    z = zero(n)
    X: List[LeavittMatrix] = []
    Y: List[LeavittMatrix] = []
    for j in range(1, k + 1):
        s1, s2 = generator("s", 2 * j - 1, n), generator("s", 2 * j, n)
        t1, t2 = generator("t", 2 * j - 1, n), generator("t", 2 * j, n)
        X.append(LeavittMatrix(n, ((s1, s2), (z, z))))
        X.append(LeavittMatrix(n, ((z, z), (s1, s2))))
        Y.append(LeavittMatrix(n, ((t1, z), (t2, z))))
        Y.append(LeavittMatrix(n, ((z, t1), (z, t2))))
    return X, Y


def _evaluate(words: Sequence[Sequence[Tuple[str, int]]], X, Y, n: int) -> LeavittMatrix:
    """Sum of products of ``x_i``/``y_i`` (1-based) over the given words."""
    total = LeavittMatrix(n, tuple(tuple(zero(n) for _ in range(2)) for _ in range(2)))
    for word in words:
        prod = LeavittMatrix.identity(n, 2)
        for kind, i in word:
            prod = prod @ (X[i - 1] if kind == "x" else Y[i - 1])
        total = total + prod
    return total


Witness = Tuple[str, List[List[Letter]], Tuple[int, int, str, int]]


def generation_witnesses(k: int) -> List[Witness]:
    """Words in x, y equal to ``e_rs ⊗ 1``, ``e_11 ⊗ s_j`` and ``e_11 ⊗ t_j``.

    Each entry is (name, words, (r, s, kind, j)) with kind ``"1"``, ``"s"`` or ``"t"``.
    """
    odd = [2 * i - 1 for i in range(1, k + 1)]
    out = [
        ("e11⊗1", [[("x", i), ("y", i)] for i in odd], (0, 0, "1", 0)),
        ("e22⊗1", [[("x", i + 1), ("y", i + 1)] for i in odd], (1, 1, "1", 0)),
        ("e21⊗1", [[("x", i + 1), ("y", i)] for i in odd], (1, 0, "1", 0)),
        ("e12⊗1", [[("x", i), ("y", i + 1)] for i in odd], (0, 1, "1", 0)),
    ]
    for j in range(1, k + 1):
        a = 2 * j - 1
        b = a + 1
        s_a = [[("x", a), ("x", i), ("y", i)] for i in odd]
        s_b = [[("x", a), ("x", i + 1), ("y", i)] for i in odd]
        t_a = [[("x", i), ("y", i), ("y", a)] for i in odd]
        t_b = [[("x", i), ("y", i + 1), ("y", a)] for i in odd]
        out.append((f"e11⊗s{a}", s_a, (0, 0, "s", a)))
        out.append((f"e11⊗s{b}", s_b, (0, 0, "s", b)))
        out.append((f"e11⊗t{a}", t_a, (0, 0, "t", a)))
        out.append((f"e11⊗t{b}", t_b, (0, 0, "t", b)))
    return out


def verify_matrix_absorption(k: int) -> IdentityReport:
    """Cuntz relations for the x, y and explicit generation of ``M_2 ⊗ L_2k``."""
    X, Y = absorption_generators(k)
    n = 2 * k
    report = check_cuntz_relations(X, Y)
    for name, words, (r, s, kind, j) in generation_witnesses(k):
        value = one(n) if kind == "1" else generator(kind, j, n)
        expected = LeavittMatrix.unit(n, 2, r, s, value)
        report.record(f"witness {name}", _evaluate(words, X, Y, n), expected)
    return report


# ---------------------------------------------------------------------------
# Covariant presentation of M_2 ⊗ L_n
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovariantImages:
    a: LeavittMatrix
    b: LeavittMatrix
    f: LeavittMatrix


def covariant_images(n: int) -> CovariantImages:
    """``psi(a)`` swap, ``psi(b) = [[0, t_n], [s_1, sum_{j<n} s_{j+1} t_j]]``, ``psi(f) = e_11``."""
    if n < 2:
        raise InvalidInputError(f"covariant presentation needs n >= 2, got {n}")
    corner = zero(n)
    for j in range(1, n):
        corner = corner + generator("s", j + 1, n) * generator("t", j, n)
    a = LeavittMatrix.from_entries(n, [[0, 1], [1, 0]])
    b = LeavittMatrix(n, ((zero(n), generator("t", n, n)), (generator("s", 1, n), corner)))
    f = LeavittMatrix.unit(n, 2, 0, 0)
    return CovariantImages(a, b, f)


def verify_covariant_presentation(
    n: int, images: Optional[CovariantImages] = None
) -> IdentityReport:
    """Covariance relations for psi(a), psi(b), psi(f) and psi ∘ phi on generators."""
    psi = images or covariant_images(n)
    ident = LeavittMatrix.identity(n, 2)
    report = IdentityReport()
    report.record("psi(a)^2 = I", psi.a @ psi.a, ident)
    powers = [ident]
    for _ in range(n + 1):
        powers.append(powers[-1] @ psi.b)
    report.record(f"psi(b)^{n + 1} = I", powers[n + 1], ident)
    early = [k for k in range(1, n + 1) if powers[k].is_identity()]
    detail = f"psi(b)^{early[0]} = I" if early else ""
    report.note(f"psi(b) has order exactly {n + 1}", not early, detail)
    report.record("psi(f)^2 = psi(f)", psi.f @ psi.f, psi.f)
    report.record("psi(f) + psi(a)psi(f)psi(a) = I", psi.f + psi.a @ psi.f @ psi.a, ident)
    total = LeavittMatrix(n, tuple(tuple(zero(n) for _ in range(2)) for _ in range(2)))
    for k in range(n + 1):
        # b^-k = b^(n+1-k)
        total = total + powers[k] @ psi.f @ powers[(n + 1 - k) % (n + 1)]
    report.record("sum_k psi(b)^k psi(f) psi(b)^-k = I", total, ident)

    for j in range(1, n + 1):
        lhs = psi.a @ powers[j] @ psi.f
        rhs = LeavittMatrix.unit(n, 2, 0, 0, generator("s", j, n))
        report.record(f"psi(a b^{j} f) = e11⊗s{j}", lhs, rhs)
        lhs = psi.f @ powers[(n + 1 - j) % (n + 1)] @ psi.a
        rhs = LeavittMatrix.unit(n, 2, 0, 0, generator("t", j, n))
        report.record(f"psi(f b^-{j} a) = e11⊗t{j}", lhs, rhs)
    report.record("psi(a f) = e21⊗1", psi.a @ psi.f, LeavittMatrix.unit(n, 2, 1, 0))
    report.record("psi(f a) = e12⊗1", psi.f @ psi.a, LeavittMatrix.unit(n, 2, 0, 1))
    return report


def mutated_covariant_images(n: int) -> CovariantImages:
    """Negative control: ``psi(b)`` with its ``s_1`` entry zeroed."""
    psi = covariant_images(n)
    return CovariantImages(psi.a, psi.b.replace(1, 0, zero(n)), psi.f)


# ---------------------------------------------------------------------------
# Truncated spatial model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TruncatedModel:
    """``s_j: e_w -> e_{jw}`` and ``t_j: e_{jw} -> e_w`` on words of length <= depth."""

    n: int
    depth: int

    @cached_property
    def words(self) -> Tuple[Word, ...]:
        letters = range(1, self.n + 1)
        return tuple(w for k in range(self.depth + 1) for w in product(letters, repeat=k))

    @cached_property
    def index(self) -> Dict[Word, int]:
        return {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return len(self.words)

    @cached_property
    def S(self) -> Tuple[ExactMatrix, ...]:
        out = []
        for j in range(1, self.n + 1):
            entries = {
                (self.index[(j,) + w], self.index[w]): ONE
                for w in self.words
                if len(w) < self.depth
            }
            out.append(ExactMatrix(self.dim, self.dim, entries))
        return tuple(out)

    @cached_property
    def T(self) -> Tuple[ExactMatrix, ...]:
        return tuple(s.transpose() for s in self.S)

    def letters(self, word: Iterable[Letter]) -> ExactMatrix:
        out = ExactMatrix.identity(self.dim)
        for kind, j in word:
            out = out @ (self.S[j - 1] if kind == "s" else self.T[j - 1])
        return out

    def rho(self, e: LeavittElement) -> ExactMatrix:
        if e.n != self.n:
            raise InvalidInputError(f"element of L_{e.n} in a model of L_{self.n}")
        out = ExactMatrix.zeros(self.dim)
        for w, c in e.terms.items():
            out = out + self.letters(letters_of(w)).scale(c)
        return out

    def columns(self, lo: int, hi: int) -> List[int]:
        return [self.index[w] for w in self.words if lo <= len(w) <= hi]

    def agree_on(self, A: ExactMatrix, B: ExactMatrix, columns: Iterable[int]) -> bool:
        cols = set(columns)
        diff = A - B
        return all(j not in cols for (_, j) in diff.entries)

    def window(self, degree: int) -> List[int]:
        """Columns on which every rewrite of a product of ``degree`` letters is valid."""
        return self.columns(degree + 1, self.depth - degree - 1)


@dataclass(frozen=True)
class ModelReport:
    n: int
    depth: int
    dim: int
    toeplitz_below_depth: bool
    sum_relation_above_zero: bool
    sum_relation_at_empty_word: bool
    spatial: bool
    s_norms: Tuple[NormEstimate, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "depth": self.depth,
            "dim": self.dim,
            "t_j s_k = delta on |w| < depth": self.toeplitz_below_depth,
            "sum s_j t_j = 1 on |w| >= 1": self.sum_relation_above_zero,
            "sum s_j t_j = 1 at the empty word": self.sum_relation_at_empty_word,
            "spatial": self.spatial,
            "s_norms": [est.to_dict() for est in self.s_norms],
        }


def truncated_spatial_representation(
    n: int, depth: int, p: Union[PExponent, float, str] = 2
) -> Tuple[TruncatedModel, ModelReport]:
    """Build the model and report where the Cuntz relations hold in it."""
    _check_n(n)
    if depth < 1:
        raise InvalidInputError(f"model depth must be >= 1, got {depth}")
    p = PExponent.parse(p)
    model = TruncatedModel(n, depth)
    ident = ExactMatrix.identity(model.dim)
    nil = ExactMatrix.zeros(model.dim)
    below = model.columns(0, depth - 1)
    toeplitz = all(
        model.agree_on(model.T[j] @ model.S[k], ident if j == k else nil, below)
        for j in range(n)
        for k in range(n)
    )
    total = ExactMatrix.zeros(model.dim)
    for s, t in zip(model.S, model.T):
        total = total + s @ t
    above = model.agree_on(total, ident, model.columns(1, depth))
    at_empty = model.agree_on(total, ident, model.columns(0, 0))
    spatial = all(
        all(len(v) == 1 for v in s.column_support().values())
        and all(v == ONE for v in s.entries.values())
        for s in model.S
    )
    norms = tuple(p_operator_norm(s.to_numpy(), p) for s in model.S)
    return model, ModelReport(n, depth, model.dim, toeplitz, above, at_empty, spatial, norms)


def monomials_independent(n: int, degree: int, depth: int) -> bool:
    """Normal monomials of degree <= ``degree`` have independent images in the model."""
    model = TruncatedModel(n, depth)
    monos = normal_monomials(n, degree)
    span = matrix_span(model.rho(LeavittElement(n, {w: ONE})) for w in monos)
    return span.rank == len(monos)


def product_agrees_in_model(model: TruncatedModel, e: LeavittElement, f: LeavittElement) -> bool:
    """``rho(e f)`` equals ``rho(e) rho(f)`` on the window where both relations hold."""
    letters = max((len(w.mu) + len(w.nu) for w in e.terms), default=0)
    letters += max((len(w.mu) + len(w.nu) for w in f.terms), default=0)
    columns = model.window(letters)
    if not columns:
        raise InvalidInputError(
            f"depth {model.depth} leaves no window for products of {letters} letters"
        )
    return model.agree_on(model.rho(e * f), model.rho(e) @ model.rho(f), columns)
