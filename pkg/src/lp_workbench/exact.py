"""Exact Gaussian-rational scalars, sparse matrices and subspaces.

Scalars are elements of sympy's ``QQ_I`` domain. Complex spans are kept in
reduced echelon form over ``QQ_I``; real-linear systems (hermitian parts,
cores) are solved over ``QQ`` with ``DomainMatrix.rref``.
"""

from __future__ import annotations

import math
import re
from typing import Any, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import InvalidInputError

Scalar = Any  # an element of QQ_I
Rational = Any  # an element of QQ

ZERO: Scalar = QQ_I(0, 0)
ONE: Scalar = QQ_I(1, 0)
IMAG: Scalar = QQ_I(0, 1)

# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------
_RATIONAL_RE = re.compile(r"^([+-]?)(\d+)(?:/(\d+))?$")


def _parse_rational(text: str) -> Rational:
    m = _RATIONAL_RE.match(text)
    if not m:
        raise InvalidInputError(f"not a rational number: {text!r}")
    sign, num, den = m.group(1), int(m.group(2)), int(m.group(3) or 1)
    if den == 0:
        raise InvalidInputError(f"zero denominator in {text!r}")
    return QQ(-num if sign == "-" else num, den)


def parse_rational(text: str) -> Rational:
    """Parse ``"p"`` or ``"p/q"`` into a ``QQ`` element."""
    return _parse_rational(str(text).replace(" ", ""))


def parse_scalar(text: str) -> Scalar:
    """Parse a complex rational such as ``"1/2+3/4 i"``, ``"-i"`` or ``"5"``."""
    s = str(text).replace(" ", "")
    if not s:
        raise InvalidInputError("empty scalar")
    if s.endswith("i"):
        body = s[:-1]
        split = max(body.rfind("+"), body.rfind("-"))
        if split > 0:
            real_txt, imag_txt = body[:split], body[split:]
        else:
            real_txt, imag_txt = "0", body
        if imag_txt in ("", "+"):
            imag_txt = "1"
        elif imag_txt == "-":
            imag_txt = "-1"
        return QQ_I(_parse_rational(real_txt), _parse_rational(imag_txt))
    return QQ_I(_parse_rational(s), 0)


def to_scalar(value) -> Scalar:
    """Coerce ints, ``QQ`` elements and scalar strings into ``QQ_I``."""
    if isinstance(value, QQ_I.dtype):
        return value
    if isinstance(value, str):
        return parse_scalar(value)
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidInputError(f"exact scalar expected, got {value!r}")
    if isinstance(value, int) or QQ.of_type(value):
        return QQ_I(value, 0)
    raise InvalidInputError(f"cannot interpret {value!r} as an exact scalar")


def rational_to_float(q: Rational) -> float:
    return int(q.numerator) / int(q.denominator)


def format_rational(q: Rational) -> str:
    num, den = int(q.numerator), int(q.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


def format_scalar(z: Scalar) -> str:
    """Render a scalar in the spec-file syntax (``a/b+c/d i``)."""
    if not z.y:
        return format_rational(z.x)
    if not z.x:
        return f"{format_rational(z.y)} i"
    sign = "+" if z.y > 0 else "-"
    return f"{format_rational(z.x)}{sign}{format_rational(abs(z.y))} i"


def is_zero(z: Scalar) -> bool:
    return not z.x and not z.y


def is_real(z: Scalar) -> bool:
    return not z.y


def is_nonneg_real(z: Scalar) -> bool:
    return not z.y and z.x >= 0


def is_positive_real(z: Scalar) -> bool:
    return not z.y and z.x > 0


def conj(z: Scalar) -> Scalar:
    return QQ_I(z.x, -z.y)


def abs_squared(z: Scalar) -> Rational:
    return z.x * z.x + z.y * z.y


def is_unimodular(z: Scalar) -> bool:
    return abs_squared(z) == 1


def scalar_abs(z: Scalar) -> float:
    return math.hypot(rational_to_float(z.x), rational_to_float(z.y))


def to_complex(z: Scalar) -> complex:
    return complex(rational_to_float(z.x), rational_to_float(z.y))


def unimodular_from_slope(t: Rational, sign: int = 1) -> Scalar:
    """Exact point of the unit circle, ``((1-t^2) + 2t i) / (1+t^2)``."""
    den = 1 + t * t
    return QQ_I((1 - t * t) / den * sign, 2 * t / den * sign)


# ---------------------------------------------------------------------------
# Sparse vectors
# ---------------------------------------------------------------------------
def _axpy(target: Dict[Hashable, Scalar], coeff: Scalar, source: Mapping[Hashable, Scalar]) -> None:
    """target += coeff * source, dropping entries that cancel."""
    for key, value in source.items():
        new = target.get(key, ZERO) + coeff * value
        if is_zero(new):
            target.pop(key, None)
        else:
            target[key] = new


def clean(vector: Mapping[Hashable, Scalar]) -> Dict[Hashable, Scalar]:
    return {k: v for k, v in vector.items() if not is_zero(v)}


# ---------------------------------------------------------------------------
# Sparse exact matrices
# ---------------------------------------------------------------------------
class ExactMatrix:
    """Immutable sparse matrix over ``QQ_I`` (zero entries are never stored)."""

    __slots__ = ("rows", "cols", "entries", "_hash")

    def __init__(
        self, rows: int, cols: int, entries: Optional[Mapping[Tuple[int, int], Scalar]] = None
    ):
        self.rows = rows
        self.cols = cols
        self.entries: Dict[Tuple[int, int], Scalar] = clean(entries or {})
        self._hash: Optional[int] = None
        for (i, j) in self.entries:
            if not (0 <= i < rows and 0 <= j < cols):
                raise InvalidInputError(f"entry ({i}, {j}) outside a {rows}x{cols} matrix")

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "ExactMatrix":
        n_rows = len(rows)
        n_cols = len(rows[0]) if n_rows else 0
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != n_cols:
                raise InvalidInputError("ragged matrix rows")
            for j, value in enumerate(row):
                entries[(i, j)] = to_scalar(value)
        return cls(n_rows, n_cols, entries)

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> "ExactMatrix":
        return cls(rows, rows if cols is None else cols)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls(n, n, {(i, i): ONE for i in range(n)})

    @classmethod
    def diagonal(cls, values: Sequence) -> "ExactMatrix":
        n = len(values)
        return cls(n, n, {(i, i): to_scalar(v) for i, v in enumerate(values)})

    @classmethod
    def unit(cls, n: int, i: int, j: int) -> "ExactMatrix":
        return cls(n, n, {(i, j): ONE})

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "ExactMatrix":
        """Matrix sending basis vector ``e_j`` to ``e_{perm[j]}``."""
        n = len(perm)
        if sorted(perm) != list(range(n)):
            raise InvalidInputError(f"not a permutation of 0..{n - 1}: {list(perm)}")
        return cls(n, n, {(perm[j], j): ONE for j in range(n)})

    # -- access -------------------------------------------------------------
    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, key: Tuple[int, int]) -> Scalar:
        return self.entries.get(key, ZERO)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, frozenset(self.entries.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"

    def is_zero(self) -> bool:
        return not self.entries

    def to_rows(self) -> List[List[Scalar]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=complex)
        for (i, j), v in self.entries.items():
            out[i, j] = to_complex(v)
        return out

    def format(self) -> List[List[str]]:
        return [[format_scalar(v) for v in row] for row in self.to_rows()]

    # -- arithmetic ---------------------------------------------------------
    def _check_same_shape(self, other: "ExactMatrix") -> None:
        if self.shape != other.shape:
            raise InvalidInputError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        acc = dict(self.entries)
        _axpy(acc, ONE, other.entries)
        return ExactMatrix(self.rows, self.cols, acc)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        acc = dict(self.entries)
        _axpy(acc, -ONE, other.entries)
        return ExactMatrix(self.rows, self.cols, acc)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, {k: -v for k, v in self.entries.items()})

    def scale(self, c) -> "ExactMatrix":
        c = to_scalar(c)
        return ExactMatrix(self.rows, self.cols, {k: c * v for k, v in self.entries.items()})

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise InvalidInputError(f"cannot multiply {self.shape} by {other.shape}")
        by_row: Dict[int, List[Tuple[int, Scalar]]] = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        acc: Dict[Tuple[int, int], Scalar] = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                acc[(i, j)] = acc.get((i, j), ZERO) + a * b
        return ExactMatrix(self.rows, other.cols, acc)

    def power(self, k: int) -> "ExactMatrix":
        result = ExactMatrix.identity(self.rows)
        for _ in range(k):
            result = result @ self
        return result

    def conjugate_transpose(self) -> "ExactMatrix":
        entries = {(j, i): conj(v) for (i, j), v in self.entries.items()}
        return ExactMatrix(self.cols, self.rows, entries)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def commutes_with(self, other: "ExactMatrix") -> bool:
        return self @ other == other @ self

    # -- structure ----------------------------------------------------------
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_diagonal(self) -> bool:
        return all(i == j for (i, j) in self.entries)

    def is_real(self) -> bool:
        return all(is_real(v) for v in self.entries.values())

    def is_self_adjoint(self) -> bool:
        return self == self.conjugate_transpose()

    def diagonal_entries(self) -> List[Scalar]:
        return [self[(i, i)] for i in range(min(self.rows, self.cols))]

    def column_support(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = {}
        for (i, j) in self.entries:
            out.setdefault(j, []).append(i)
        return out

    def row_support(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = {}
        for (i, j) in self.entries:
            out.setdefault(i, []).append(j)
        return out

    def submatrix(self, row0: int, col0: int, rows: int, cols: int) -> "ExactMatrix":
        return ExactMatrix(rows, cols, {
            (i - row0, j - col0): v
            for (i, j), v in self.entries.items()
            if row0 <= i < row0 + rows and col0 <= j < col0 + cols
        })


def block_diag(blocks: Sequence[ExactMatrix]) -> ExactMatrix:
    entries: Dict[Tuple[int, int], Scalar] = {}
    r0 = c0 = 0
    for block in blocks:
        for (i, j), v in block.entries.items():
            entries[(r0 + i, c0 + j)] = v
        r0 += block.rows
        c0 += block.cols
    return ExactMatrix(r0, c0, entries)


def kron(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    entries = {}
    for (i, j), x in a.entries.items():
        for (k, l), y in b.entries.items():
            entries[(i * b.rows + k, j * b.cols + l)] = x * y
    return ExactMatrix(a.rows * b.rows, a.cols * b.cols, entries)


def linear_combination(coeffs: Sequence[Scalar], mats: Sequence[ExactMatrix]) -> ExactMatrix:
    if not mats:
        raise InvalidInputError("empty combination")
    acc: Dict[Tuple[int, int], Scalar] = {}
    for c, m in zip(coeffs, mats):
        if not is_zero(c):
            _axpy(acc, c, m.entries)
    return ExactMatrix(mats[0].rows, mats[0].cols, acc)


# ---------------------------------------------------------------------------
# Complex spans (echelon form over QQ_I)
# ---------------------------------------------------------------------------
class Span:
    """Complex span of sparse vectors with exact membership and coordinates.

    Independent vectors are picked greedily in insertion order from the pivots
    of one ``DomainMatrix.rref``. Queries reduce against the reduced echelon
    form of ``[B | I]``, whose right block carries each row's expression in the
    inserted vectors.
    """

    def __init__(self, vectors: Iterable[Mapping[Hashable, Scalar]] = ()) -> None:
        self._keys: List[Hashable] = []
        self._columns: Dict[Hashable, int] = {}
        self._basis: List[Dict[Hashable, Scalar]] = []
        self._origin: List[int] = []
        self._echelon: Optional[List[Tuple[Hashable, Dict, Dict[int, Scalar]]]] = None
        self._count = 0
        self.dependent: List[int] = []
        self._extend([clean(v) for v in vectors])

    @property
    def rank(self) -> int:
        return len(self._basis)

    def __len__(self) -> int:
        return self.rank

    def _column(self, key: Hashable) -> int:
        if key not in self._columns:
            self._columns[key] = len(self._keys)
            self._keys.append(key)
        return self._columns[key]

    def _extend(self, vectors: List[Dict[Hashable, Scalar]]) -> None:
        start, existing = self._count, len(self._basis)
        self._count += len(vectors)
        if not vectors:
            return
        rows: Dict[int, Dict[int, Scalar]] = {}
        for j, vector in enumerate(self._basis + vectors):
            for key, value in vector.items():
                rows.setdefault(self._column(key), {})[j] = value
        pivots: frozenset = frozenset()
        if rows:
            shape = (len(self._keys), existing + len(vectors))
            _, found = DomainMatrix(rows, shape, QQ_I).rref()
            pivots = frozenset(found)
        for k, vector in enumerate(vectors):
            if existing + k in pivots:
                self._basis.append(vector)
                self._origin.append(start + k)
            else:
                self.dependent.append(start + k)
        if len(self._basis) > existing:
            self._echelon = None

    def _rows(self) -> List[Tuple[Hashable, Dict, Dict[int, Scalar]]]:
        if self._echelon is None and not self._basis:
            self._echelon = []
        if self._echelon is None:
            width = len(self._keys)
            rows = {
                i: {**{self._columns[k]: v for k, v in vector.items()}, width + i: ONE}
                for i, vector in enumerate(self._basis)
            }
            shape = (len(self._basis), width + len(self._basis))
            reduced, pivots = DomainMatrix(rows, shape, QQ_I).rref()
            sdm = reduced.to_sdm()
            self._echelon = []
            for r, pc in enumerate(pivots):
                row = sdm.get(r, {})
                self._echelon.append((
                    self._keys[pc],
                    {self._keys[j]: v for j, v in row.items() if j < width},
                    {self._origin[j - width]: v for j, v in row.items() if j >= width},
                ))
        return self._echelon

    def _reduce(self, vector: Mapping[Hashable, Scalar]) -> Tuple[Dict, Dict[int, Scalar]]:
        residual = clean(vector)
        coords: Dict[int, Scalar] = {}
        for pivot, row, combo in self._rows():
            c = residual.get(pivot)
            if c is None:
                continue
            _axpy(residual, -c, row)
            _axpy(coords, c, combo)
        return residual, coords

    def add(self, vector: Mapping[Hashable, Scalar]) -> bool:
        """Insert a vector; return False (and record it) when it is dependent."""
        before = self.rank
        self._extend([clean(vector)])
        return self.rank > before

    def contains(self, vector: Mapping[Hashable, Scalar]) -> bool:
        residual, _ = self._reduce(vector)
        return not residual

    def coordinates(self, vector: Mapping[Hashable, Scalar]) -> Optional[Dict[int, Scalar]]:
        """Coefficients on the inserted vectors, or None outside the span."""
        residual, coords = self._reduce(vector)
        if residual:
            return None
        return clean(coords)


def matrix_span(mats: Iterable[ExactMatrix]) -> Span:
    return Span(m.entries for m in mats)


def same_span(a: Sequence[ExactMatrix], b: Sequence[ExactMatrix]) -> bool:
    span_a, span_b = matrix_span(a), matrix_span(b)
    return (
        span_a.rank == span_b.rank
        and all(span_a.contains(m.entries) for m in b)
        and all(span_b.contains(m.entries) for m in a)
    )


# ---------------------------------------------------------------------------
# Rational kernels
# ---------------------------------------------------------------------------
def _normalized(row: Mapping[int, Rational]) -> Optional[Tuple[Tuple[int, Rational], ...]]:
    items = sorted((j, v) for j, v in row.items() if v)
    if not items:
        return None
    lead = items[0][1]
    return tuple((j, v / lead) for j, v in items)


def rational_nullspace(
    equations: Iterable[Mapping[int, Rational]], unknowns: int
) -> List[List[Rational]]:
    """Basis of ``{v in QQ^unknowns : sum_j eq[j] v[j] = 0 for every equation}``."""
    unique = []
    seen = set()
    for eq in equations:
        key = _normalized(eq)
        if key is not None and key not in seen:
            seen.add(key)
            unique.append(dict(key))
    zero, one = QQ(0), QQ(1)
    if not unique:
        return [[one if k == j else zero for k in range(unknowns)] for j in range(unknowns)]
    dense = [[row.get(j, zero) for j in range(unknowns)] for row in unique]
    reduced, pivots = DomainMatrix(dense, (len(dense), unknowns), QQ).rref()
    values = reduced.to_Matrix()
    pivot_set = set(pivots)
    basis: List[List[Rational]] = []
    for free in range(unknowns):
        if free in pivot_set:
            continue
        vec = [zero] * unknowns
        vec[free] = one
        for r, pc in enumerate(pivots):
            vec[pc] = -QQ.from_sympy(values[r, free])
        basis.append(vec)
    return basis
