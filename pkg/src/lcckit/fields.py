"""Exact arithmetic over GF(2) and GF(4).

GF(2) vectors and matrices are bit-packed into Python integers (bit i of
``bits`` is coordinate i), which makes row XOR, parity and Gaussian
elimination word-level operations.  GF(4) is represented as F2[beta] modulo
beta^2 + beta + 1; an element a + b*beta is packed into the integer
``a | (b << 1)``, so the four elements are 0, 1, 2 (= beta), 3 (= 1 + beta).

Three GF(4) -> GF(2) linear projections are exposed:

* ``f4_trace``      -- the field trace Tr(x) = x + x^2, i.e. the beta
                       coefficient.  Note Tr(1) = 0: the trace is *not* the
                       identity on the subfield F2.
* ``f4_const_proj`` -- the constant-coefficient projection a + b*beta -> a,
                       which is the identity on F2.
* ``f4_trace_beta`` -- x -> Tr(beta * x) = a + b, also the identity on F2.

All three are measured by the code-dimension experiment in
:mod:`lcckit.designs` rather than one being assumed "the" projection.

Everything here is pure and deterministic; BitVec/BitMatrix values are
immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

# ---------------------------------------------------------------------------
# GF(4)
# ---------------------------------------------------------------------------

F4_ZERO = 0
F4_ONE = 1
F4_BETA = 2
F4_BETA1 = 3  # 1 + beta

F4_ELEMENTS = (F4_ZERO, F4_ONE, F4_BETA, F4_BETA1)


def f4_add_int(x: int, y: int) -> int:
    """Addition in GF(4) on packed ints (characteristic 2: XOR)."""
    return x ^ y


def f4_mul_int(x: int, y: int) -> int:
    """Multiplication in GF(4) on packed ints.

    (a1 + b1 b)(a2 + b2 b) = a1 a2 + b1 b2 + (a1 b2 + a2 b1 + b1 b2) b
    using b^2 = b + 1.
    """
    a1, b1 = x & 1, x >> 1
    a2, b2 = y & 1, y >> 1
    a = (a1 & a2) ^ (b1 & b2)
    b = (a1 & b2) ^ (a2 & b1) ^ (b1 & b2)
    return a | (b << 1)


def f4_trace_int(x: int) -> int:
    """Field trace Tr(x) = x + x^2 as a GF(2) bit (the beta coefficient)."""
    return x >> 1


def f4_const_proj_int(x: int) -> int:
    """Constant-coefficient projection a + b*beta -> a."""
    return x & 1


def f4_trace_beta_int(x: int) -> int:
    """x -> Tr(beta * x) = a + b."""
    return (x & 1) ^ (x >> 1)


#: Named GF(4) -> GF(2) linear projections used by the dimension experiment.
GF4_PROJECTIONS: dict[str, Callable[[int], int]] = {
    "trace": f4_trace_int,
    "const": f4_const_proj_int,
    "trace_beta": f4_trace_beta_int,
}


@dataclass(frozen=True)
class F4Elem:
    """An element a + b*beta of GF(4), beta^2 = beta + 1."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise ValueError(f"F4Elem coefficients must be bits, got ({self.a}, {self.b})")

    @classmethod
    def from_int(cls, v: int) -> "F4Elem":
        return cls(v & 1, v >> 1)

    @property
    def value(self) -> int:
        return self.a | (self.b << 1)

    def __add__(self, other: "F4Elem") -> "F4Elem":
        return F4Elem.from_int(f4_add_int(self.value, other.value))

    def __mul__(self, other: "F4Elem") -> "F4Elem":
        return F4Elem.from_int(f4_mul_int(self.value, other.value))


def f4_mul(x: F4Elem, y: F4Elem) -> F4Elem:
    return x * y


def f4_add(x: F4Elem, y: F4Elem) -> F4Elem:
    return x + y


def f4_trace(x: F4Elem) -> int:
    """True field trace Tr(x) = x + x^2 in GF(2)."""
    return f4_trace_int(x.value)


def f4_const_proj(x: F4Elem) -> int:
    return f4_const_proj_int(x.value)


# ---------------------------------------------------------------------------
# Bit-packed GF(2) vectors and matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BitVec:
    """A GF(2) vector of fixed length, bits packed into an int (bit i = x_i)."""

    length: int
    bits: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.bits >> self.length:
            raise ValueError("pad bits beyond `length` must be zero")

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(length, 0)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVec":
        value = 0
        n = 0
        for i, b in enumerate(bits):
            if b:
                value |= 1 << i
            n = i + 1
        return cls(n, value)

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> "BitVec":
        value = 0
        for i in support:
            if not 0 <= i < length:
                raise ValueError(f"index {i} out of range for length {length}")
            value |= 1 << i
        return cls(length, value)

    def get(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __xor__(self, other: "BitVec") -> "BitVec":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVec(self.length, self.bits ^ other.bits)

    def dot(self, other: "BitVec") -> int:
        """GF(2) inner product."""
        if self.length != other.length:
            raise ValueError("length mismatch")
        return (self.bits & other.bits).bit_count() & 1

    def parity_on(self, mask: int) -> int:
        """Parity of this vector restricted to the coordinates in ``mask``."""
        return (self.bits & mask).bit_count() & 1

    def popcount(self) -> int:
        return self.bits.bit_count()

    def support(self) -> list[int]:
        return [i for i in range(self.length) if (self.bits >> i) & 1]

    def to_hex(self) -> str:
        width = max(1, (self.length + 3) // 4)
        return format(self.bits, f"0{width}x")

    @classmethod
    def from_hex(cls, length: int, s: str) -> "BitVec":
        return cls(length, int(s, 16))

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.length)]


class BitMatrix:
    """A GF(2) matrix stored as a list of bit-packed rows."""

    def __init__(self, rows: int, cols: int, row_data: Sequence[BitVec] | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimensions")
        if row_data is None:
            row_data = [BitVec.zeros(cols) for _ in range(rows)]
        if len(row_data) != rows:
            raise ValueError("row count mismatch")
        for r in row_data:
            if r.length != cols:
                raise ValueError("row length mismatch")
        self.rows = rows
        self.cols = cols
        self.row_data = list(row_data)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "BitMatrix":
        cols = len(rows[0]) if rows else 0
        data = [BitVec.from_support(cols, [i for i, b in enumerate(r) if b]) for r in rows]
        return cls(len(rows), cols, data)

    def row(self, i: int) -> BitVec:
        return self.row_data[i]

    def column_bits(self, j: int) -> int:
        """Column j packed into an int (bit i = entry (i, j))."""
        v = 0
        for i, r in enumerate(self.row_data):
            if (r.bits >> j) & 1:
                v |= 1 << i
        return v

    def transpose(self) -> "BitMatrix":
        data = [BitVec(self.rows, self.column_bits(j)) for j in range(self.cols)]
        return BitMatrix(self.cols, self.rows, data)

    def mul_vec(self, x: BitVec) -> BitVec:
        if x.length != self.cols:
            raise ValueError("dimension mismatch")
        out = 0
        for i, r in enumerate(self.row_data):
            if (r.bits & x.bits).bit_count() & 1:
                out |= 1 << i
        return BitVec(self.rows, out)

    def serialize(self) -> str:
        """Header 'rows cols', then one hex string per row."""
        lines = [f"{self.rows} {self.cols}"]
        lines.extend(r.to_hex() for r in self.row_data)
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str) -> "BitMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        rows, cols = (int(tok) for tok in lines[0].split())
        data = [BitVec.from_hex(cols, ln.strip()) for ln in lines[1 : 1 + rows]]
        return cls(rows, cols, data)


def _row_reduce(row_bits: list[int], cols: int) -> tuple[list[int], list[int]]:
    """In-place RREF over GF(2).

    Partial pivoting by lowest row index, columns scanned left to right;
    output is deterministic.  Returns (reduced rows, pivot column list).
    """
    rows = list(row_bits)
    pivot_cols: list[int] = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, len(rows)):
            if (rows[i] >> c) & 1:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and (rows[i] >> c) & 1:
                rows[i] ^= rows[r]
        pivot_cols.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivot_cols


def rank_and_nullspace(m: BitMatrix) -> tuple[int, list[BitVec]]:
    """GF(2) row rank of ``m`` and a basis of {x : m x = 0}.

    rank + len(basis) == m.cols.  The basis is in the standard RREF form:
    one vector per free column, with a 1 in that free column.
    """
    if m.rows == 0:
        return 0, [BitVec.from_support(m.cols, [j]) for j in range(m.cols)]
    reduced, pivot_cols = _row_reduce([r.bits for r in m.row_data], m.cols)
    rank = len(pivot_cols)
    pivot_set = set(pivot_cols)
    basis: list[BitVec] = []
    for f in range(m.cols):
        if f in pivot_set:
            continue
        bits = 1 << f
        for i, c in enumerate(pivot_cols):
            if (reduced[i] >> f) & 1:
                bits |= 1 << c
        basis.append(BitVec(m.cols, bits))
    return rank, basis


def rank(m: BitMatrix) -> int:
    return rank_and_nullspace(m)[0]


def systematic_subset(basis: Sequence[BitVec]) -> list[int]:
    """Coordinate set S with |S| = len(basis) on which the span is systematic.

    Returns the pivot columns of the row-reduced basis (lowest-index
    tie-break), so restriction of the span to S is a bijection onto
    {0,1}^|S|.  Raises ValueError if the input vectors are dependent.
    """
    if not basis:
        return []
    cols = basis[0].length
    _, pivot_cols = _row_reduce([b.bits for b in basis], cols)
    if len(pivot_cols) != len(basis):
        raise ValueError("basis vectors are linearly dependent")
    return pivot_cols


def span_dimension(vectors: Sequence[BitVec]) -> int:
    """Dimension of the GF(2) span of ``vectors``."""
    if not vectors:
        return 0
    cols = vectors[0].length
    _, pivots = _row_reduce([v.bits for v in vectors], cols)
    return len(pivots)


def span_basis(vectors: Sequence[BitVec]) -> list[BitVec]:
    """A deterministic basis (nonzero RREF rows) of the span of ``vectors``."""
    if not vectors:
        return []
    cols = vectors[0].length
    reduced, pivots = _row_reduce([v.bits for v in vectors], cols)
    return [BitVec(cols, reduced[i]) for i in range(len(pivots))]
