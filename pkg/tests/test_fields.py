"""GF(2)/GF(4) substrate tests.

The GF(4) multiplication table is checked against an independent oracle that
multiplies polynomials a + b*x symbolically and reduces modulo x^2 + x + 1.
Rank/nullspace is checked against a naive elimination oracle that works on
explicit 0/1 lists.
"""

from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcckit.fields import (
    F4_BETA,
    F4_BETA1,
    F4_ELEMENTS,
    F4_ONE,
    F4_ZERO,
    BitMatrix,
    BitVec,
    F4Elem,
    GF4_PROJECTIONS,
    f4_add_int,
    f4_mul,
    f4_mul_int,
    f4_trace,
    f4_trace_int,
    rank,
    rank_and_nullspace,
    span_dimension,
    systematic_subset,
)

# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def oracle_f4_mul(x: int, y: int) -> int:
    """Multiply (a1 + b1 t)(a2 + b2 t) in GF(2)[t], reduce mod t^2 + t + 1."""
    a1, b1 = x & 1, x >> 1
    a2, b2 = y & 1, y >> 1
    # coefficients of t^0, t^1, t^2 before reduction
    c0 = a1 * a2 % 2
    c1 = (a1 * b2 + b1 * a2) % 2
    c2 = b1 * b2 % 2
    # t^2 = t + 1
    c0 = (c0 + c2) % 2
    c1 = (c1 + c2) % 2
    return c0 | (c1 << 1)


def oracle_rank_nullspace(rows: list[list[int]]) -> tuple[int, list[list[int]]]:
    """Naive fraction-free Gaussian elimination on explicit 0/1 lists."""
    if not rows:
        return 0, []
    m = [list(r) for r in rows]
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(len(m)):
            if i != r and m[i][c]:
                m[i] = [(a + b) % 2 for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    basis = []
    pivot_set = set(pivots)
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [0] * ncols
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = m[i][f]
        basis.append(v)
    return len(pivots), basis


# ---------------------------------------------------------------------------
# GF(4)
# ---------------------------------------------------------------------------


def test_f4_mul_matches_polynomial_reduction_oracle():
    for x in F4_ELEMENTS:
        for y in F4_ELEMENTS:
            assert f4_mul_int(x, y) == oracle_f4_mul(x, y)


def test_f4_beta_squared_is_one_plus_beta():
    assert f4_mul_int(F4_BETA, F4_BETA) == F4_BETA1


def test_f4_one_is_identity():
    for x in F4_ELEMENTS:
        assert f4_mul_int(F4_ONE, x) == x


def test_f4_beta1_squared_is_beta():
    assert f4_mul_int(F4_BETA1, F4_BETA1) == F4_BETA


def test_f4_distributivity_exhaustive():
    for x in F4_ELEMENTS:
        for y in F4_ELEMENTS:
            for z in F4_ELEMENTS:
                lhs = f4_mul_int(x, f4_add_int(y, z))
                rhs = f4_add_int(f4_mul_int(x, y), f4_mul_int(x, z))
                assert lhs == rhs


def test_f4_mul_commutative_associative():
    for x in F4_ELEMENTS:
        for y in F4_ELEMENTS:
            assert f4_mul_int(x, y) == f4_mul_int(y, x)
            for z in F4_ELEMENTS:
                assert f4_mul_int(f4_mul_int(x, y), z) == f4_mul_int(x, f4_mul_int(y, z))


def test_trace_values():
    # Tr(x) = x + x^2, evaluated exhaustively
    for x in F4_ELEMENTS:
        expected = f4_add_int(x, f4_mul_int(x, x))
        assert expected in (F4_ZERO, F4_ONE)
        assert f4_trace_int(x) == expected
    assert f4_trace_int(F4_ZERO) == 0
    assert f4_trace_int(F4_ONE) == 0  # the trace kills the subfield F2
    assert f4_trace_int(F4_BETA) == 1
    assert f4_trace_int(F4_BETA1) == 1


def test_trace_is_gf2_linear():
    for x in F4_ELEMENTS:
        for y in F4_ELEMENTS:
            assert f4_trace_int(f4_add_int(x, y)) == f4_trace_int(x) ^ f4_trace_int(y)


def test_all_projections_linear_and_surjective():
    for name, proj in GF4_PROJECTIONS.items():
        vals = {proj(x) for x in F4_ELEMENTS}
        assert vals == {0, 1}, name
        for x in F4_ELEMENTS:
            for y in F4_ELEMENTS:
                assert proj(f4_add_int(x, y)) == proj(x) ^ proj(y), name


def test_const_and_trace_beta_are_identity_on_f2():
    for name in ("const", "trace_beta"):
        proj = GF4_PROJECTIONS[name]
        assert proj(F4_ZERO) == 0
        assert proj(F4_ONE) == 1


def test_f4elem_wrapper():
    b = F4Elem.from_int(F4_BETA)
    one = F4Elem.from_int(F4_ONE)
    assert f4_mul(b, b) == F4Elem.from_int(F4_BETA1)
    assert (b + one).value == F4_BETA1
    assert f4_trace(one) == 0
    with pytest.raises(ValueError):
        F4Elem(2, 0)


# ---------------------------------------------------------------------------
# BitVec / BitMatrix
# ---------------------------------------------------------------------------


def test_bitvec_basics():
    v = BitVec.from_bits([1, 0, 1, 1])
    assert v.length == 4
    assert v.support() == [0, 2, 3]
    assert v.popcount() == 3
    w = BitVec.from_support(4, [0, 1])
    assert (v ^ w).support() == [1, 2, 3]
    assert v.dot(w) == 1
    assert BitVec.from_hex(4, v.to_hex()) == v


def test_bitvec_rejects_pad_bits():
    with pytest.raises(ValueError):
        BitVec(3, 0b1000)


def test_bitmatrix_serialize_roundtrip():
    m = BitMatrix.from_rows([[1, 0, 1, 1, 0], [0, 1, 1, 0, 0], [1, 1, 1, 1, 1]])
    text = m.serialize()
    assert text.splitlines()[0] == "3 5"
    m2 = BitMatrix.deserialize(text)
    assert m2.rows == 3 and m2.cols == 5
    assert [r.bits for r in m2.row_data] == [r.bits for r in m.row_data]


def test_rank_identity():
    m = BitMatrix.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    r, basis = rank_and_nullspace(m)
    assert r == 3
    assert basis == []


def test_rank_single_parity_row():
    m = BitMatrix.from_rows([[1, 1, 1, 1]])
    r, basis = rank_and_nullspace(m)
    assert r == 1
    assert len(basis) == 3
    for v in basis:
        assert m.mul_vec(v).bits == 0


def test_rank_nullspace_random_vs_oracle():
    rng = random.Random(7)
    for _ in range(40):
        nrows = rng.randrange(1, 9)
        ncols = rng.randrange(1, 9)
        rows = [[rng.randrange(2) for _ in range(ncols)] for _ in range(nrows)]
        m = BitMatrix.from_rows(rows)
        r, basis = rank_and_nullspace(m)
        oracle_r, oracle_basis = oracle_rank_nullspace(rows)
        assert r == oracle_r
        assert len(basis) == len(oracle_basis) == ncols - r
        for v in basis:
            assert m.mul_vec(v).bits == 0
        # same span: oracle basis vectors reduce to zero against ours
        joint = basis + [BitVec.from_bits(v) for v in oracle_basis]
        assert span_dimension(joint) == len(basis)


def test_rank_equals_rank_of_transpose_random():
    rng = random.Random(20)
    for _ in range(20):
        rows = [[rng.randrange(2) for _ in range(20)] for _ in range(20)]
        m = BitMatrix.from_rows(rows)
        assert rank(m) == rank(m.transpose())


@given(st.lists(st.lists(st.integers(0, 1), min_size=6, max_size=6), min_size=1, max_size=8))
def test_nullspace_property(rows):
    m = BitMatrix.from_rows(rows)
    r, basis = rank_and_nullspace(m)
    assert r + len(basis) == m.cols
    for v in basis:
        assert m.mul_vec(v).bits == 0


def test_systematic_subset_standard_basis():
    n, k = 7, 3
    basis = [BitVec.from_support(n, [i]) for i in range(k)]
    assert systematic_subset(basis) == [0, 1, 2]


def test_systematic_subset_single_vector_tiebreak():
    assert systematic_subset([BitVec.from_bits([1, 1, 0])]) == [0]


def test_systematic_subset_rejects_dependent():
    v = BitVec.from_bits([1, 0, 1])
    with pytest.raises(ValueError):
        systematic_subset([v, v])


def test_systematic_subset_is_bijective():
    # restriction to S must hit all 2^k patterns exactly once
    rng = random.Random(3)
    for _ in range(20):
        n = 8
        vecs = []
        while span_dimension(vecs) < 3:
            cand = BitVec(n, rng.randrange(1, 2**n))
            if span_dimension(vecs + [cand]) > span_dimension(vecs):
                vecs.append(cand)
        s = systematic_subset(vecs)
        assert len(s) == 3
        seen = set()
        for mask in range(8):
            acc = 0
            for i in range(3):
                if (mask >> i) & 1:
                    acc ^= vecs[i].bits
            seen.add(tuple((acc >> j) & 1 for j in s))
        assert len(seen) == 8
