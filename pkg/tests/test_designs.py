"""Design construction and dual-code tests.

Block counts and pair coverage are checked by exhaustive pair scans, and the
line-closure property (values of any degree-<=2 polynomial over GF(4) sum to
zero on every block) is checked exhaustively at t=1 and on random
(block, polynomial) pairs at t=2,3.
"""

from __future__ import annotations

import random
from math import comb

import pytest

from lcckit.designs import (
    BudgetExceededError,
    build_design,
    build_rm_design,
    claimed_dimension,
    code_dimension_report,
    decode_checks_hold,
    delta_of,
    derive_matchings,
    design_from_json,
    design_to_json,
    f4_points,
    incidence_matrix,
    matchings_are_perfect,
    mutate_drop_block,
    mutate_duplicate_block,
    projected_code_in_dual,
    verify_design,
)
from lcckit.fields import f4_add_int, f4_mul_int, rank_and_nullspace


def oracle_pair_cover_count(design) -> dict:
    cover = {}
    for block in design.blocks:
        for i in range(4):
            for j in range(i + 1, 4):
                key = (block[i], block[j])
                cover[key] = cover.get(key, 0) + 1
    return cover


def eval_poly(coeffs, point):
    """coeffs: dict monomial-tuple -> F4 scalar; monomial as ((var, exp), ...)."""
    total = 0
    for mon, c in coeffs.items():
        term = c
        for var, exp in mon:
            for _ in range(exp):
                term = f4_mul_int(term, point[var])
        total = f4_add_int(total, term)
    return total


@pytest.mark.parametrize("t,n,nblocks", [(1, 4, 1), (2, 16, 20), (3, 64, 336)])
def test_block_counts(t, n, nblocks):
    d = build_design(t)
    assert d.n == n
    assert len(d.blocks) == nblocks
    assert nblocks == comb(n, 2) // 6


def test_t1_single_block():
    d = build_design(1)
    assert d.blocks == ((0, 1, 2, 3),)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_pair_coverage_exact(t):
    d = build_design(t)
    report = verify_design(d)
    assert report.ok
    cover = oracle_pair_cover_count(d)
    assert len(cover) == comb(d.n, 2)
    assert set(cover.values()) == {1}


def test_dropped_block_fails_verification():
    d = mutate_drop_block(build_design(2))
    report = verify_design(d)
    assert not report.ok
    assert report.pairs_uncovered == 6
    assert report.pairs_multicovered == 0


def test_duplicated_block_fails_verification():
    d = mutate_duplicate_block(build_design(2))
    report = verify_design(d)
    assert not report.ok
    assert report.pairs_multicovered == 6
    assert report.pairs_uncovered == 0


def test_budget_rejected():
    with pytest.raises(BudgetExceededError):
        build_design(4, max_points=100)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_matchings_partition(t):
    lcc = build_rm_design(t)
    m = derive_matchings(lcc)
    assert matchings_are_perfect(m, lcc.n)
    for hu in m:
        assert len(hu) == (lcc.n - 1) // 3


def test_t1_matching_of_vertex_zero():
    m = derive_matchings(build_rm_design(1))
    assert m[0] == ((1, 2, 3),)


def test_derive_matchings_rejects_broken_design():
    d = mutate_drop_block(build_design(2))
    with pytest.raises(ValueError):
        derive_matchings(d)


@pytest.mark.parametrize("t", [1, 2])
def test_decode_checks_on_dual_basis(t):
    lcc = build_rm_design(t)
    assert decode_checks_hold(lcc)


def test_t2_parity_check_count():
    lcc = build_rm_design(2)
    m = derive_matchings(lcc)
    checks = sum(len(hu) for hu in m) * len(lcc.dual_basis)
    assert checks == 16 * 5 * lcc.dimension_k


def test_dual_basis_satisfies_blocks():
    lcc = build_rm_design(2)
    inc = incidence_matrix(lcc.design)
    for x in lcc.dual_basis:
        assert inc.mul_vec(x).bits == 0
    assert lcc.dimension_k == len(lcc.dual_basis)


def test_rank_matches_naive_oracle_t2():
    # independent naive elimination on explicit lists
    lcc = build_rm_design(2)
    inc = incidence_matrix(lcc.design)
    rows = [r.to_list() for r in inc.row_data]
    m = [list(r) for r in rows]
    rank = 0
    for c in range(16):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                m[i] = [(a + b) % 2 for a, b in zip(m[i], m[rank])]
        rank += 1
    assert rank_and_nullspace(inc)[0] == rank
    assert lcc.dimension_k == 16 - rank


def test_line_closure_t1_exhaustive():
    d = build_design(1)
    pts = f4_points(1)
    block = d.blocks[0]
    for a0 in range(4):
        for a1 in range(4):
            for a2 in range(4):
                coeffs = {(): a0, ((0, 1),): a1, ((0, 2),): a2}
                total = 0
                for v in block:
                    total = f4_add_int(total, eval_poly(coeffs, pts[v]))
                assert total == 0


@pytest.mark.parametrize("t", [2, 3])
def test_line_closure_random(t):
    rng = random.Random(11 + t)
    d = build_design(t)
    pts = f4_points(t)
    monomials = [()]
    monomials += [((i, 1),) for i in range(t)] + [((i, 2),) for i in range(t)]
    monomials += [((i, 1), (j, 1)) for i in range(t) for j in range(i + 1, t)]
    for _ in range(1000):
        block = d.blocks[rng.randrange(len(d.blocks))]
        coeffs = {mon: rng.randrange(4) for mon in monomials}
        total = 0
        for v in block:
            total = f4_add_int(total, eval_poly(coeffs, pts[v]))
        assert total == 0


@pytest.mark.parametrize("t,k", [(2, 4), (3, 7)])
def test_dimension_report(t, k):
    rep = code_dimension_report(t)
    assert rep.claimed_k == k == claimed_dimension(t)
    assert rep.dim_dual_code >= k
    assert rep.any_match()
    # the identity-on-F2 projections with GF(2) message coefficients hit k
    for row in rep.rows:
        if row.coefficients == "F2" and row.monomials == "multilinear":
            if row.projection in ("const", "trace_beta"):
                assert row.dimension == k
        if row.coefficients == "F4":
            # full-code image never drops below the F2-restricted span
            assert row.dimension >= k
            assert row.dimension <= rep.dim_dual_code


def test_dual_dim_dominates_trace_image():
    rep = code_dimension_report(2)
    for row in rep.rows:
        assert row.dimension <= rep.dim_dual_code


def test_blocklength_bound():
    # n <= 2^(2 sqrt(2k)) sanity at t=2: 16 <= 2^(2 sqrt 8)
    rep = code_dimension_report(2)
    assert rep.n <= 2 ** (2 * (2 * rep.claimed_k) ** 0.5)


def test_projected_code_inside_dual():
    for proj in ("trace", "const", "trace_beta"):
        assert projected_code_in_dual(2, proj)


def test_delta():
    assert delta_of(16) == 5 / 16  # 1/3 - 1/48
    assert 6 * delta_of(16) * 16 == 30


def test_design_json_roundtrip():
    lcc = build_rm_design(2)
    text = design_to_json(lcc)
    back = design_from_json(text)
    assert back.design == lcc.design
    assert back.dual_basis == lcc.dual_basis
    assert back.dimension_k == lcc.dimension_k
    # 1-based on disk
    import json

    payload = json.loads(text)
    assert min(min(b) for b in payload["blocks"]) == 1
