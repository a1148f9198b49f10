"""Kikuchi graph tests: edge law, moments vs row-enumeration oracle,
pruning/splitting/matching, and the 2-LDC bound.

The exact second moments at (n=16, r=1, l=2) are cross-checked against an
oracle that enumerates every row of the graph directly (all C(16,2) right
vertices and all C(16,2) x 16 left vertices) and counts degrees by scanning
the chain list.  Matching sizes are cross-checked against scipy's bipartite
matcher.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from math import comb

import pytest

from lcckit.chains import Chain, enumerate_chains
from lcckit.designs import BudgetExceededError, build_rm_design, derive_matchings
from lcckit.kikuchi_graph import (
    KikuchiEdge,
    KikuchiGraph,
    KikuchiGraphParams,
    MOMENTS_CSV_HEADER,
    assemble_2ldc,
    binomial_fact_check,
    build_graph,
    degree_moments,
    degree_moments_exact,
    degree_moments_monte_carlo,
    edge_decodes,
    edges_of_chain,
    first_moment_window,
    hopcroft_karp,
    hypergeom_term,
    moment_window,
    prune_and_match,
    schedule_parameters,
    two_ldc_bound_check,
)


@pytest.fixture(scope="module")
def t2():
    lcc = build_rm_design(2)
    return lcc, derive_matchings(lcc)


# ---------------------------------------------------------------------------
# params
# ---------------------------------------------------------------------------


def test_params_validation():
    with pytest.raises(ValueError):
        KikuchiGraphParams(n=16, r=3, ell=2, head=0)
    with pytest.raises(ValueError):
        KikuchiGraphParams(n=16, r=2, ell=6, head=0)  # ell^4 over budget
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=0)
    assert p.N == 560
    assert p.edges_per_chain == comb(12, 1) == 12
    d_l, d_r = p.mean_degrees(720)
    assert d_r == Fraction(720 * 12, 560)
    assert d_r == 16 * d_l


def test_schedule_helper():
    r, ell = schedule_parameters(16, gamma=1.0)
    assert ell == 2 * r - 1
    assert r >= 2


# ---------------------------------------------------------------------------
# explicit graph
# ---------------------------------------------------------------------------


def test_edge_law_exact(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=0)
    g = build_graph(lcc, p, m=m)
    assert g.edge_count == len(g.chains) * p.edges_per_chain == 720 * 12


def test_edges_match_u_enumeration_oracle(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=1)
    g = build_graph(lcc, p, m=m)
    by_label: dict[int, set] = {}
    for e in g.edges:
        by_label.setdefault(e.label, set()).add((e.s_mask, e.w, e.t_mask))
    for idx in random.Random(0).sample(range(len(g.chains)), 25):
        c = g.chains[idx]
        halves = set(c.left_half) | set(c.right_half)
        oracle = set()
        for u_set in combinations([v for v in range(16) if v not in halves], p.ell - p.r):
            s = set(c.left_half) | set(u_set)
            t = set(c.right_half) | set(u_set)
            s_mask = sum(1 << v for v in s)
            t_mask = sum(1 << v for v in t)
            oracle.add((s_mask, c.tail, t_mask))
        assert by_label[idx] == oracle


def test_every_edge_decodes(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=5)
    g = build_graph(lcc, p, m=m)
    assert all(edge_decodes(lcc, 5, e) for e in g.edges)


def test_nondistinct_chain_edge_contribution(t2):
    lcc, m = t2
    # a chain whose halves overlap as sets yields 0 or != C(n-2r, l-r) edges
    overlapping = None
    for c in enumerate_chains(m, 0, 2, distinct=False):
        if set(c.left_half) & set(c.right_half):
            overlapping = c
            break
    assert overlapping is not None
    cnt = sum(1 for _ in edges_of_chain(overlapping, 16, 3))
    assert cnt == 0 or cnt != comb(12, 1)


def test_empty_chain_set_gives_empty_graph(t2):
    lcc, _ = t2
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=0)
    g = KikuchiGraph(params=p, chains=[], edges=[])
    assert g.edge_count == 0


def test_budget_error(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=0)
    with pytest.raises(BudgetExceededError):
        build_graph(lcc, p, m=m, max_left_vertices=100)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def oracle_moments_16_1_2(lcc, m):
    """Direct row enumeration over all right and left vertices."""
    chains = list(enumerate_chains(m, 0, 1))
    n = 16
    right_total = Fraction(0)
    for t_set in combinations(range(n), 2):
        t = set(t_set)
        deg = sum(
            1
            for c in chains
            if set(c.right_half) <= t and not (set(c.left_half) & t)
        )
        right_total += deg * deg
    er2 = right_total / comb(n, 2)
    left_total = Fraction(0)
    for s_set in combinations(range(n), 2):
        s = set(s_set)
        for w in range(n):
            deg = sum(
                1
                for c in chains
                if c.tail == w and set(c.left_half) <= s and not (set(c.right_half) & s)
            )
            left_total += deg * deg
    el2 = left_total / (n * comb(n, 2))
    return el2, er2


def test_exact_moments_match_row_oracle(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=1, ell=2, head=0)
    rep = degree_moments_exact(lcc, p, m=m)
    el2, er2 = oracle_moments_16_1_2(lcc, m)
    assert Fraction(rep.d_right_sq).limit_denominator(10**9) == er2
    assert Fraction(rep.d_left_sq).limit_denominator(10**9) == el2
    assert rep.d_right == Fraction(7, 2)
    assert rep.d_left == Fraction(7, 32)


def test_hypergeometric_normalization():
    for r, ell in [(1, 2), (2, 3), (3, 7), (4, 9)]:
        total = sum(hypergeom_term(r, ell, t) for t in range(r + 1))
        assert total == 1


def test_first_moment_window(t2):
    _, m = t2
    stats = first_moment_window(16, 2, 3, chain_count=720)
    assert stats["upper_holds"]
    assert stats["d_right_exact"] == Fraction(720 * 12, 560)
    assert 0 <= stats["c_measured"] <= 32


def test_exact_moment_windows_pass(t2):
    lcc, m = t2
    for r, ell in [(1, 2), (2, 3)]:
        p = KikuchiGraphParams(n=16, r=r, ell=ell, head=0)
        rep = degree_moments_exact(lcc, p, m=m)
        assert moment_window(rep.d_right_sq, rep.formula_right, 16, r, ell, rep.d_right)["ok"]
        assert moment_window(rep.d_left_sq, rep.formula_left, 16, r, ell, rep.d_left)["ok"]


def test_right_formula_is_tight_at_16_1_2(t2):
    lcc, m = t2
    rep = degree_moments_exact(lcc, KikuchiGraphParams(n=16, r=1, ell=2, head=0), m=m)
    # the right-hand formula is a genuine (1 + o(1)) identity
    assert abs(rep.ratio_right - 1) < 0.05


def test_monte_carlo_agrees_with_exact(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=1, ell=2, head=0)
    exact = degree_moments_exact(lcc, p, m=m)
    mc = degree_moments_monte_carlo(lcc, p, seed=3, samples=4000, m=m)
    assert abs(mc.d_right_sq - exact.d_right_sq) <= 4 * mc.se_right
    assert abs(mc.d_left_sq - exact.d_left_sq) <= 4 * mc.se_left
    assert mc.d_right == exact.d_right  # means are exact in both modes


def test_monte_carlo_deterministic_for_seed(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=1, ell=2, head=0)
    a = degree_moments_monte_carlo(lcc, p, seed=7, samples=500, m=m)
    b = degree_moments_monte_carlo(lcc, p, seed=7, samples=500, m=m)
    assert a.d_right_sq == b.d_right_sq and a.d_left_sq == b.d_left_sq


def test_moments_mode_dispatch(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=1, ell=2, head=0)
    with pytest.raises(ValueError):
        degree_moments(lcc, p, mode="monte_carlo", m=m)  # seed required
    with pytest.raises(ValueError):
        degree_moments(lcc, p, mode="bogus", m=m)
    rep = degree_moments(lcc, p, mode="exact", m=m)
    row = rep.csv_row()
    assert row.startswith("16,1,2,exact,")
    assert len(row.split(",")) == len(MOMENTS_CSV_HEADER.splitlines()[1].split(","))


# ---------------------------------------------------------------------------
# binomial inequality
# ---------------------------------------------------------------------------


def test_binomial_fact_known_values():
    # n=12, r=2, t=1, l=3: LHS = C(2,1) 1! C(12,3) C(12,0) / C(8,1)^2
    res = binomial_fact_check(12, 2, 1, 3)
    assert res["lhs"] == Fraction(2 * comb(12, 3) * comb(12, 0), comb(8, 1) ** 2)
    assert res["rhs"] == Fraction(12 * comb(1, 1), comb(3, 2))
    assert res["holds_at_32"]
    # n=12, r=2, t=2, l=3: LHS = 2! C(12,3) C(12,1) / C(8,1)^2
    res2 = binomial_fact_check(12, 2, 2, 3)
    assert res2["lhs"] == Fraction(2 * comb(12, 3) * 12, comb(8, 1) ** 2)
    assert res2["rhs"] == Fraction(144, comb(3, 2))
    assert res2["holds_at_32"]


def test_binomial_fact_zero_cases():
    res = binomial_fact_check(12, 3, 0, 3)  # l - 2r < 0 on both sides
    assert res["lhs"] == 0 and res["rhs"] == 0
    assert res["c_needed"] == 0.0


def test_binomial_fact_random_admissible():
    rng = random.Random(99)
    worst = 0.0
    for _ in range(300):
        ell = rng.randint(1, 12)
        n = rng.randint(4 * ell, 256)
        r = rng.randint(1, ell)
        t = rng.randint(0, r)
        res = binomial_fact_check(n, r, t, ell)
        worst = max(worst, res["c_needed"])
        assert res["holds_at_32"], (n, r, t, ell, res)
    assert worst <= 32.0


def test_binomial_fact_rejects_inadmissible():
    with pytest.raises(ValueError):
        binomial_fact_check(16, 3, 1, 2)  # ell < r


# ---------------------------------------------------------------------------
# pruning, splitting, matching
# ---------------------------------------------------------------------------


def _dummy_chains(count):
    return [Chain(head=0, links=((1, 2, 3),)) for _ in range(count)]


def test_biregular_toy_nothing_pruned_perfect_matching():
    # 64 left vertices of degree 1, 8 right of degree 8; d_L = 1, d_R = 8
    p = KikuchiGraphParams(n=8, r=1, ell=1, head=0)
    edges = [
        KikuchiEdge(s_mask=1 << v, w=w, t_mask=1 << v, label=v * 8 + w)
        for v in range(8)
        for w in range(8)
    ]
    g = KikuchiGraph(params=p, chains=_dummy_chains(64), edges=edges)
    kept, matching, stats = prune_and_match(g, slack=0.5)
    assert stats.left_pruned == 0 and stats.right_pruned == 0
    assert stats.edges_after == 64
    assert stats.matching_size == 64  # perfect after splitting
    assert stats.matching_ratio == 1.0
    assert stats.max_right_degree_after_split == 1


def test_star_left_vertex_pruned():
    # one left vertex carrying all 8 edges while d_L = 8/64
    p = KikuchiGraphParams(n=8, r=1, ell=1, head=0)
    edges = [
        KikuchiEdge(s_mask=1 << 0, w=0, t_mask=1 << v, label=v) for v in range(8)
    ]
    g = KikuchiGraph(params=p, chains=_dummy_chains(8), edges=edges)
    kept, matching, stats = prune_and_match(g, slack=0.5)
    assert stats.left_pruned == 1
    assert stats.edges_after == 0


def test_splitting_preserves_edges_and_caps_degree(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=0)
    g = build_graph(lcc, p, m=m)
    kept, matching, stats = prune_and_match(g)
    assert stats.edges_after == stats.edges_before  # slack window is loose here
    deg_r: dict[int, int] = {}
    for e in kept:
        deg_r[e.t_mask] = deg_r.get(e.t_mask, 0) + 1
    cap = -(-max(deg_r.values()) // p.n)  # ceil
    assert stats.max_right_degree_after_split <= cap


def test_matching_is_valid(t2):
    lcc, m = t2
    p = KikuchiGraphParams(n=16, r=2, ell=3, head=0)
    g = build_graph(lcc, p, m=m)
    kept, matching, _ = prune_and_match(g)
    kept_set = {(e.s_mask, e.w, e.t_mask) for e in kept}
    lefts = set()
    rights = set()
    for me in matching:
        assert (me.s_mask, me.w, me.t_mask) in kept_set
        assert (me.s_mask, me.w) not in lefts
        assert (me.t_mask, me.copy) not in rights
        lefts.add((me.s_mask, me.w))
        rights.add((me.t_mask, me.copy))


def test_hopcroft_karp_vs_scipy():
    import numpy as np
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_bipartite_matching

    rng = random.Random(17)
    for _ in range(25):
        nl, nr = rng.randint(1, 12), rng.randint(1, 12)
        adj = [sorted({rng.randrange(nr) for _ in range(rng.randint(0, 4))}) for _ in range(nl)]
        ours = sum(1 for v in hopcroft_karp(adj, nr) if v != -1)
        rows = [u for u in range(nl) for _ in adj[u]]
        cols = [v for u in range(nl) for v in adj[u]]
        mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(nl, nr))
        theirs = int((maximum_bipartite_matching(mat, perm_type="column") != -1).sum())
        assert ours == theirs


# ---------------------------------------------------------------------------
# 2-LDC
# ---------------------------------------------------------------------------


def test_hadamard_style_bound_sanity():
    # complete pair matchings on 4 vertices, k = 2: equality 2 <= 2
    delta_prime, ok = two_ldc_bound_check([2, 2], k=2, block_length=4)
    assert delta_prime == Fraction(1, 2)
    assert ok
    assert float(2 * delta_prime * 2) == 2.0


def test_empty_matchings_bound_trivial():
    delta_prime, ok = two_ldc_bound_check([0, 0], k=2, block_length=4)
    assert delta_prime == 0 and ok


def test_assemble_2ldc_t2(t2):
    lcc, m = t2
    ldc = assemble_2ldc(lcc, r=2, ell=3, m=m)
    assert ldc.decode_ok
    assert ldc.bound_holds
    assert ldc.k == lcc.dimension_k
    assert ldc.block_length == 2 * 16 * comb(16, 3)
    assert all(len(v) > 0 for v in ldc.matchings.values())
    assert ldc.delta_prime > 0
