"""Chain enumeration, completeness, and pattern-count tests on the t=2 design.

Expected counts were computed by independent means before freezing: r=1
gives 30 = 2(n-1) ordered links (6 per triple, 5 triples); r=2 gives
720 = 30 * 24 because the block that produced the first link always reappears
as a triple of the new pivot, forbidding exactly 6 of the 30 second links.
"""

from __future__ import annotations

import random

import pytest

from lcckit.chains import (
    Chain,
    InvalidChainError,
    chain_from_line,
    chain_is_valid,
    chain_to_line,
    count_chains,
    count_chains_with_fixed_pattern,
    enumerate_chains,
    ordered_links,
    pattern_count_bound,
    sample_chain,
    verify_chain_completeness,
)
from lcckit.designs import BudgetExceededError, build_rm_design, derive_matchings


@pytest.fixture(scope="module")
def t2():
    lcc = build_rm_design(2)
    return lcc, derive_matchings(lcc)


@pytest.fixture(scope="module")
def t1():
    lcc = build_rm_design(1)
    return lcc, derive_matchings(lcc)


def test_ordered_links_count(t2):
    _, m = t2
    for u in range(16):
        links = ordered_links(m, u)
        assert len(links) == 30  # 6 * delta * n = 2(n-1)
        assert len(set(links)) == 30


def test_r1_count(t2):
    _, m = t2
    for u in range(16):
        assert count_chains(m, u, 1).count == 30


def test_r2_count_within_paper_window(t2):
    _, m = t2
    stats = count_chains(m, 0, 2)
    assert stats.count == 720
    assert stats.lower_bound == 484 and stats.upper_bound == 900
    assert stats.within_bounds


def test_r3_count_within_window(t2):
    _, m = t2
    stats = count_chains(m, 0, 3)
    assert stats.within_bounds


def test_t1_r2_empty(t1):
    _, m = t1
    assert count_chains(m, 0, 2).count == 0


def test_nondistinct_variant_is_product(t2):
    _, m = t2
    assert count_chains(m, 0, 2, distinct=False).count == 900


def test_stream_is_prefix_stable(t2):
    _, m = t2
    first = [c.to_tuple() for c in enumerate_chains(m, 3, 2)]
    second = [c.to_tuple() for c in enumerate_chains(m, 3, 2)]
    assert first == second
    assert first == sorted(first)  # lexicographic emission order


def test_budget_exceeded_carries_count(t2):
    _, m = t2
    with pytest.raises(BudgetExceededError) as err:
        list(enumerate_chains(m, 0, 2, max_chains=100))
    assert err.value.count_so_far == 100


def test_every_chain_valid_and_complete(t2):
    lcc, m = t2
    for u in (0, 7):
        for c in enumerate_chains(m, u, 2):
            assert chain_is_valid(m, c)
            assert verify_chain_completeness(lcc, c, m)


def test_r0_chain_vacuously_complete(t2):
    lcc, _ = t2
    c = Chain(head=5, links=())
    assert c.tail == 5
    assert verify_chain_completeness(lcc, c)


def test_corrupted_chain_flagged_invalid(t2):
    lcc, m = t2
    c = next(iter(enumerate_chains(m, 0, 2)))
    v1, v2, nxt = c.links[0]
    bad = Chain(head=c.head, links=(((v1 + 1) % 16, v2, nxt),) + c.links[1:])
    if chain_is_valid(m, bad, distinct=False):
        pytest.skip("corruption landed on another valid link")
    with pytest.raises(InvalidChainError):
        verify_chain_completeness(lcc, bad, m)


def test_random_chains_complete_r123(t2):
    lcc, m = t2
    rng = random.Random(42)
    checked = 0
    while checked < 300:
        r = rng.choice([1, 2, 3])
        u = rng.randrange(16)
        c = sample_chain(m, u, r, rng)
        if c is None:
            continue
        assert verify_chain_completeness(lcc, c, m)
        checked += 1


def test_halves_and_tail(t2):
    _, m = t2
    c = next(iter(enumerate_chains(m, 0, 3)))
    assert len(c.left_half) == len(c.right_half) == 3
    assert c.to_tuple()[0] == 0
    assert len(c.to_tuple()) == 10
    assert c.tail == c.links[-1][2]
    assert Chain.from_tuple(c.to_tuple()) == c


# ---------------------------------------------------------------------------
# fixed-pattern smoothness (exact counts vs the claimed ceilings)
# ---------------------------------------------------------------------------


def test_empty_pattern_is_total_count(t2):
    _, m = t2
    assert count_chains_with_fixed_pattern(m, 0, 2, [], "right") == 720


def test_single_vertex_right_pattern_r1(t2):
    _, m = t2
    for v in range(1, 16):
        cnt = count_chains_with_fixed_pattern(m, 0, 1, [v], "right")
        assert cnt <= pattern_count_bound(16, 1, 1, "right", tail_fixed=False) == 2


def test_full_left_pattern_with_tail(t2):
    _, m = t2
    rng = random.Random(5)
    bound = pattern_count_bound(16, 2, 2, "left", tail_fixed=True)
    assert bound == 8  # r! 2^r = 2 * 4
    for _ in range(50):
        c = sample_chain(m, 0, 2, rng)
        cnt = count_chains_with_fixed_pattern(m, 0, 2, c.left_half, "left", tail=c.tail)
        assert 1 <= cnt <= bound


@pytest.mark.parametrize("r", [1, 2, 3])
def test_smoothness_bounds_random_patterns(t2, r):
    lcc, m = t2
    rng = random.Random(100 + r)
    chains_cache = {u: list(enumerate_chains(m, u, r)) for u in range(16)}
    for _ in range(340 if r < 3 else 120):
        u = rng.randrange(16)
        t = rng.randint(0, r)
        side = rng.choice(["left", "right"])
        # draw the pattern from a real chain half so nonzero counts occur
        c = chains_cache[u][rng.randrange(len(chains_cache[u]))]
        half = c.left_half if side == "left" else c.right_half
        z = rng.sample(list(half), t)
        if side == "right":
            cnt = sum(1 for cc in chains_cache[u] if set(z) <= set(cc.right_half))
            assert cnt <= pattern_count_bound(16, r, t, "right", tail_fixed=False)
        else:
            w = c.tail
            cnt = sum(
                1 for cc in chains_cache[u] if cc.tail == w and set(z) <= set(cc.left_half)
            )
            assert cnt <= pattern_count_bound(16, r, t, "left", tail_fixed=True)


def test_chain_line_roundtrip(t2):
    _, m = t2
    c = next(iter(enumerate_chains(m, 2, 2)))
    line = chain_to_line(c)
    assert chain_from_line(line) == c
    assert min(int(tok) for tok in line.split()) >= 1
