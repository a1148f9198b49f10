"""Enumeration and validation of correction chains over a matching family.

An r-chain with head u0 is an ordered sequence (u0, v1, v2, u1, ..., u_r)
where each link {v_{2h+1}, v_{2h+2}, u_{h+1}} is a correction triple of the
current pivot u_h, so the per-link identities x_{v} + x_{v'} + x_{u_{h+1}} =
x_{u_h} telescope to

    x_{u_r} + sum_{v in C_L} x_v + sum_{v in C_R} x_v = x_{u_0}.

Each unordered triple gives 6 ordered links (3 pivot choices x 2 orders of
the remaining pair), so a perfect matching family offers exactly
6*delta*n = 2(n-1) ordered links per step.  By default all the v's of a
chain must be pairwise distinct; the non-distinct variant is kept behind a
flag for moment comparisons.

Chains are produced by a depth-first stream in lexicographic order of the
ordered link sequence, so enumeration is prefix-stable and deterministic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .designs import BudgetExceededError, DesignLcc, MatchingFamily, delta_of

DEFAULT_MAX_CHAINS = 2_000_000


class InvalidChainError(ValueError):
    """The sequence is not a chain over the given matching family."""


@dataclass(frozen=True)
class Chain:
    """Head plus ordered links (v_{2h+1}, v_{2h+2}, u_{h+1})."""

    head: int
    links: tuple[tuple[int, int, int], ...]

    @property
    def r(self) -> int:
        return len(self.links)

    @property
    def left_half(self) -> tuple[int, ...]:
        return tuple(link[0] for link in self.links)

    @property
    def right_half(self) -> tuple[int, ...]:
        return tuple(link[1] for link in self.links)

    @property
    def tail(self) -> int:
        return self.links[-1][2] if self.links else self.head

    def to_tuple(self) -> tuple[int, ...]:
        out = [self.head]
        for link in self.links:
            out.extend(link)
        return tuple(out)

    @classmethod
    def from_tuple(cls, seq: Sequence[int]) -> "Chain":
        if len(seq) % 3 != 1:
            raise InvalidChainError(f"length {len(seq)} is not 3r+1")
        head = seq[0]
        links = tuple(tuple(seq[1 + 3 * h : 4 + 3 * h]) for h in range(len(seq) // 3))
        return cls(head=head, links=links)


@dataclass(frozen=True)
class ChainSetStats:
    """Count of r-chains per head against the (6dn - 4r)^r .. (6dn)^r window."""

    n: int
    r: int
    count: int

    @property
    def delta(self) -> Fraction:
        return delta_of(self.n)

    @property
    def upper_bound(self) -> int:
        return (2 * (self.n - 1)) ** self.r

    @property
    def lower_bound(self) -> int:
        return max(0, 2 * (self.n - 1) - 4 * self.r) ** self.r

    @property
    def within_bounds(self) -> bool:
        return self.lower_bound <= self.count <= self.upper_bound


def ordered_links(m: MatchingFamily, u: int) -> list[tuple[int, int, int]]:
    """All 6*|H_u| ordered links (v1, v2, u_next) of pivot u, sorted."""
    out = []
    for triple in m[u]:
        a, b, c = triple
        for pivot, pair in ((a, (b, c)), (b, (a, c)), (c, (a, b))):
            out.append((pair[0], pair[1], pivot))
            out.append((pair[1], pair[0], pivot))
    out.sort()
    return out


def enumerate_chains(
    m: MatchingFamily,
    u: int,
    r: int,
    distinct: bool = True,
    max_chains: int = DEFAULT_MAX_CHAINS,
) -> Iterator[Chain]:
    """Stream every r-chain with head u once, in lexicographic link order.

    With ``distinct=True`` (the default) all 2r side vertices must be
    pairwise distinct.  Raises BudgetExceededError (carrying the count
    emitted so far) if more than ``max_chains`` chains are produced.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    link_table = [ordered_links(m, w) for w in range(len(m))]
    emitted = 0
    used: set[int] = set()
    links: list[tuple[int, int, int]] = []

    def walk(pivot: int, depth: int) -> Iterator[Chain]:
        nonlocal emitted
        if depth == r:
            emitted += 1
            if emitted > max_chains:
                raise BudgetExceededError(
                    f"chain budget {max_chains} exceeded", count_so_far=emitted - 1
                )
            yield Chain(head=u, links=tuple(links))
            return
        for link in link_table[pivot]:
            v1, v2, nxt = link
            if distinct and (v1 in used or v2 in used):
                continue
            links.append(link)
            if distinct:
                used.add(v1)
                used.add(v2)
            yield from walk(nxt, depth + 1)
            links.pop()
            if distinct:
                used.discard(v1)
                used.discard(v2)

    yield from walk(u, 0)


def count_chains(m: MatchingFamily, u: int, r: int, distinct: bool = True) -> ChainSetStats:
    n = len(m)
    count = sum(1 for _ in enumerate_chains(m, u, r, distinct=distinct))
    return ChainSetStats(n=n, r=r, count=count)


def chain_is_valid(m: MatchingFamily, c: Chain, distinct: bool = True) -> bool:
    pivot = c.head
    seen: set[int] = set()
    for v1, v2, nxt in c.links:
        if tuple(sorted((v1, v2, nxt))) not in m[pivot]:
            return False
        if distinct and (v1 in seen or v2 in seen):
            return False
        seen.add(v1)
        seen.add(v2)
        pivot = nxt
    return True


def verify_chain_completeness(lcc: DesignLcc, c: Chain, m: MatchingFamily | None = None) -> bool:
    """x_tail + sum over both halves = x_head for every dual-basis vector.

    Raises InvalidChainError if the chain's links are not correction triples,
    so a malformed chain is distinguished from an identity failure.
    """
    if m is not None and not chain_is_valid(m, c, distinct=False):
        raise InvalidChainError(f"chain {c.to_tuple()} has a link outside the matchings")
    mask = 1 << c.tail
    for v in c.left_half:
        mask ^= 1 << v
    for v in c.right_half:
        mask ^= 1 << v
    head_bit = 1 << c.head
    for x in lcc.dual_basis:
        if x.parity_on(mask) != x.parity_on(head_bit):
            return False
    return True


def sample_chain(
    m: MatchingFamily, u: int, r: int, rng: random.Random, distinct: bool = True
) -> Chain | None:
    """One uniform-ish random chain via random link choices; None on dead end."""
    links = []
    used: set[int] = set()
    pivot = u
    for _ in range(r):
        options = ordered_links(m, pivot)
        if distinct:
            options = [l for l in options if l[0] not in used and l[1] not in used]
        if not options:
            return None
        link = options[rng.randrange(len(options))]
        links.append(link)
        used.add(link[0])
        used.add(link[1])
        pivot = link[2]
    return Chain(head=u, links=tuple(links))


# ---------------------------------------------------------------------------
# fixed-pattern counting (smoothness of the chain set)
# ---------------------------------------------------------------------------


def count_chains_with_fixed_pattern(
    m: MatchingFamily,
    u: int,
    r: int,
    pattern: Sequence[int],
    side: str,
    tail: int | None = None,
) -> int:
    """Exact count of r-chains with head u whose ``side`` half contains
    ``pattern`` as a set (and with the given tail, when fixed)."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    z = set(pattern)
    if len(z) > r:
        raise ValueError("pattern larger than r")
    count = 0
    for c in enumerate_chains(m, u, r):
        if tail is not None and c.tail != tail:
            continue
        half = c.left_half if side == "left" else c.right_half
        if z <= set(half):
            count += 1
    return count


def pattern_count_bound(n: int, r: int, t: int, side: str, tail_fixed: bool) -> Fraction:
    """The claimed ceiling on fixed-pattern chain counts.

    right side:            C(r,t) t! (3 delta n)^(r-t) 2^r
    left side, tail fixed: C(r,t) t! (3 delta n)^(r-t-1) 2^r   (t <= r-1)
                           r! 2^r                               (t == r)
    """
    from math import comb, factorial

    three_delta_n = Fraction(n - 1)  # 3 * delta * n with delta = 1/3 - 1/(3n)
    if side == "right":
        return comb(r, t) * factorial(t) * three_delta_n ** (r - t) * 2**r
    if not tail_fixed:
        raise ValueError("left-side bound is stated for a fixed tail")
    if t == r:
        return Fraction(factorial(r) * 2**r)
    return comb(r, t) * factorial(t) * three_delta_n ** (r - t - 1) * 2**r


# ---------------------------------------------------------------------------
# chain dump format: one chain per line, 1-based vertex sequence
# ---------------------------------------------------------------------------


def chain_to_line(c: Chain) -> str:
    return " ".join(str(v + 1) for v in c.to_tuple())


def chain_from_line(line: str) -> Chain:
    return Chain.from_tuple([int(tok) - 1 for tok in line.split()])
