"""Kikuchi graphs over a design's chain sets, and the induced 2-LDC.

For a head u, the graph has left vertices (S, w) with S an l-subset and w a
vertex, and right vertices T an l-subset.  Each r-chain C with head u
contributes one edge ((C_L + U, tail), C_R + U) for every U of size l - r
disjoint from both halves — exactly C(n-2r, l-r) edges — and every edge
satisfies the linear decode identity

    [x_w + sum_{v in S} x_v] + [sum_{v in T} x_v] = x_u

on the design's dual code.  Degree first/second moments are computed exactly
by accumulating chain-pair statistics (keyed by the sizes of the unions of
the halves), or by Monte Carlo row sampling when the chain set is too large
to pair up.  Pruning degree outliers, splitting right vertices into n
copies, and extracting a maximum matching turns the graph into one
correction matching per message index; the classical 2-LDC inequality
2*delta*k <= log2(block length) is then evaluated numerically.

Subsets are bit-packed into ints throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from typing import Iterable, Sequence

import numpy as np

from .chains import Chain, enumerate_chains
from .designs import BudgetExceededError, DesignLcc, MatchingFamily, delta_of
from .fields import systematic_subset

DEFAULT_MAX_LEFT_VERTICES = 2_000_000
DEFAULT_SIZE_SLACK = 8.0


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KikuchiGraphParams:
    n: int
    r: int
    ell: int
    head: int
    size_slack: float = DEFAULT_SIZE_SLACK

    def __post_init__(self) -> None:
        if self.ell < self.r:
            raise ValueError(f"need ell >= r, got ell={self.ell} r={self.r}")
        if self.ell**4 > self.n * self.size_slack:
            raise ValueError(
                f"ell^4 = {self.ell**4} exceeds n * slack = {self.n * self.size_slack}; "
                "raise size_slack to override"
            )
        if not 0 <= self.head < self.n:
            raise ValueError("head out of range")

    @property
    def N(self) -> int:
        return comb(self.n, self.ell)

    @property
    def edges_per_chain(self) -> int:
        return comb(self.n - 2 * self.r, self.ell - self.r)

    def left_count(self) -> int:
        return self.N * self.n

    def mean_degrees(self, chain_count: int) -> tuple[Fraction, Fraction]:
        """(d_L, d_R) exactly, given the chain count of this head."""
        edges = chain_count * self.edges_per_chain
        d_r = Fraction(edges, self.N)
        return d_r / self.n, d_r


def schedule_parameters(n: int, gamma: float = 2.0) -> tuple[int, int]:
    """The asymptotic schedule r = ceil(log2(n)/2 + gamma*log2 log2 n), l = 2r - 1."""
    import math

    log2n = math.log2(n)
    r = math.ceil(0.5 * log2n + gamma * math.log2(max(2.0, log2n)))
    return r, 2 * r - 1


# ---------------------------------------------------------------------------
# explicit graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KikuchiEdge:
    s_mask: int
    w: int
    t_mask: int
    label: int  # index into the chain list


@dataclass
class KikuchiGraph:
    params: KikuchiGraphParams
    chains: list[Chain]
    edges: list[KikuchiEdge]

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def edges_of_chain(c: Chain, n: int, ell: int) -> Iterable[tuple[int, int, int]]:
    """(S, w, T) bit-mask triples contributed by one chain.

    For a chain with distinct halves this yields exactly C(n-2r, l-r)
    edges.  Halves that collapse as sets yield 0 edges when their set sizes
    differ and C(n-|L u R|, l-|L|) otherwise.
    """
    lset = set(c.left_half)
    rset = set(c.right_half)
    if len(lset) != len(rset):
        return
    l_mask = 0
    for v in lset:
        l_mask |= 1 << v
    r_mask = 0
    for v in rset:
        r_mask |= 1 << v
    free = [v for v in range(n) if not ((l_mask | r_mask) >> v) & 1]
    u_size = ell - len(lset)
    if u_size < 0:
        return
    for u_tuple in combinations(free, u_size):
        u_mask = 0
        for v in u_tuple:
            u_mask |= 1 << v
        yield (l_mask | u_mask, c.tail, r_mask | u_mask)


def build_graph(
    lcc: DesignLcc,
    params: KikuchiGraphParams,
    m: MatchingFamily | None = None,
    distinct: bool = True,
    max_left_vertices: int = DEFAULT_MAX_LEFT_VERTICES,
) -> KikuchiGraph:
    """Materialize the graph of one head explicitly."""
    from .designs import derive_matchings

    if params.left_count() > max_left_vertices:
        raise BudgetExceededError(
            f"left vertex set of size {params.left_count()} exceeds budget "
            f"{max_left_vertices}; use Monte Carlo moments instead"
        )
    if m is None:
        m = derive_matchings(lcc)
    chains = list(enumerate_chains(m, params.head, params.r, distinct=distinct))
    edges = []
    for idx, c in enumerate(chains):
        for s_mask, w, t_mask in edges_of_chain(c, params.n, params.ell):
            edges.append(KikuchiEdge(s_mask=s_mask, w=w, t_mask=t_mask, label=idx))
    return KikuchiGraph(params=params, chains=chains, edges=edges)


def edge_decodes(lcc: DesignLcc, head: int, e: KikuchiEdge) -> bool:
    """The per-edge decode identity on every dual-basis vector."""
    for x in lcc.dual_basis:
        left = x.get(e.w) ^ x.parity_on(e.s_mask)
        if left ^ x.parity_on(e.t_mask) != x.get(head):
            return False
    return True


# ---------------------------------------------------------------------------
# degree moments
# ---------------------------------------------------------------------------


@dataclass
class MomentReport:
    n: int
    r: int
    ell: int
    mode: str  # "exact" | "monte_carlo"
    chain_count: int
    d_left: Fraction
    d_left_sq: float
    d_right: Fraction
    d_right_sq: float
    formula_left: Fraction
    formula_right: Fraction
    se_left: float = 0.0
    se_right: float = 0.0
    samples: int = 0
    seed: int | None = None

    @property
    def ratio_left(self) -> float:
        return float(self.d_left_sq / float(self.formula_left)) if self.formula_left else float("nan")

    @property
    def ratio_right(self) -> float:
        return float(self.d_right_sq / float(self.formula_right)) if self.formula_right else float("nan")

    def flag_left(self) -> bool:
        """Raw 3-standard-error flag (informational in MC mode)."""
        return self.mode == "monte_carlo" and abs(
            self.d_left_sq - float(self.formula_left)
        ) > 3 * self.se_left

    def flag_right(self) -> bool:
        return self.mode == "monte_carlo" and abs(
            self.d_right_sq - float(self.formula_right)
        ) > 3 * self.se_right

    def csv_row(self) -> str:
        return ",".join(
            str(x)
            for x in (
                self.n,
                self.r,
                self.ell,
                self.mode,
                float(self.d_left),
                self.d_left_sq,
                float(self.d_right),
                self.d_right_sq,
                float(self.formula_left),
                float(self.formula_right),
                self.ratio_left,
                self.ratio_right,
                max(self.se_left, self.se_right),
            )
        )


MOMENTS_CSV_HEADER = (
    "# lcckit moments schema v1\n"
    "n,r,ell,mode,dL,dL2,dR,dR2,formulaL,formulaR,ratioL,ratioR,stderr\n"
)


def hypergeom_term(r: int, ell: int, t: int) -> Fraction:
    """C(r,t) C(l-r, r-t) / C(l,r); sums to 1 over t = 0..r."""
    return Fraction(comb(r, t) * comb(ell - r, r - t), comb(ell, r))


def second_moment_formula_right(n: int, r: int, ell: int, d_right: Fraction) -> Fraction:
    three_delta = 3 * delta_of(n)
    total = sum((three_delta ** -t) * hypergeom_term(r, ell, t) for t in range(r + 1))
    return d_right**2 * total


def second_moment_formula_left(n: int, r: int, ell: int, d_left: Fraction) -> Fraction:
    three_delta = 3 * delta_of(n)
    total = sum((three_delta ** -t) * hypergeom_term(r, ell, t) for t in range(r))
    return d_left**2 * (three_delta**-1) * total


def first_moment_window(n: int, r: int, ell: int, chain_count: int) -> dict:
    """The mean-degree window: upper = C(n-2r, l-r) (6 d n)^r / C(n, l).

    The exact mean sits below the upper value; the measured shortfall
    constant c (relative deficit times n/r^2) is reported.
    """
    upper_count = (2 * (n - 1)) ** r
    upper_right = Fraction(comb(n - 2 * r, ell - r) * upper_count, comb(n, ell))
    exact_right = Fraction(comb(n - 2 * r, ell - r) * chain_count, comb(n, ell))
    deficit = 1 - Fraction(chain_count, upper_count)
    c_measured = float(deficit * n / r**2) if r else 0.0
    return {
        "d_right_exact": exact_right,
        "d_right_upper": upper_right,
        "d_left_exact": exact_right / n,
        "d_left_upper": upper_right / n,
        "upper_holds": exact_right <= upper_right,
        "c_measured": c_measured,
    }


def moment_window(
    measured: float,
    formula: Fraction,
    n: int,
    r: int,
    ell: int,
    mean: Fraction,
    se: float = 0.0,
    c_cap: float = 32.0,
) -> dict:
    """The acceptance window |measured - formula| <= (c l^2/n + eta) mean^2 + 3 se.

    The window's reference scale is the squared mean degree (the degree
    bound claims are all of the form (1 + O(l^2)/n + eta) d^2); eta =
    n / C(l, r) is the tail-collision allowance of the left second moment.
    c_needed is the constant that would make the window tight.
    """
    eta = Fraction(n, comb(ell, r))
    scale = float(mean) ** 2
    gap = abs(measured - float(formula))
    band = (c_cap * ell**2 / n + float(eta)) * scale + 3 * se
    if scale > 0:
        c_needed = max(0.0, ((gap - 3 * se) / scale - float(eta)) * n / ell**2)
    else:
        c_needed = 0.0 if gap <= 3 * se else float("inf")
    return {"ok": gap <= band, "eta": float(eta), "c_needed": c_needed}


def _mask_of(vals: Iterable[int]) -> int:
    m = 0
    for v in vals:
        m |= 1 << v
    return m


def degree_moments_exact(
    lcc: DesignLcc, params: KikuchiGraphParams, m: MatchingFamily | None = None
) -> MomentReport:
    """Exact rational moments by chain-pair accumulation.

    E[deg_R(T)^2] = (1/N) sum over ordered chain pairs of the number of T
    containing both right halves and avoiding both left halves; similarly
    on the left with the tails forced equal (and the 1/(nN) normalizer).
    """
    from .designs import derive_matchings

    if m is None:
        m = derive_matchings(lcc)
    n, r, ell = params.n, params.r, params.ell
    chains = list(enumerate_chains(m, params.head, r))
    lmasks = [_mask_of(c.left_half) for c in chains]
    rmasks = [_mask_of(c.right_half) for c in chains]
    tails = [c.tail for c in chains]
    N = params.N

    # right second moment: all ordered pairs
    counts: dict[tuple[int, int], int] = {}
    for i in range(len(chains)):
        ai, bi = rmasks[i], lmasks[i]
        for j in range(len(chains)):
            a = ai | rmasks[j]
            if a & (bi | lmasks[j]):
                continue
            key = (a.bit_count(), (a | bi | lmasks[j]).bit_count())
            counts[key] = counts.get(key, 0) + 1
    er2 = Fraction(0)
    for (asz, usz), cnt in counts.items():
        if ell - asz >= 0:
            er2 += Fraction(cnt * comb(n - usz, ell - asz), N)

    # left second moment: ordered pairs with equal tails
    by_tail: dict[int, list[int]] = {}
    for i, w in enumerate(tails):
        by_tail.setdefault(w, []).append(i)
    counts.clear()
    for idx in by_tail.values():
        for i in idx:
            ai, bi = lmasks[i], rmasks[i]
            for j in idx:
                a = ai | lmasks[j]
                if a & (bi | rmasks[j]):
                    continue
                key = (a.bit_count(), (a | bi | rmasks[j]).bit_count())
                counts[key] = counts.get(key, 0) + 1
    el2 = Fraction(0)
    for (asz, usz), cnt in counts.items():
        if ell - asz >= 0:
            el2 += Fraction(cnt * comb(n - usz, ell - asz), n * N)

    d_left, d_right = params.mean_degrees(len(chains))
    return MomentReport(
        n=n,
        r=r,
        ell=ell,
        mode="exact",
        chain_count=len(chains),
        d_left=d_left,
        d_left_sq=float(el2),
        d_right=d_right,
        d_right_sq=float(er2),
        formula_left=second_moment_formula_left(n, r, ell, d_left),
        formula_right=second_moment_formula_right(n, r, ell, d_right),
    )


def degree_moments_monte_carlo(
    lcc: DesignLcc,
    params: KikuchiGraphParams,
    seed: int,
    samples: int = 10_000,
    m: MatchingFamily | None = None,
) -> MomentReport:
    """Monte Carlo moments: sample rows uniformly, scan the chain list.

    A sampled right vertex T contributes deg = #{chains : C_R inside T,
    C_L disjoint from T}; a sampled left vertex (S, w) additionally forces
    the tail.  Means stay exact (from the chain count); only the second
    moments are estimated, with standard errors of the sample mean.
    """
    from .designs import derive_matchings

    if m is None:
        m = derive_matchings(lcc)
    n, r, ell = params.n, params.r, params.ell
    chains = list(enumerate_chains(m, params.head, r))
    left = np.array([c.left_half for c in chains], dtype=np.int64)
    right = np.array([c.right_half for c in chains], dtype=np.int64)
    tails = np.array([c.tail for c in chains], dtype=np.int64)

    rng = np.random.default_rng(seed)
    batch = 512
    right_sq = np.empty(samples, dtype=np.float64)
    left_sq = np.empty(samples, dtype=np.float64)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        member = np.zeros((b, n), dtype=bool)
        for i in range(b):
            member[i, rng.choice(n, size=ell, replace=False)] = True
        in_r = np.ones((b, len(chains)), dtype=bool)
        out_l = np.ones((b, len(chains)), dtype=bool)
        for h in range(r):
            in_r &= member[:, right[:, h]]
            out_l &= ~member[:, left[:, h]]
        right_sq[done : done + b] = (in_r & out_l).sum(axis=1).astype(np.float64) ** 2

        member = np.zeros((b, n), dtype=bool)
        for i in range(b):
            member[i, rng.choice(n, size=ell, replace=False)] = True
        w = rng.integers(0, n, size=b)
        in_l = np.ones((b, len(chains)), dtype=bool)
        out_r = np.ones((b, len(chains)), dtype=bool)
        for h in range(r):
            in_l &= member[:, left[:, h]]
            out_r &= ~member[:, right[:, h]]
        tail_ok = tails[None, :] == w[:, None]
        left_sq[done : done + b] = (in_l & out_r & tail_ok).sum(axis=1).astype(np.float64) ** 2
        done += b

    d_left, d_right = params.mean_degrees(len(chains))
    return MomentReport(
        n=n,
        r=r,
        ell=ell,
        mode="monte_carlo",
        chain_count=len(chains),
        d_left=d_left,
        d_left_sq=float(left_sq.mean()),
        d_right=d_right,
        d_right_sq=float(right_sq.mean()),
        formula_left=second_moment_formula_left(n, r, ell, d_left),
        formula_right=second_moment_formula_right(n, r, ell, d_right),
        se_left=float(left_sq.std(ddof=1) / np.sqrt(samples)),
        se_right=float(right_sq.std(ddof=1) / np.sqrt(samples)),
        samples=samples,
        seed=seed,
    )


def degree_moments(
    lcc: DesignLcc,
    params: KikuchiGraphParams,
    mode: str = "exact",
    seed: int | None = None,
    samples: int = 10_000,
    m: MatchingFamily | None = None,
) -> MomentReport:
    if mode == "exact":
        return degree_moments_exact(lcc, params, m=m)
    if mode == "monte_carlo":
        if seed is None:
            raise ValueError("monte_carlo mode requires a seed")
        return degree_moments_monte_carlo(lcc, params, seed=seed, samples=samples, m=m)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# binomial-coefficient inequality
# ---------------------------------------------------------------------------


def binomial_fact_check(n: int, r: int, t: int, ell: int) -> dict:
    """LHS <= (1 + c l^2/n) RHS for

    LHS = C(r,t) t! C(n,l) C(n, l-(2r-t)) / C(n-2r, l-r)^2,
    RHS = n^t C(l-r, r-t) / C(l,r).

    Exact rationals; c_needed is the smallest admissible constant, 0 when
    LHS <= RHS already.  Requires t <= r <= l and 2r <= n.
    """
    if not (0 <= t <= r <= ell) or n < 2 * r:
        raise ValueError("inadmissible (n, r, t, ell)")

    def c_safe(a: int, b: int) -> int:
        return comb(a, b) if b >= 0 else 0

    denom = comb(n - 2 * r, ell - r) ** 2
    lhs = Fraction(comb(r, t) * factorial(t) * comb(n, ell) * c_safe(n, ell - (2 * r - t)), denom)
    rhs = Fraction(n**t * c_safe(ell - r, r - t), comb(ell, r))
    if rhs == 0:
        c_needed = 0.0 if lhs == 0 else float("inf")
    else:
        c_needed = max(0.0, float((lhs / rhs - 1) * n / ell**2))
    return {"lhs": lhs, "rhs": rhs, "c_needed": c_needed, "holds_at_32": c_needed <= 32.0}


# ---------------------------------------------------------------------------
# pruning, splitting, matching
# ---------------------------------------------------------------------------


@dataclass
class PruneStats:
    edges_before: int
    edges_after: int
    left_pruned: int
    right_pruned: int
    matching_size: int
    matching_ratio: float  # |M| / |L| with |L| = n * C(n, l)
    retained_fraction: float
    max_right_degree_after_split: int
    labels_with_full_multiplicity: int


def hopcroft_karp(adj: list[list[int]], n_right: int) -> list[int]:
    """Maximum bipartite matching; returns match_left (-1 for unmatched).

    Deterministic given adjacency order.
    """
    INF = float("inf")
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    while True:
        dist = [INF] * n_left
        queue = [u for u in range(n_left) if match_l[u] == -1]
        for u in queue:
            dist[u] = 0
        found = False
        qi = 0
        while qi < len(queue):
            u = queue[qi]
            qi += 1
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            break

        def try_augment(u: int) -> bool:
            for v in adj[u]:
                w = match_r[v]
                if w == -1 or (dist[w] == dist[u] + 1 and try_augment(w)):
                    match_l[u] = v
                    match_r[v] = u
                    return True
            dist[u] = INF
            return False

        for u in range(n_left):
            if match_l[u] == -1:
                try_augment(u)
    return match_l


@dataclass
class MatchedEdge:
    s_mask: int
    w: int
    t_mask: int
    copy: int  # which of the n split copies of T


def prune_and_match(
    g: KikuchiGraph, slack: float | None = None
) -> tuple[list[KikuchiEdge], list[MatchedEdge], PruneStats]:
    """Degree-window pruning, right-vertex splitting, maximum matching.

    Removes left vertices with degree outside d_L (1 +- slack) and right
    vertices outside d_R (1 +- slack); splits each surviving right vertex
    into n copies, distributing its edges round-robin; returns the pruned
    edge list, a maximum matching of the split graph, and statistics.

    Default slack is 3 (l^2/n + n/C(l,r)), mirroring the o(1) + eta
    degree window.
    """
    p = g.params
    if slack is None:
        slack = 3.0 * (p.ell**2 / p.n + p.n / comb(p.ell, p.r))
    chain_count = len(g.chains)
    d_left, d_right = p.mean_degrees(chain_count)

    deg_l: dict[tuple[int, int], int] = {}
    deg_r: dict[int, int] = {}
    for e in g.edges:
        deg_l[(e.s_mask, e.w)] = deg_l.get((e.s_mask, e.w), 0) + 1
        deg_r[e.t_mask] = deg_r.get(e.t_mask, 0) + 1

    lo_l, hi_l = float(d_left) * (1 - slack), float(d_left) * (1 + slack)
    lo_r, hi_r = float(d_right) * (1 - slack), float(d_right) * (1 + slack)
    bad_l = {v for v, d in deg_l.items() if not lo_l <= d <= hi_l}
    bad_r = {v for v, d in deg_r.items() if not lo_r <= d <= hi_r}
    kept = [e for e in g.edges if (e.s_mask, e.w) not in bad_l and e.t_mask not in bad_r]

    # split right vertices into n copies, edges round-robin in stored order
    counter: dict[int, int] = {}
    split_edges: list[tuple[KikuchiEdge, int]] = []
    for e in kept:
        c = counter.get(e.t_mask, 0)
        split_edges.append((e, c % p.n))
        counter[e.t_mask] = c + 1

    left_ids: dict[tuple[int, int], int] = {}
    right_ids: dict[tuple[int, int], int] = {}
    adj: list[list[int]] = []
    edge_lookup: dict[tuple[int, int], tuple[KikuchiEdge, int]] = {}
    for e, copy in split_edges:
        lkey = (e.s_mask, e.w)
        rkey = (e.t_mask, copy)
        li = left_ids.setdefault(lkey, len(left_ids))
        ri = right_ids.setdefault(rkey, len(right_ids))
        while len(adj) <= li:
            adj.append([])
        if ri not in adj[li]:
            adj[li].append(ri)
            edge_lookup[(li, ri)] = (e, copy)

    match_l = hopcroft_karp(adj, len(right_ids))
    matching = [
        MatchedEdge(
            s_mask=edge_lookup[(u, v)][0].s_mask,
            w=edge_lookup[(u, v)][0].w,
            t_mask=edge_lookup[(u, v)][0].t_mask,
            copy=edge_lookup[(u, v)][1],
        )
        for u, v in enumerate(match_l)
        if v != -1
    ]

    mult = comb(p.n - 2 * p.r, p.ell - p.r)
    per_label: dict[int, int] = {}
    for e in kept:
        per_label[e.label] = per_label.get(e.label, 0) + 1
    split_deg: dict[tuple[int, int], int] = {}
    for e, copy in split_edges:
        k = (e.t_mask, copy)
        split_deg[k] = split_deg.get(k, 0) + 1

    stats = PruneStats(
        edges_before=len(g.edges),
        edges_after=len(kept),
        left_pruned=len(bad_l),
        right_pruned=len(bad_r),
        matching_size=len(matching),
        matching_ratio=len(matching) / p.left_count(),
        retained_fraction=len(kept) / len(g.edges) if g.edges else 1.0,
        max_right_degree_after_split=max(split_deg.values(), default=0),
        labels_with_full_multiplicity=sum(1 for v in per_label.values() if v == mult),
    )
    return kept, matching, stats


# ---------------------------------------------------------------------------
# 2-LDC assembly
# ---------------------------------------------------------------------------


@dataclass
class TwoLdc:
    n: int
    ell: int
    block_length: int  # 2 n C(n, l): left vertices plus split right vertices
    heads: list[int]
    matchings: dict[int, list[MatchedEdge]]
    delta_prime: Fraction
    k: int
    bound_holds: bool
    decode_ok: bool
    stats: dict[int, PruneStats] = field(default_factory=dict)


def two_ldc_bound_check(matching_sizes: Sequence[int], k: int, block_length: int) -> tuple[Fraction, bool]:
    """delta' = min |M_i| / block length;  2 delta' k <= log2(block length)."""
    import math

    if not matching_sizes:
        return Fraction(0), True
    delta_prime = Fraction(min(matching_sizes), block_length)
    return delta_prime, float(2 * delta_prime * k) <= math.log2(block_length)


def assemble_2ldc(
    lcc: DesignLcc,
    r: int,
    ell: int,
    heads: Sequence[int] | None = None,
    slack: float | None = None,
    m: MatchingFamily | None = None,
) -> TwoLdc:
    """One pruned matching per message index; decode and bound checks.

    Heads default to the systematic coordinates of the dual basis, so each
    matching decodes one message bit x_i of the code.
    """
    from .designs import derive_matchings

    if m is None:
        m = derive_matchings(lcc)
    if heads is None:
        heads = systematic_subset(list(lcc.dual_basis))
    n = lcc.n
    matchings: dict[int, list[MatchedEdge]] = {}
    stats: dict[int, PruneStats] = {}
    decode_ok = True
    for i in heads:
        params = KikuchiGraphParams(n=n, r=r, ell=ell, head=i)
        g = build_graph(lcc, params, m=m)
        _, matching, st = prune_and_match(g, slack=slack)
        matchings[i] = matching
        stats[i] = st
        for me in matching:
            for x in lcc.dual_basis:
                left = x.get(me.w) ^ x.parity_on(me.s_mask)
                if left ^ x.parity_on(me.t_mask) != x.get(i):
                    decode_ok = False
    block_length = 2 * n * comb(n, ell)
    k = len(list(heads))
    delta_prime, bound = two_ldc_bound_check(
        [len(v) for v in matchings.values()], k, block_length
    )
    return TwoLdc(
        n=n,
        ell=ell,
        block_length=block_length,
        heads=list(heads),
        matchings=matchings,
        delta_prime=delta_prime,
        k=k,
        bound_holds=bound,
        decode_ok=decode_ok,
        stats=stats,
    )
