"""Weighted chain hypergraphs, chain XOR instances, and smooth partitions.

A level-t chain over a hypergraph collection is a tuple
(u0, v1, v2, u1, ..., u_t) whose links are drawn from the per-pivot
3-uniform hypergraphs (hypergraph-tailed, length 3t+1) or whose final link
comes from the 2-uniform graph (graph-tailed, length 3t); its weight is the
product of the link weights.  Summing b_i-signed chain monomials over k
heads gives the XOR polynomials Phi^(t) (graph-tailed) and Psi
(hypergraph-tailed at level r+1).

Chain weights telescope: the total hypergraph-tailed weight per head never
exceeds 1 and the graph-tailed total never exceeds 4, at every level.
Point evaluations of Phi/Psi are computed by an exact dynamic program over
the collection (no chain materialization), which doubles as the oracle for
the materialized instances.

The greedy partition collects "heavy" complete contiguous suffixes Q (one
vertex per trailing link plus the tail) whose aggregate chain weight
crosses n d^t (delta n)^(-t-1); the induced partition of the (r+1)-chains
by their deepest heavy suffix yields the bipartite relaxation Psi(x, y)
with one y-variable per heavy suffix, recovering Psi(x) exactly under
y_Q = x_Q.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .decoders import HypergraphCollection
from .designs import BudgetExceededError

DEFAULT_MAX_CHAIN_SUPPORT = 500_000
VAL_BRUTE_MAX_VARS = 24


@dataclass(frozen=True)
class WeightedChain:
    vertices: tuple[int, ...]  # 3t+1 (hypergraph-tailed) or 3t (graph-tailed)
    weight: Fraction

    @property
    def hypergraph_tailed(self) -> bool:
        return len(self.vertices) % 3 == 1

    @property
    def head(self) -> int:
        return self.vertices[0]

    @property
    def tail(self) -> int:
        if not self.hypergraph_tailed:
            raise ValueError("graph-tailed chains have no tail vertex")
        return self.vertices[-1]


def monomial_mask(vertices: tuple[int, ...]) -> int:
    """XOR-reduced variable mask of the chain monomial.

    Hypergraph-tailed chains contribute both side vertices of every link
    plus the tail; graph-tailed chains contribute the side vertices only.
    Pivots (every third entry after the head) are substituted away.
    Repeated variables cancel because x^2 = 1.
    """
    mask = 0
    t = len(vertices) // 3
    for h in range(t):
        mask ^= 1 << vertices[1 + 3 * h]
        mask ^= 1 << vertices[2 + 3 * h]
    if len(vertices) % 3 == 1 and len(vertices) > 1:
        mask ^= 1 << vertices[-1]
    return mask


def build_chain_hypergraph(
    col: HypergraphCollection,
    u: int,
    t: int,
    tail_kind: str = "hyper",
    max_support: int = DEFAULT_MAX_CHAIN_SUPPORT,
) -> Iterator[WeightedChain]:
    """Stream the nonzero-weight level-t chains with head u.

    tail_kind "hyper" uses hypergraph links throughout (3t+1 tuples);
    "graph" uses hypergraph links for the first t-1 steps and a graph link
    last (3t tuples).
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if tail_kind not in ("hyper", "graph"):
        raise ValueError("tail_kind must be 'hyper' or 'graph'")
    emitted = 0

    def walk(prefix: tuple[int, ...], pivot: int, depth: int, w: Fraction) -> Iterator[WeightedChain]:
        nonlocal emitted
        if depth == t:
            emitted += 1
            if emitted > max_support:
                raise BudgetExceededError(
                    f"chain support budget {max_support} exceeded", count_so_far=emitted - 1
                )
            yield WeightedChain(vertices=prefix, weight=w)
            return
        if depth == t - 1 and tail_kind == "graph":
            for (v1, v2), we in sorted(col.g_of(pivot).items()):
                if we == 0:
                    continue
                yield from walk(prefix + (v1, v2), -1, depth + 1, w * we)
            return
        for (v1, v2, nxt), we in sorted(col.h_of(pivot).items()):
            if we == 0:
                continue
            yield from walk(prefix + (v1, v2, nxt), nxt, depth + 1, w * we)

    yield from walk((u,), u, 0, Fraction(1))


def chain_weight_totals(col: HypergraphCollection, t: int) -> tuple[list[Fraction], list[Fraction]]:
    """Per-head totals (hyper-tailed, graph-tailed) at level t, by telescoping.

    h_t[u] = sum over H_u links of w * h_{t-1}[pivot]  (h_0 = 1)
    g_t[u] = sum over H_u links of w * g_{t-1}[pivot]  (g_1 = G_u total)
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    h = [Fraction(1)] * col.n
    g = [col.g_total(u) for u in range(col.n)]
    for _ in range(t - 1):
        h_next = []
        g_next = []
        for u in range(col.n):
            hs = Fraction(0)
            gs = Fraction(0)
            for (v1, v2, nxt), w in col.h_of(u).items():
                hs += w * h[nxt]
                gs += w * g[nxt]
            h_next.append(hs)
            g_next.append(gs)
        h, g = h_next, g_next
    # one more hyper step for the hyper-tailed total
    h_final = []
    for u in range(col.n):
        hs = Fraction(0)
        for (v1, v2, nxt), w in col.h_of(u).items():
            hs += w * h[nxt]
        h_final.append(hs)
    return h_final, g


def verify_weight_conservation(col: HypergraphCollection, u: int, t: int) -> dict:
    h_tot, g_tot = chain_weight_totals(col, t)
    return {
        "hyper_total": h_tot[u],
        "graph_total": g_tot[u],
        "ok": h_tot[u] <= 1 and g_tot[u] <= 4,
    }


# ---------------------------------------------------------------------------
# chain XOR instances
# ---------------------------------------------------------------------------


@dataclass
class ChainXorInstance:
    """Signed coefficient map over (head index, chain tuple) pairs."""

    kind: str  # "phi_<t>" | "psi"
    level: int  # t for phi, r+1 for psi
    n: int
    heads: tuple[int, ...]
    b: tuple[int, ...]
    coeffs: dict[tuple[int, tuple[int, ...]], Fraction] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.heads)

    def total_mass(self) -> Fraction:
        return sum((abs(c) for c in self.coeffs.values()), Fraction(0))

    def as_polynomial(self) -> dict[int, Fraction]:
        poly: dict[int, Fraction] = {}
        for (_, verts), c in self.coeffs.items():
            m = monomial_mask(verts)
            poly[m] = poly.get(m, Fraction(0)) + c
        return poly

    def evaluate(self, x: Sequence[int]) -> Fraction:
        total = Fraction(0)
        for (_, verts), c in self.coeffs.items():
            m = monomial_mask(verts)
            sign = 1
            while m:
                v = (m & -m).bit_length() - 1
                sign *= x[v]
                m &= m - 1
            total += c * sign
        return total

    def to_jsonl(self) -> str:
        lines = []
        for (i, verts), c in sorted(self.coeffs.items()):
            lines.append(
                json.dumps(
                    {
                        "i": self.heads[i] + 1,
                        "tuple": [v + 1 for v in verts],
                        "w": str(c),
                        "kind": self.kind,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"


def build_phi_instance(
    col: HypergraphCollection,
    heads: Sequence[int],
    b: Sequence[int],
    t: int,
    max_support: int = DEFAULT_MAX_CHAIN_SUPPORT,
) -> ChainXorInstance:
    inst = ChainXorInstance(
        kind=f"phi_{t}", level=t, n=col.n, heads=tuple(heads), b=tuple(b)
    )
    for i, u in enumerate(heads):
        for wc in build_chain_hypergraph(col, u, t, "graph", max_support=max_support):
            key = (i, wc.vertices)
            inst.coeffs[key] = inst.coeffs.get(key, Fraction(0)) + b[i] * wc.weight
    return inst


def build_psi_instance(
    col: HypergraphCollection,
    heads: Sequence[int],
    b: Sequence[int],
    r: int,
    max_support: int = DEFAULT_MAX_CHAIN_SUPPORT,
) -> ChainXorInstance:
    inst = ChainXorInstance(
        kind="psi", level=r + 1, n=col.n, heads=tuple(heads), b=tuple(b)
    )
    for i, u in enumerate(heads):
        for wc in build_chain_hypergraph(col, u, r + 1, "hyper", max_support=max_support):
            key = (i, wc.vertices)
            inst.coeffs[key] = inst.coeffs.get(key, Fraction(0)) + b[i] * wc.weight
    return inst


def eval_phi(
    col: HypergraphCollection, heads: Sequence[int], b: Sequence[int], t: int, x: Sequence[int]
) -> Fraction:
    """Phi^(t)_b(x) by telescoping, without materializing chains."""
    phi = [
        sum((w * x[v1] * x[v2] for (v1, v2), w in col.g_of(u).items()), Fraction(0))
        for u in range(col.n)
    ]
    for _ in range(t - 1):
        phi = [
            sum(
                (w * x[v1] * x[v2] * phi[nxt] for (v1, v2, nxt), w in col.h_of(u).items()),
                Fraction(0),
            )
            for u in range(col.n)
        ]
    return sum((b[i] * phi[u] for i, u in enumerate(heads)), Fraction(0))


def eval_psi(
    col: HypergraphCollection, heads: Sequence[int], b: Sequence[int], r: int, x: Sequence[int]
) -> Fraction:
    """Psi_b(x) at level r+1 by telescoping."""
    e = [Fraction(x[u]) for u in range(col.n)]
    for _ in range(r + 1):
        e = [
            sum(
                (w * x[v1] * x[v2] * e[nxt] for (v1, v2, nxt), w in col.h_of(u).items()),
                Fraction(0),
            )
            for u in range(col.n)
        ]
    return sum((b[i] * e[u] for i, u in enumerate(heads)), Fraction(0))


def completeness_sum(
    col: HypergraphCollection,
    heads: Sequence[int],
    b: Sequence[int],
    r: int,
    x: Sequence[int],
) -> Fraction:
    """Psi_b(x) + sum_{t=1}^{r+1} Phi^(t)_b(x)."""
    total = eval_psi(col, heads, b, r, x)
    for t in range(1, r + 2):
        total += eval_phi(col, heads, b, t, x)
    return total


# ---------------------------------------------------------------------------
# brute-force value
# ---------------------------------------------------------------------------


def val_brute_polynomial(poly: Mapping[int, Fraction], n: int) -> float:
    """max over x in {-1,1}^n of sum_S c_S prod_{i in S} x_i.

    Evaluates the polynomial at every assignment via a Walsh-Hadamard
    butterfly; gated at n <= 24 variables.
    """
    if n > VAL_BRUTE_MAX_VARS:
        raise BudgetExceededError(f"val_brute gated at {VAL_BRUTE_MAX_VARS} variables, got {n}")
    size = 1 << n
    arr = np.zeros(size, dtype=np.float64)
    for mask, c in poly.items():
        arr[mask] += float(c)
    h = 1
    while h < size:
        for start in range(0, size, h * 2):
            a = arr[start : start + h]
            bb = arr[start + h : start + 2 * h]
            a_new = a + bb
            b_new = a - bb
            arr[start : start + h] = a_new
            arr[start + h : start + 2 * h] = b_new
        h *= 2
    return float(arr.max())


def val_brute(inst: ChainXorInstance) -> float:
    return val_brute_polynomial(inst.as_polynomial(), inst.n)


# ---------------------------------------------------------------------------
# pattern containment
# ---------------------------------------------------------------------------


def chain_contains(q: Sequence[int | None], c: Sequence[int], r: int) -> bool:
    """Containment of a (t+1)-slot pattern in a length 3r+1 chain tuple.

    q has t link slots (None = unconstrained) plus a final tail slot; slot
    h (1-based) constrains link r - t + h to contain q[h-1] among its two
    side vertices, and the final slot constrains the tail.
    """
    t = len(q) - 1
    if t > r or len(c) != 3 * r + 1:
        raise ValueError("pattern/chain shape mismatch")
    tail = q[-1]
    if tail is not None and c[-1] != tail:
        return False
    for h in range(1, t + 1):
        want = q[h - 1]
        if want is None:
            continue
        g = r - 1 - t + h  # 0-based link index
        if c[1 + 3 * g] != want and c[2 + 3 * g] != want:
            return False
    return True


def chain_contains_naive(q: Sequence[int | None], c: Sequence[int], r: int) -> bool:
    """Independent re-derivation: rebuild the links, align q at the end."""
    links = [(c[1 + 3 * g], c[2 + 3 * g]) for g in range(r)]
    t = len(q) - 1
    if q[-1] is not None and q[-1] != c[3 * r]:
        return False
    trailing = links[r - t :] if t else []
    for slot, want in zip(trailing, q[:-1]):
        if want is not None and want not in slot:
            return False
    return True


# ---------------------------------------------------------------------------
# greedy smooth partition
# ---------------------------------------------------------------------------


@dataclass
class PartitionQ:
    level: int
    q: tuple[int, ...]  # level link vertices then the tail, all concrete
    members: dict[tuple[int, ...], Fraction]
    weight: Fraction


@dataclass
class Partition:
    n: int
    r: int
    d: int
    delta: Fraction
    levels: dict[int, list[PartitionQ]]
    residual: dict[int, dict[tuple[int, ...], Fraction]]

    def threshold(self, t: int) -> Fraction:
        return Fraction(self.n) * self.d**t / (self.delta * self.n) ** (t + 1)

    def membership(self) -> dict[int, dict[tuple[int, ...], tuple[int, ...]]]:
        out: dict[int, dict[tuple[int, ...], tuple[int, ...]]] = {}
        for t, parts in self.levels.items():
            table: dict[tuple[int, ...], tuple[int, ...]] = {}
            for part in parts:
                for c in part.members:
                    table[c] = part.q
            out[t] = table
        return out

    def total_weight(self) -> Fraction:
        return sum(
            (p.weight for parts in self.levels.values() for p in parts), Fraction(0)
        )


def _candidate_patterns(c: tuple[int, ...]) -> list[tuple[int, ...]]:
    """The 2^t complete contiguous suffix patterns of a level-t chain."""
    t = len(c) // 3
    tail = c[-1]
    out: list[tuple[int, ...]] = [()]
    for h in range(t):
        v1, v2 = c[1 + 3 * h], c[2 + 3 * h]
        out = [p + (v1,) for p in out] + [p + (v2,) for p in out]
    return [p + (tail,) for p in out]


def greedy_partition(
    col: HypergraphCollection,
    r: int,
    d: int,
    delta: Fraction,
    max_support: int = DEFAULT_MAX_CHAIN_SUPPORT,
) -> Partition:
    """Heavy complete contiguous suffixes of the level 1..r chains, greedily.

    A pattern Q is heavy when the remaining chains containing it carry
    weight at least n d^t (delta n)^(-t-1); all of them move into Q's
    bucket.  Ties are broken by lexicographic Q, so the outcome is
    deterministic.  Residual chains (per level) have no heavy pattern left.
    """
    if d ** (r + 1) < col.n:
        raise ValueError(f"need d^(r+1) >= n: {d}^{r + 1} < {col.n}")
    part = Partition(n=col.n, r=r, d=d, delta=delta, levels={}, residual={})
    for t in range(1, r + 1):
        pool: dict[tuple[int, ...], Fraction] = {}
        for u in range(col.n):
            for wc in build_chain_hypergraph(col, u, t, "hyper", max_support=max_support):
                pool[wc.vertices] = pool.get(wc.vertices, Fraction(0)) + wc.weight
        threshold = part.threshold(t)
        parts: list[PartitionQ] = []
        while True:
            acc: dict[tuple[int, ...], Fraction] = {}
            for c, w in pool.items():
                for q in _candidate_patterns(c):
                    acc[q] = acc.get(q, Fraction(0)) + w
            heavy = sorted(q for q, w in acc.items() if w >= threshold)
            if not heavy:
                break
            q = heavy[0]
            members = {c: w for c, w in pool.items() if q in _candidate_patterns(c)}
            for c in members:
                del pool[c]
            parts.append(
                PartitionQ(level=t, q=q, members=members, weight=sum(members.values(), Fraction(0)))
            )
        part.levels[t] = parts
        part.residual[t] = pool
    return part


def rescan_confirms_maximal(part: Partition) -> bool:
    """No heavy pattern remains in any residual pool (independent rescan)."""
    for t, pool in part.residual.items():
        acc: dict[tuple[int, ...], Fraction] = {}
        for c, w in pool.items():
            for q in _candidate_patterns(c):
                acc[q] = acc.get(q, Fraction(0)) + w
        if any(w >= part.threshold(t) for w in acc.values()):
            return False
    return True


# ---------------------------------------------------------------------------
# induced partition and the bipartite relaxation
# ---------------------------------------------------------------------------


@dataclass
class InducedPiece:
    """The head-i chains whose deepest heavy suffix is Q (level t)."""

    head_index: int
    level: int
    q: tuple[int, ...]  # level 0: (tail,)
    chains: dict[tuple[int, ...], Fraction]
    q_weight: Fraction  # wt(Q); 1 at level 0


@dataclass
class InducedPartition:
    r: int
    n: int
    heads: tuple[int, ...]
    pieces: list[InducedPiece]

    def piece_map(self) -> dict[tuple[int, int, tuple[int, ...]], InducedPiece]:
        return {(p.head_index, p.level, p.q): p for p in self.pieces}


def induce_partition(
    col: HypergraphCollection,
    heads: Sequence[int],
    r: int,
    part: Partition,
    max_support: int = DEFAULT_MAX_CHAIN_SUPPORT,
) -> InducedPartition:
    """Classify each (r+1)-chain with head in ``heads`` by its deepest heavy
    suffix; unmatched chains land in the level-0 bucket of their tail."""
    membership = part.membership()
    buckets: dict[tuple[int, int, tuple[int, ...]], dict[tuple[int, ...], Fraction]] = {}
    for i, u in enumerate(heads):
        for wc in build_chain_hypergraph(col, u, r + 1, "hyper", max_support=max_support):
            c = wc.vertices
            assigned: tuple[int, tuple[int, ...]] | None = None
            for t in range(r, 0, -1):
                suffix = c[-(3 * t + 1) :]
                q = membership.get(t, {}).get(suffix)
                if q is not None:
                    assigned = (t, q)
                    break
            if assigned is None:
                assigned = (0, (c[-1],))
            key = (i, assigned[0], assigned[1])
            b = buckets.setdefault(key, {})
            b[c] = b.get(c, Fraction(0)) + wc.weight
    q_weights: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    for t, parts in part.levels.items():
        for p in parts:
            q_weights[(t, p.q)] = p.weight
    pieces = [
        InducedPiece(
            head_index=i,
            level=t,
            q=q,
            chains=chains,
            q_weight=q_weights.get((t, q), Fraction(1)),
        )
        for (i, t, q), chains in sorted(buckets.items())
    ]
    return InducedPartition(r=r, n=col.n, heads=tuple(heads), pieces=pieces)


def modded_monomial_mask(c: tuple[int, ...], level: int, q: tuple[int, ...], r: int) -> int:
    """Monomial of an (r+1)-chain with the Q vertices and the tail removed.

    The pattern q fixes one side vertex in each of the last ``level`` links
    plus the tail; those variables move into the y_Q factor.
    """
    mask = 0
    links = r + 1
    for h in range(links):
        mask ^= 1 << c[1 + 3 * h]
        mask ^= 1 << c[2 + 3 * h]
    for g in range(level):
        link = links - level + g
        v1, v2 = c[1 + 3 * link], c[2 + 3 * link]
        want = q[g]
        if v1 == want:
            mask ^= 1 << v1
        elif v2 == want:
            mask ^= 1 << v2
        else:
            raise ValueError("pattern vertex missing from its link")
    return mask


def q_mask(q: tuple[int, ...]) -> int:
    m = 0
    for v in q:
        m ^= 1 << v
    return m


def psi_piece_eval(piece: InducedPiece, r: int, x: Sequence[int]) -> Fraction:
    """Psi_{i,Q}(x): the piece's chains with x_Q modded out of the monomials."""
    total = Fraction(0)
    for c, w in piece.chains.items():
        m = modded_monomial_mask(c, piece.level, piece.q, r)
        sign = 1
        while m:
            v = (m & -m).bit_length() - 1
            sign *= x[v]
            m &= m - 1
        total += w * sign
    return total


def bipartite_psi_eval(
    ind: InducedPartition,
    b: Sequence[int],
    x: Sequence[int],
    y: Mapping[tuple[int, tuple[int, ...]], int],
) -> Fraction:
    """Psi(x, y) = sum over pieces of b_i y_Q Psi_{i,Q}(x)."""
    total = Fraction(0)
    for piece in ind.pieces:
        total += b[piece.head_index] * y[(piece.level, piece.q)] * psi_piece_eval(
            piece, ind.r, x
        )
    return total


def y_from_x(ind: InducedPartition, x: Sequence[int]) -> dict[tuple[int, tuple[int, ...]], int]:
    """y_Q = x_Q, the substitution that collapses Psi(x, y) back to Psi(x)."""
    out: dict[tuple[int, tuple[int, ...]], int] = {}
    for piece in ind.pieces:
        key = (piece.level, piece.q)
        if key not in out:
            m = q_mask(piece.q)
            sign = 1
            while m:
                v = (m & -m).bit_length() - 1
                sign *= x[v]
                m &= m - 1
            out[key] = sign
    return out


def piece_smoothness_ok(piece: InducedPiece, r: int, n: int, delta: Fraction) -> bool:
    """|Psi_{i,Q}| <= total piece weight <= wt(Q) / (delta n)."""
    total = sum(piece.chains.values(), Fraction(0))
    return total <= piece.q_weight / (delta * n)


def pattern_weight(
    chains: Mapping[tuple[int, ...], Fraction], z: Sequence[int | None], r: int
) -> Fraction:
    """Total weight of the (r+1)-chains containing the pattern z."""
    return sum(
        (w for c, w in chains.items() if chain_contains(z, c, r + 1)), Fraction(0)
    )


def chain_smoothness_bound(
    z_size: int, q_size: int, q_weight: Fraction, r: int, n: int, d: int, delta: Fraction
) -> Fraction:
    """wt(Q) d^(|Z|-|Q|) (delta n)^(-|Z|-1+|Q|) for |Z| <= r+1, else (delta n)^(-r-1)."""
    if z_size >= r + 2:
        return (delta * n) ** (-(r + 1))
    return q_weight * d ** (z_size - q_size) * (delta * n) ** (-(z_size + 1 - q_size))
