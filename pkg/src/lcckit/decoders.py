"""Adaptive 3-query decoders as decision trees, compiled to weight systems.

A decoder for index u is a depth-3 decision tree: a distribution over the
first query, per-answer distributions over the second and third queries,
and one leaf behavior per full transcript.  A leaf is a mixture of the four
deterministic output functions +1, -1, +a3, -a3; mixtures are split into
explicit coin outcomes ("rand" labels) so every compiled transcript has a
deterministic tag.  The weight of a transcript is the probability the
decoder walks it when the oracle answers are consistent, which does not
depend on the oracle beyond consistency, so

    sum of all transcript weights           = 4        (two free answers)
    sum restricted to transcripts           = 1        (on any codeword)
      consistent with a fixed x, via AND

hold exactly in rational arithmetic, and the sign-weighted sum reproduces
E[Dec^x(u)] transcript by transcript.

Compilation onto the padded code (x, -x, 1^n, (-1)^n) turns each
AND-weighted constraint into nonnegative-weight monomials over 4n
variables: one homogeneous degree-3 edge plus three degree-2 edges per
3-query transcript, four degree-2 edges per 2-query (constant-tag)
transcript, and fixed gadgets for the constant coordinates.  The result is
a hypergraph collection whose per-index polynomials f_u satisfy
f_u(y) y_u = E[Dec^x(u) x_u] on every padded codeword y.

All weights are exact Fractions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

TAGS = ("+1", "-1", "+a3", "-a3")
ANSWERS = (1, -1)


class SmoothnessError(ValueError):
    """The compiled collection exceeds the requested smoothness budget."""

    def __init__(self, u: int, v: int, weight: Fraction, bound: Fraction):
        super().__init__(
            f"incident weight {weight} at (u={u}, v={v}) exceeds the smoothness bound {bound}"
        )
        self.u = u
        self.v = v
        self.weight = weight
        self.bound = bound


def and_poly(s1: int, s2: int) -> int:
    """AND on {-1,1} inputs: 1 iff both are +1; equals (1+s1)(1+s2)/4."""
    if s1 not in (-1, 1) or s2 not in (-1, 1):
        raise ValueError(f"inputs must be in {{-1, 1}}, got ({s1}, {s2})")
    return 1 if (s1 == 1 and s2 == 1) else 0


# ---------------------------------------------------------------------------
# decision trees
# ---------------------------------------------------------------------------

Dist = Mapping[int, Fraction]
LeafMixture = Sequence[tuple[Fraction, str]]


@dataclass
class DecoderTree:
    """Decision tree of one index's decoder; queries are 0-based vertices."""

    root: dict[int, Fraction]
    second: dict[tuple[int, int], dict[int, Fraction]]
    third: dict[tuple[int, int, int, int], dict[int, Fraction]]
    leaf: dict[tuple[int, int, int, int, int], tuple[tuple[Fraction, str], ...]]

    def validate(self, n: int) -> None:
        def check_dist(d: Dist, where: str) -> None:
            total = sum(d.values())
            if total != 1:
                raise ValueError(f"{where}: distribution sums to {total}, not 1")
            for v, p in d.items():
                if not 0 <= v < n:
                    raise ValueError(f"{where}: query {v} out of range")
                if p < 0:
                    raise ValueError(f"{where}: negative probability")

        check_dist(self.root, "root")
        for v1 in self.root:
            for a1 in ANSWERS:
                d2 = self.second.get((v1, a1))
                if d2 is None:
                    raise ValueError(f"missing second-query branch ({v1}, {a1})")
                check_dist(d2, f"second{(v1, a1)}")
                for v2 in d2:
                    if v2 == v1:
                        raise ValueError("repeated query v2 == v1")
                    for a2 in ANSWERS:
                        d3 = self.third.get((v1, a1, v2, a2))
                        if d3 is None:
                            raise ValueError(f"missing third-query branch {(v1, a1, v2, a2)}")
                        check_dist(d3, f"third{(v1, a1, v2, a2)}")
                        for v3 in d3:
                            if v3 in (v1, v2):
                                raise ValueError("repeated query v3")
                            mix = self.leaf.get((v1, a1, v2, a2, v3))
                            if mix is None:
                                raise ValueError(f"missing leaf {(v1, a1, v2, a2, v3)}")
                            if sum(p for p, _ in mix) != 1:
                                raise ValueError("leaf mixture does not sum to 1")
                            for _, tag in mix:
                                if tag not in TAGS:
                                    raise ValueError(f"unknown tag {tag!r}")


@dataclass(frozen=True)
class AndTranscript:
    """One compiled transcript (v1, a1, v2, a2, v3, rand) with weight and tag."""

    v1: int
    a1: int
    v2: int
    a2: int
    v3: int
    rand: int
    wt: Fraction
    tag: str

    @property
    def is_constant(self) -> bool:
        return self.tag in ("+1", "-1")

    @property
    def sigma(self) -> int:
        return 1 if self.tag in ("+1", "+a3") else -1


def compile_and_weights(tree: DecoderTree, n: int) -> list[AndTranscript]:
    """All transcripts of one tree with their consistency-weights.

    Constant-tag transcripts belong to the 2-query bucket G, the others to
    the 3-query bucket H; the four-sum, AND-sum and sign-weighted-sum
    identities are checked by the callers on exact rationals.
    """
    tree.validate(n)
    out: list[AndTranscript] = []
    for v1, p1 in sorted(tree.root.items()):
        if p1 == 0:
            continue
        for a1 in ANSWERS:
            for v2, p2 in sorted(tree.second[(v1, a1)].items()):
                if p2 == 0:
                    continue
                for a2 in ANSWERS:
                    for v3, p3 in sorted(tree.third[(v1, a1, v2, a2)].items()):
                        if p3 == 0:
                            continue
                        for rand, (pr, tag) in enumerate(tree.leaf[(v1, a1, v2, a2, v3)]):
                            if pr == 0:
                                continue
                            out.append(
                                AndTranscript(
                                    v1=v1, a1=a1, v2=v2, a2=a2, v3=v3, rand=rand,
                                    wt=p1 * p2 * p3 * pr, tag=tag,
                                )
                            )
    return out


def transcript_weight_total(ts: Iterable[AndTranscript]) -> Fraction:
    return sum((t.wt for t in ts), Fraction(0))


def and_weight_sum_on(ts: Iterable[AndTranscript], x: Sequence[int]) -> Fraction:
    """sum wt * AND(a1 x_{v1}, a2 x_{v2}); equals 1 when x is a codeword."""
    return sum(
        (t.wt * and_poly(t.a1 * x[t.v1], t.a2 * x[t.v2]) for t in ts), Fraction(0)
    )


def signed_sum_on(ts: Iterable[AndTranscript], x: Sequence[int]) -> Fraction:
    """The sign-weighted AND sum; equals E[Dec^x(u)] for any x."""
    total = Fraction(0)
    for t in ts:
        gate = and_poly(t.a1 * x[t.v1], t.a2 * x[t.v2])
        if not gate:
            continue
        value = t.sigma if t.is_constant else t.sigma * x[t.v3]
        total += t.wt * value
    return total


def simulate_decoder(tree: DecoderTree, x: Sequence[int]) -> Fraction:
    """E[Dec^x(u)] by direct tree walk with exhaustive coin enumeration."""
    total = Fraction(0)
    for v1, p1 in tree.root.items():
        if p1 == 0:
            continue
        a1 = x[v1]
        for v2, p2 in tree.second[(v1, a1)].items():
            if p2 == 0:
                continue
            a2 = x[v2]
            for v3, p3 in tree.third[(v1, a1, v2, a2)].items():
                if p3 == 0:
                    continue
                a3 = x[v3]
                for pr, tag in tree.leaf[(v1, a1, v2, a2, v3)]:
                    value = {"+1": 1, "-1": -1, "+a3": a3, "-a3": -a3}[tag]
                    total += p1 * p2 * p3 * pr * value
    return total


def decoder_query_probabilities(tree: DecoderTree, x: Sequence[int]) -> dict[int, Fraction]:
    """P[Dec^x(u) queries v] per vertex, for a fixed oracle x."""
    probs: dict[int, Fraction] = {}

    def add(v: int, p: Fraction) -> None:
        probs[v] = probs.get(v, Fraction(0)) + p

    for v1, p1 in tree.root.items():
        if p1 == 0:
            continue
        add(v1, p1)
        a1 = x[v1]
        for v2, p2 in tree.second[(v1, a1)].items():
            if p2 == 0:
                continue
            add(v2, p1 * p2)
            a2 = x[v2]
            for v3, p3 in tree.third[(v1, a1, v2, a2)].items():
                if p3 == 0:
                    continue
                add(v3, p1 * p2 * p3)
    return probs


# ---------------------------------------------------------------------------
# codes
# ---------------------------------------------------------------------------


@dataclass
class PaddedCode:
    """A +-1 code plus its padded extension (x, -x, 1^n, (-1)^n).

    ``systematic`` lists k coordinates on which the codeword list is a
    bijection onto {-1,1}^k; messages are read off those coordinates.
    """

    n: int
    codewords: tuple[tuple[int, ...], ...]
    systematic: tuple[int, ...]

    def __post_init__(self) -> None:
        seen = set()
        for x in self.codewords:
            if len(x) != self.n or any(v not in (-1, 1) for v in x):
                raise ValueError("codewords must be +-1 vectors of length n")
            msg = tuple(x[i] for i in self.systematic)
            if msg in seen:
                raise ValueError("systematic coordinates do not separate codewords")
            seen.add(msg)
        if len(self.codewords) != 2 ** len(self.systematic):
            raise ValueError("codeword count is not 2^k")
        self._by_message = {
            tuple(x[i] for i in self.systematic): x for x in self.codewords
        }

    @property
    def k(self) -> int:
        return len(self.systematic)

    @property
    def n_padded(self) -> int:
        return 4 * self.n

    def codeword_for_message(self, bits: Sequence[int]) -> tuple[int, ...]:
        return self._by_message[tuple(bits)]

    def pad(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(x) + tuple(-v for v in x) + (1,) * self.n + (-1,) * self.n

    def padded_codewords(self) -> list[tuple[int, ...]]:
        return [self.pad(x) for x in self.codewords]

    # padded index helpers
    def signed_index(self, sign: int, v: int) -> int:
        return v if sign == 1 else self.n + v

    def const_index(self, sign: int, v: int) -> int:
        return (2 * self.n if sign == 1 else 3 * self.n) + v

    def negate_index(self, i: int) -> int:
        n = self.n
        block, off = divmod(i, n)
        return (block ^ 1) * n + off


# ---------------------------------------------------------------------------
# hypergraph collections
# ---------------------------------------------------------------------------


@dataclass
class HypergraphCollection:
    """Per-vertex weighted directed 3-uniform H_u and 2-uniform G_u."""

    n: int
    h_edges: dict[int, dict[tuple[int, int, int], Fraction]] = field(default_factory=dict)
    g_edges: dict[int, dict[tuple[int, int], Fraction]] = field(default_factory=dict)

    def h_of(self, u: int) -> dict[tuple[int, int, int], Fraction]:
        return self.h_edges.get(u, {})

    def g_of(self, u: int) -> dict[tuple[int, int], Fraction]:
        return self.g_edges.get(u, {})

    def add_h(self, u: int, e: tuple[int, int, int], w: Fraction) -> None:
        if len(set(e)) != 3:
            raise ValueError(f"H edge {e} has repeated vertices")
        d = self.h_edges.setdefault(u, {})
        d[e] = d.get(e, Fraction(0)) + w

    def add_g(self, u: int, e: tuple[int, int], w: Fraction) -> None:
        if e[0] == e[1]:
            raise ValueError(f"G edge {e} has repeated vertices")
        d = self.g_edges.setdefault(u, {})
        d[e] = d.get(e, Fraction(0)) + w

    def h_total(self, u: int) -> Fraction:
        return sum(self.h_of(u).values(), Fraction(0))

    def g_total(self, u: int) -> Fraction:
        return sum(self.g_of(u).values(), Fraction(0))

    def validate_normalization(self) -> None:
        for u in range(self.n):
            ht, gt = self.h_total(u), self.g_total(u)
            if ht > 1:
                raise ValueError(f"H weight {ht} > 1 at u={u}")
            if ht + gt > 4:
                raise ValueError(f"total weight {ht + gt} > 4 at u={u}")

    def incident_weight(self, u: int, v: int) -> Fraction:
        total = Fraction(0)
        for e, w in self.h_of(u).items():
            if v in e:
                total += w
        for e, w in self.g_of(u).items():
            if v in e:
                total += w
        return total

    def max_incident(self) -> tuple[Fraction, tuple[int, int]]:
        best = Fraction(0)
        arg = (0, 0)
        for u in range(self.n):
            per_v: dict[int, Fraction] = {}
            for e, w in self.h_of(u).items():
                for v in e:
                    per_v[v] = per_v.get(v, Fraction(0)) + w
            for e, w in self.g_of(u).items():
                for v in e:
                    per_v[v] = per_v.get(v, Fraction(0)) + w
            for v, w in per_v.items():
                if w > best:
                    best, arg = w, (u, v)
        return best, arg

    def smoothness_constant(self, delta: Fraction) -> tuple[Fraction, tuple[int, int]]:
        """Smallest c with the collection (delta/c)-smooth: c = max_incident * delta * n."""
        w, arg = self.max_incident()
        return w * delta * self.n, arg

    def f_eval(self, u: int, y: Sequence[int]) -> Fraction:
        """f_u(y) = sum_G wt * y_e + sum_H wt * y_e (degree 2 + degree 3)."""
        total = Fraction(0)
        for (a, b), w in self.g_of(u).items():
            total += w * y[a] * y[b]
        for (a, b, c), w in self.h_of(u).items():
            total += w * y[a] * y[b] * y[c]
        return total

    # JSON lines, one record per vertex, 1-based vertices, weights "p/q"
    def to_jsonl(self) -> str:
        lines = []
        for u in range(self.n):
            rec = {
                "u": u + 1,
                "H": [
                    {"e": [v + 1 for v in e], "w": str(w)}
                    for e, w in sorted(self.h_of(u).items())
                ],
                "G": [
                    {"e": [v + 1 for v in e], "w": str(w)}
                    for e, w in sorted(self.g_of(u).items())
                ],
            }
            lines.append(json.dumps(rec, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str, n: int | None = None) -> "HypergraphCollection":
        records = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
        if n is None:
            n = max(r["u"] for r in records)
        col = cls(n=n)
        for rec in records:
            u = rec["u"] - 1
            for item in rec["H"]:
                col.add_h(u, tuple(v - 1 for v in item["e"]), Fraction(item["w"]))
            for item in rec["G"]:
                col.add_g(u, tuple(v - 1 for v in item["e"]), Fraction(item["w"]))
        return col


def compile_collection(
    decoder: Mapping[int, DecoderTree],
    code: PaddedCode,
    delta: Fraction,
    c_cap: Fraction | None = Fraction(16),
) -> HypergraphCollection:
    """Compile per-index decoders into a hypergraph collection on 4n vertices.

    Raises SmoothnessError with the offending (u, v) pair if the measured
    smoothness constant c = max incident weight * delta * 4n exceeds c_cap.
    """
    n = code.n
    col = HypergraphCollection(n=code.n_padded)
    quarter = Fraction(1, 4)
    for u in range(n):
        if u not in decoder:
            raise ValueError(f"no decoder tree for index {u}")
        for t in compile_and_weights(decoder[u], n):
            w = t.wt * quarter
            if t.is_constant:
                s = t.sigma
                col.add_g(u, (code.const_index(s, t.v1), code.const_index(1, t.v2)), w)
                col.add_g(u, (code.signed_index(t.a1, t.v1), code.const_index(s, t.v2)), w)
                col.add_g(u, (code.const_index(s, t.v1), code.signed_index(t.a2, t.v2)), w)
                col.add_g(
                    u,
                    (code.signed_index(s * t.a1, t.v1), code.signed_index(t.a2, t.v2)),
                    w,
                )
            else:
                s = t.sigma
                col.add_h(
                    u,
                    (
                        code.signed_index(s * t.a1, t.v1),
                        code.signed_index(t.a2, t.v2),
                        t.v3,
                    ),
                    w,
                )
                col.add_g(u, (code.const_index(s, t.v1), t.v3), w)
                col.add_g(u, (code.signed_index(s * t.a1, t.v1), t.v3), w)
                col.add_g(u, (code.signed_index(s * t.a2, t.v2), t.v3), w)

    # -x block: flip the sign of the first vertex of every edge of u - n
    for u in range(n, 2 * n):
        base = u - n
        for e, w in col.h_of(base).items():
            col.add_h(u, (code.negate_index(e[0]), e[1], e[2]), w)
        for e, w in col.g_of(base).items():
            col.add_g(u, (code.negate_index(e[0]), e[1]), w)

    # constant blocks: random same-sign / opposite-sign constant pairs
    ones = [code.const_index(1, v) for v in range(n)]
    mones = [code.const_index(-1, v) for v in range(n)]
    w_same = Fraction(1, 2 * n * (n - 1))
    w_opp = Fraction(1, 2 * n * n)
    for off in range(n):
        u_plus = 2 * n + off
        for pool in (ones, mones):
            for i in pool:
                for j in pool:
                    if i != j:
                        col.add_g(u_plus, (i, j), w_same)
        u_minus = 3 * n + off
        for i in ones:
            for j in mones:
                col.add_g(u_minus, (i, j), w_opp)
                col.add_g(u_minus, (j, i), w_opp)

    col.validate_normalization()
    if c_cap is not None:
        c_meas, (u, v) = col.smoothness_constant(delta)
        if c_meas > c_cap:
            bound = c_cap / (delta * col.n)
            raise SmoothnessError(u, v, col.incident_weight(u, v), bound)
    return col


def collection_completeness(
    col: HypergraphCollection, code: PaddedCode
) -> Fraction:
    """min over padded codewords y and u of f_u(y) * y_u."""
    worst: Fraction | None = None
    for y in code.padded_codewords():
        for u in range(col.n):
            val = col.f_eval(u, y) * y[u]
            if worst is None or val < worst:
                worst = val
    return worst if worst is not None else Fraction(0)


def measured_decoder_smoothness(
    decoder: Mapping[int, DecoderTree], code: PaddedCode
) -> Fraction:
    """Largest delta with every decoder delta-smooth on every codeword."""
    p_max = Fraction(0)
    for u, tree in decoder.items():
        for x in code.codewords:
            for p in decoder_query_probabilities(tree, x).values():
                p_max = max(p_max, p)
    if p_max == 0:
        return Fraction(1)
    return Fraction(1) / (p_max * code.n)


# ---------------------------------------------------------------------------
# decoder / code file formats (1-based vertices on disk)
# ---------------------------------------------------------------------------


def decoder_to_json(decoder: Mapping[int, DecoderTree], n: int) -> str:
    trees = {}
    for u, t in decoder.items():
        trees[str(u + 1)] = {
            "root": [[v + 1, str(p)] for v, p in sorted(t.root.items())],
            "second": [
                [[v1 + 1, a1], [[v + 1, str(p)] for v, p in sorted(d.items())]]
                for (v1, a1), d in sorted(t.second.items())
            ],
            "third": [
                [[v1 + 1, a1, v2 + 1, a2], [[v + 1, str(p)] for v, p in sorted(d.items())]]
                for (v1, a1, v2, a2), d in sorted(t.third.items())
            ],
            "leaf": [
                [[v1 + 1, a1, v2 + 1, a2, v3 + 1], [[str(p), tag] for p, tag in mix]]
                for (v1, a1, v2, a2, v3), mix in sorted(t.leaf.items())
            ],
        }
    return json.dumps({"n": n, "trees": trees}, sort_keys=True)


def decoder_from_json(text: str) -> tuple[dict[int, DecoderTree], int]:
    payload = json.loads(text)
    n = payload["n"]
    decoder = {}
    for u_str, t in payload["trees"].items():
        root = {v - 1: Fraction(p) for v, p in t["root"]}
        second = {
            (key[0] - 1, key[1]): {v - 1: Fraction(p) for v, p in dist}
            for key, dist in t["second"]
        }
        third = {
            (key[0] - 1, key[1], key[2] - 1, key[3]): {v - 1: Fraction(p) for v, p in dist}
            for key, dist in t["third"]
        }
        leaf = {
            (key[0] - 1, key[1], key[2] - 1, key[3], key[4] - 1): tuple(
                (Fraction(p), tag) for p, tag in mix
            )
            for key, mix in t["leaf"]
        }
        decoder[int(u_str) - 1] = DecoderTree(root=root, second=second, third=third, leaf=leaf)
    return decoder, n


def code_to_json(code: PaddedCode) -> str:
    return json.dumps(
        {
            "n": code.n,
            "k": code.k,
            "systematic": [i + 1 for i in code.systematic],
            "codewords": [list(x) for x in code.codewords],
        },
        sort_keys=True,
    )


def code_from_json(text: str) -> PaddedCode:
    payload = json.loads(text)
    return PaddedCode(
        n=payload["n"],
        codewords=tuple(tuple(x) for x in payload["codewords"]),
        systematic=tuple(i - 1 for i in payload["systematic"]),
    )
