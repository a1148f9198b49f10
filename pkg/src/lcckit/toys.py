"""Small codes with handcrafted decoders used across the test and
acceptance suites.

Each toy bundles a +-1 code (with its systematic coordinates), one decision
tree per coordinate, the decoder's measured smoothness, and its completeness
deficit.  The zoo covers: a repetition code with a mixed 2-/3-query decoder,
a Hadamard-style code whose decoder never uses its third answer, the design
codes at t=1,2 with their canonical triple decoders, a decoder whose second
query is genuinely adaptive, a constant-output decoder, and a noisy variant
with mixed leaf tags.  A deliberately non-smooth decoder is provided
separately as a negative fixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .decoders import DecoderTree, PaddedCode, measured_decoder_smoothness
from .designs import build_rm_design
from .fields import systematic_subset

ONE = Fraction(1)


@dataclass
class ToyLcc:
    name: str
    decoder: dict[int, DecoderTree]
    code: PaddedCode
    delta: Fraction  # measured decoder smoothness
    eps: Fraction  # completeness deficit


def _nonadaptive_tree(
    v1: int, v2: int, v3: int, tag_of_branch, mix_eps: Fraction = Fraction(0)
) -> DecoderTree:
    """A tree that queries v1, v2, v3 regardless of answers.

    ``tag_of_branch(a1, a2)`` names the leaf tag; with mix_eps > 0 the
    opposite tag is mixed in with that probability.
    """
    flip = {"+1": "-1", "-1": "+1", "+a3": "-a3", "-a3": "+a3"}
    leaf = {}
    for a1, a2 in product((1, -1), repeat=2):
        tag = tag_of_branch(a1, a2)
        if mix_eps:
            leaf[(v1, a1, v2, a2, v3)] = ((ONE - mix_eps, tag), (mix_eps, flip[tag]))
        else:
            leaf[(v1, a1, v2, a2, v3)] = ((ONE, tag),)
    return DecoderTree(
        root={v1: ONE},
        second={(v1, a1): {v2: ONE} for a1 in (1, -1)},
        third={(v1, a1, v2, a2): {v3: ONE} for a1 in (1, -1) for a2 in (1, -1)},
        leaf=leaf,
    )


def _design_code(t: int) -> PaddedCode:
    lcc = build_rm_design(t)
    basis = list(lcc.dual_basis)
    sys_coords = systematic_subset(basis)
    codewords = []
    for mask in range(2 ** len(basis)):
        bits = 0
        for i, b in enumerate(basis):
            if (mask >> i) & 1:
                bits ^= b.bits
        codewords.append(tuple(1 - 2 * ((bits >> v) & 1) for v in range(lcc.n)))
    return PaddedCode(n=lcc.n, codewords=tuple(codewords), systematic=tuple(sys_coords))


def _design_decoder(t: int, mix_eps: Fraction = Fraction(0)) -> tuple[dict[int, DecoderTree], PaddedCode]:
    """The canonical decoder: pick a correction triple uniformly, multiply."""
    from .designs import derive_matchings

    lcc = build_rm_design(t)
    matchings = derive_matchings(lcc)
    code = _design_code(t)
    flip = {"+a3": "-a3", "-a3": "+a3"}
    decoder: dict[int, DecoderTree] = {}
    for u in range(lcc.n):
        triples = matchings[u]
        p = Fraction(1, len(triples))
        root: dict[int, Fraction] = {}
        second = {}
        third = {}
        leaf = {}
        for t0, t1, t2 in triples:  # matching: smallest elements are distinct
            root[t0] = root.get(t0, Fraction(0)) + p
            for a1 in (1, -1):
                second[(t0, a1)] = {t1: ONE}
                for a2 in (1, -1):
                    third[(t0, a1, t1, a2)] = {t2: ONE}
                    tag = "+a3" if a1 * a2 == 1 else "-a3"
                    if mix_eps:
                        leaf[(t0, a1, t1, a2, t2)] = (
                            (ONE - mix_eps, tag),
                            (mix_eps, flip[tag]),
                        )
                    else:
                        leaf[(t0, a1, t1, a2, t2)] = ((ONE, tag),)
        decoder[u] = DecoderTree(root=root, second=second, third=third, leaf=leaf)
    return decoder, code


def toy_repetition() -> ToyLcc:
    """(b, b, b) with a decoder that flips a coin between a parity read
    (x_u = x_{v3}) and a constant-from-second-answer read."""
    n = 3
    codewords = tuple((b, b, b) for b in (1, -1))
    code = PaddedCode(n=n, codewords=codewords, systematic=(0,))
    half = Fraction(1, 2)
    decoder = {}
    for u in range(n):
        others = [v for v in range(n) if v != u]
        v1, v2 = others[0], others[1]
        leaf = {}
        for a1, a2 in product((1, -1), repeat=2):
            leaf[(v1, a1, v2, a2, u)] = (
                (half, "+a3"),
                (half, "+1" if a1 == 1 else "-1"),
            )
        decoder[u] = DecoderTree(
            root={v1: ONE},
            second={(v1, a): {v2: ONE} for a in (1, -1)},
            third={(v1, a1, v2, a2): {u: ONE} for a1 in (1, -1) for a2 in (1, -1)},
            leaf=leaf,
        )
    delta = measured_decoder_smoothness(decoder, code)
    return ToyLcc("repetition3", decoder, code, delta, Fraction(0))


def toy_hadamard() -> ToyLcc:
    """(b1, b2, b1 b2, 1): every bit is a product of two others, so every
    leaf tag is constant and all compiled weight is 2-query."""
    codewords = tuple(
        (b1, b2, b1 * b2, 1) for b1 in (1, -1) for b2 in (1, -1)
    )
    code = PaddedCode(n=4, codewords=codewords, systematic=(0, 1))
    sign_tag = lambda a1, a2: "+1" if a1 * a2 == 1 else "-1"
    const_one = lambda a1, a2: "+1"
    decoder = {
        0: _nonadaptive_tree(1, 2, 3, sign_tag),
        1: _nonadaptive_tree(0, 2, 3, sign_tag),
        2: _nonadaptive_tree(0, 1, 3, sign_tag),
        3: _nonadaptive_tree(0, 1, 2, const_one),
    }
    delta = measured_decoder_smoothness(decoder, code)
    return ToyLcc("hadamard4", decoder, code, delta, Fraction(0))


def toy_design(t: int) -> ToyLcc:
    decoder, code = _design_decoder(t)
    delta = measured_decoder_smoothness(decoder, code)
    return ToyLcc(f"design_t{t}", decoder, code, delta, Fraction(0))


def toy_noisy_design(eps: Fraction = Fraction(1, 20)) -> ToyLcc:
    decoder, code = _design_decoder(1, mix_eps=eps)
    delta = measured_decoder_smoothness(decoder, code)
    return ToyLcc(f"design_t1_noisy_{eps}", decoder, code, delta, eps)


def toy_adaptive() -> ToyLcc:
    """(b1, b2, b1, b1): decoding bit 0 routes the second query on the
    first answer (x2 when x1 = +1, x3 otherwise) and outputs it."""
    codewords = tuple((b1, b2, b1, b1) for b1 in (1, -1) for b2 in (1, -1))
    code = PaddedCode(n=4, codewords=codewords, systematic=(0, 1))
    const_a2 = lambda a1, a2: "+1" if a2 == 1 else "-1"
    const_a1 = lambda a1, a2: "+1" if a1 == 1 else "-1"
    tree0 = DecoderTree(
        root={1: ONE},
        second={(1, 1): {2: ONE}, (1, -1): {3: ONE}},
        third={
            (1, 1, 2, a2): {3: ONE} for a2 in (1, -1)
        }
        | {(1, -1, 3, a2): {2: ONE} for a2 in (1, -1)},
        leaf={
            (1, 1, 2, a2, 3): ((ONE, "+1" if a2 == 1 else "-1"),) for a2 in (1, -1)
        }
        | {(1, -1, 3, a2, 2): ((ONE, "+1" if a2 == 1 else "-1"),) for a2 in (1, -1)},
    )
    decoder = {
        0: tree0,
        1: _nonadaptive_tree(1, 2, 3, const_a1),
        2: _nonadaptive_tree(0, 1, 3, const_a1),
        3: _nonadaptive_tree(0, 1, 2, const_a1),
    }
    delta = measured_decoder_smoothness(decoder, code)
    return ToyLcc("adaptive4", decoder, code, delta, Fraction(0))


def toy_always_one() -> ToyLcc:
    """The all-ones code with a decoder that ignores its queries."""
    code = PaddedCode(n=4, codewords=((1, 1, 1, 1),), systematic=())
    const_one = lambda a1, a2: "+1"
    decoder = {u: _nonadaptive_tree((u + 1) % 4, (u + 2) % 4, (u + 3) % 4, const_one) for u in range(4)}
    delta = measured_decoder_smoothness(decoder, code)
    return ToyLcc("always_one", decoder, code, delta, Fraction(0))


def toy_nonsmooth() -> ToyLcc:
    """Every index reads coordinate 3: maximally concentrated queries.

    Negative fixture: compiled at an honest constant delta this breaches
    the smoothness cap.
    """
    codewords = tuple((b, b, b, b) for b in (1, -1))
    code = PaddedCode(n=4, codewords=codewords, systematic=(0,))
    decoder = {u: _nonadaptive_tree(1, 2, 3, lambda a1, a2: "+a3") for u in range(4)}
    delta = measured_decoder_smoothness(decoder, code)
    return ToyLcc("nonsmooth", decoder, code, delta, Fraction(0))


def toy_concentrated_collection() -> tuple["HypergraphCollection", Fraction, int]:
    """A synthetic collection whose level-1 chain mass piles onto one suffix.

    Every head carries the single 3-edge (1, 2, 0) with weight 1/4, so the
    pattern (1, 0) collects mass 12/4 = 3, exactly the heaviness threshold
    at n = 12, delta = 1/3, d = 4 (and d^2 = 16 >= n).  Light graph edges
    on vertices 6..11 feed the graph-tailed polynomials without touching
    the smoothness budget.  Returns (collection, delta, d).
    """
    from .decoders import HypergraphCollection

    n = 12
    quarter = Fraction(1, 4)
    col = HypergraphCollection(n=n)
    for u in range(n):
        col.add_h(u, (1, 2, 0), quarter)
        base = 6 + (u % 3) * 2
        col.add_g(u, (base, base + 1), quarter)
    return col, Fraction(1, 3), 4


def toy_concentrated_deep() -> tuple["HypergraphCollection", Fraction, int, int]:
    """Concentrated mass with heavy suffixes at levels 1 and 2.

    n = 12, delta = 3/4 (delta n = 9), d = 3, r = 2: every head carries the
    single 3-edge (1, 2, 0) with weight 1/9, so the level-2 suffix mass
    12/81 exactly meets the threshold 12 * 9 / 9^3.  Returns
    (collection, delta, d, r).
    """
    from .decoders import HypergraphCollection

    n = 12
    w = Fraction(1, 9)
    col = HypergraphCollection(n=n)
    for u in range(n):
        col.add_h(u, (1, 2, 0), w)
    return col, Fraction(3, 4), 3, 2


def collection_delta(col) -> Fraction:
    """The best exact smoothness of a collection: 1 / (max incident * n)."""
    w, _ = col.max_incident()
    return Fraction(1) if w == 0 else Fraction(1) / (w * col.n)


def toy_zoo() -> list[ToyLcc]:
    return [
        toy_repetition(),
        toy_hadamard(),
        toy_design(1),
        toy_design(2),
        toy_adaptive(),
        toy_always_one(),
        toy_noisy_design(),
    ]
