"""2-(n,4,1) block designs from affine lines over GF(4), and their dual codes.

Points are the vectors of GF(4)^t, enumerated in lexicographic order with
GF(4) ordered (0, 1, beta, 1+beta); blocks are the affine lines
{x0, x1, x0 + beta(x1-x0), x0 + (1+beta)(x1-x0)}.  Every pair of points lies
on exactly one line, so the lines form a 2-(4^t, 4, 1) design.  The dual
code V = {x in GF(2)^n : sum_{v in C} x_v = 0 for all blocks C} is the
object of interest: restricting a degree-<=2 polynomial over GF(4) to a
line gives a degree-<=2 univariate polynomial, whose four values sum to
zero, so every GF(2) projection of the quadratic Reed-Muller code lands
inside V.

The dimension experiment (``code_dimension_report``) measures, instead of
assuming, which GF(4)->GF(2) projection and which monomial set reproduce
the nominal dimension k = 1 + t + C(t,2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

from .fields import (
    F4_ELEMENTS,
    BitMatrix,
    BitVec,
    GF4_PROJECTIONS,
    f4_add_int,
    f4_mul_int,
    rank_and_nullspace,
    span_dimension,
)

DEFAULT_MAX_POINTS = 4096


class BudgetExceededError(RuntimeError):
    """A size budget was exceeded; carries partial progress where relevant."""

    def __init__(self, message: str, count_so_far: int | None = None):
        super().__init__(message)
        self.count_so_far = count_so_far


@dataclass(frozen=True)
class Design:
    """A 2-(n,4,1) candidate: n points (0-based) and sorted 4-element blocks."""

    n: int
    blocks: tuple[tuple[int, int, int, int], ...]


@dataclass(frozen=True)
class DesignReport:
    ok: bool
    pairs_uncovered: int
    pairs_multicovered: int
    first_violation: tuple[int, int] | None


@dataclass(frozen=True)
class DesignLcc:
    """A design together with the GF(2) dual code it corrects."""

    design: Design
    dual_basis: tuple[BitVec, ...]
    dimension_k: int  # n - rank(incidence matrix), measured exactly

    @property
    def n(self) -> int:
        return self.design.n


#: Per-vertex perfect 3-uniform matchings H_u = {C \ {u} : u in C in blocks}.
MatchingFamily = tuple[tuple[tuple[int, int, int], ...], ...]


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def f4_points(t: int) -> list[tuple[int, ...]]:
    """GF(4)^t in lexicographic order, first coordinate most significant."""
    pts: list[tuple[int, ...]] = [()]
    for _ in range(t):
        pts = [p + (e,) for p in pts for e in F4_ELEMENTS]
    return pts


def _point_index(p: tuple[int, ...]) -> int:
    idx = 0
    for digit in p:
        idx = idx * 4 + digit
    return idx


def affine_line(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Sorted point indices of the line through distinct points p, q."""
    d = tuple(f4_add_int(a, b) for a, b in zip(p, q))
    pts = []
    for lam in F4_ELEMENTS:
        pt = tuple(f4_add_int(a, f4_mul_int(lam, dd)) for a, dd in zip(p, d))
        pts.append(_point_index(pt))
    return tuple(sorted(pts))


def build_design(t: int, max_points: int = DEFAULT_MAX_POINTS) -> Design:
    """All affine lines of GF(4)^t as a block design on n = 4^t points.

    Each line is emitted exactly once: a line found from the pair (i, j) is
    kept only if (i, j) are its two smallest points.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    n = 4**t
    if n > max_points:
        raise BudgetExceededError(f"4^{t} = {n} exceeds point budget {max_points}")
    pts = f4_points(t)
    blocks = []
    for i, j in combinations(range(n), 2):
        line = affine_line(pts[i], pts[j])
        if line[0] == i and line[1] == j:
            blocks.append(line)
    return Design(n=n, blocks=tuple(blocks))


def incidence_matrix(d: Design) -> BitMatrix:
    """Block-by-point 0/1 incidence matrix (rows are parity checks)."""
    rows = [BitVec.from_support(d.n, block) for block in d.blocks]
    return BitMatrix(len(d.blocks), d.n, rows)


def build_rm_design(t: int, max_points: int = DEFAULT_MAX_POINTS) -> DesignLcc:
    """The Reed-Muller design LCC at blocklength 4^t, with its dual code."""
    design = build_design(t, max_points=max_points)
    r, basis = rank_and_nullspace(incidence_matrix(design))
    return DesignLcc(design=design, dual_basis=tuple(basis), dimension_k=design.n - r)


def claimed_dimension(t: int) -> int:
    """Nominal message dimension 1 + t + C(t,2) of the quadratic code."""
    return 1 + t + comb(t, 2)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def verify_design(d: Design) -> DesignReport:
    """Check every unordered pair of points is covered by exactly one block."""
    cover: dict[tuple[int, int], int] = {}
    for block in d.blocks:
        if len(set(block)) != 4 or not all(0 <= v < d.n for v in block):
            raise ValueError(f"malformed block {block}")
        for pair in combinations(sorted(block), 2):
            cover[pair] = cover.get(pair, 0) + 1
    uncovered = 0
    multi = 0
    first: tuple[int, int] | None = None
    for pair in combinations(range(d.n), 2):
        c = cover.get(pair, 0)
        if c != 1:
            if c == 0:
                uncovered += 1
            else:
                multi += 1
            if first is None:
                first = pair
    return DesignReport(
        ok=(uncovered == 0 and multi == 0),
        pairs_uncovered=uncovered,
        pairs_multicovered=multi,
        first_violation=first,
    )


def derive_matchings(lcc: DesignLcc | Design) -> MatchingFamily:
    """Per-vertex correction triples H_u = {C \\ {u} : u in C}.

    For a valid design these partition [n] \\ {u} into (n-1)/3 triples.
    Raises ValueError if the underlying design is not a 2-(n,4,1) design.
    """
    design = lcc.design if isinstance(lcc, DesignLcc) else lcc
    report = verify_design(design)
    if not report.ok:
        raise ValueError(f"not a design: first violating pair {report.first_violation}")
    per_vertex: list[list[tuple[int, int, int]]] = [[] for _ in range(design.n)]
    for block in design.blocks:
        for u in block:
            triple = tuple(v for v in block if v != u)
            per_vertex[u].append(triple)  # already sorted: block is sorted
    return tuple(tuple(sorted(hu)) for hu in per_vertex)


def matchings_are_perfect(m: MatchingFamily, n: int) -> bool:
    for u, hu in enumerate(m):
        seen = {u}
        for triple in hu:
            for v in triple:
                if v in seen:
                    return False
                seen.add(v)
        if len(seen) != n:
            return False
    return True


def decode_checks_hold(lcc: DesignLcc, m: MatchingFamily | None = None) -> bool:
    """x_u = sum_{v in T} x_v for every u, T in H_u, dual-basis x."""
    if m is None:
        m = derive_matchings(lcc)
    for u, hu in enumerate(m):
        for triple in hu:
            mask = (1 << triple[0]) | (1 << triple[1]) | (1 << triple[2])
            for x in lcc.dual_basis:
                if x.get(u) != x.parity_on(mask):
                    return False
    return True


# ---------------------------------------------------------------------------
# dimension experiment
# ---------------------------------------------------------------------------


def _monomials(t: int, include_squares: bool) -> list[tuple[tuple[int, int], ...]]:
    """Monomials as tuples of (variable, exponent), degree <= 2."""
    mons: list[tuple[tuple[int, int], ...]] = [()]
    for i in range(t):
        mons.append(((i, 1),))
    for i, j in combinations(range(t), 2):
        mons.append(((i, 1), (j, 1)))
    if include_squares:
        for i in range(t):
            mons.append(((i, 2),))
    return mons


def _eval_monomial(mon: tuple[tuple[int, int], ...], point: tuple[int, ...]) -> int:
    acc = 1
    for var, exp in mon:
        v = point[var]
        for _ in range(exp):
            acc = f4_mul_int(acc, v)
    return acc


@dataclass(frozen=True)
class DimensionRow:
    projection: str
    monomials: str  # "multilinear" | "with_squares"
    coefficients: str  # "F2" | "F4"
    dimension: int
    matches_claimed: bool


@dataclass(frozen=True)
class DimensionReport:
    t: int
    n: int
    claimed_k: int
    dim_dual_code: int
    rows: tuple[DimensionRow, ...]

    def any_match(self) -> bool:
        return any(r.matches_claimed for r in self.rows)


def code_dimension_report(t: int, max_points: int = DEFAULT_MAX_POINTS) -> DimensionReport:
    """Measure GF(2) dimensions of projected quadratic evaluation codes.

    For each projection pi in {trace, const, trace_beta}, each monomial set
    (multilinear vs with squares), and each coefficient scope:

    * coefficients "F2": span of { pi(ev(m)) } over the monomials m, i.e.
      messages with GF(2) coefficients;
    * coefficients "F4": span of { pi(ev(m)), pi(ev(beta*m)) }, the image of
      the full GF(4)-linear code under pointwise pi.

    Also reports dim(V) = n - rank(incidence) of the design dual code.
    """
    lcc = build_rm_design(t, max_points=max_points)
    n = lcc.n
    claimed = claimed_dimension(t)
    pts = f4_points(t)
    rows: list[DimensionRow] = []
    for mon_name, include_squares in (("multilinear", False), ("with_squares", True)):
        mons = _monomials(t, include_squares)
        evals = [[_eval_monomial(mon, p) for p in pts] for mon in mons]
        beta_evals = [[f4_mul_int(2, v) for v in ev] for ev in evals]
        for proj_name, proj in GF4_PROJECTIONS.items():
            f2_vecs = [BitVec.from_bits([proj(v) for v in ev]) for ev in evals]
            f4_vecs = f2_vecs + [BitVec.from_bits([proj(v) for v in ev]) for ev in beta_evals]
            for scope, vecs in (("F2", f2_vecs), ("F4", f4_vecs)):
                dim = span_dimension(vecs)
                rows.append(
                    DimensionRow(
                        projection=proj_name,
                        monomials=mon_name,
                        coefficients=scope,
                        dimension=dim,
                        matches_claimed=(dim == claimed),
                    )
                )
    return DimensionReport(
        t=t, n=n, claimed_k=claimed, dim_dual_code=lcc.dimension_k, rows=tuple(rows)
    )


def projected_code_in_dual(t: int, projection: str = "trace") -> bool:
    """Every projected quadratic evaluation vector satisfies the line parities."""
    lcc = build_rm_design(t)
    proj = GF4_PROJECTIONS[projection]
    pts = f4_points(t)
    checks = incidence_matrix(lcc.design)
    for include_squares in (False, True):
        for mon in _monomials(t, include_squares):
            ev = [_eval_monomial(mon, p) for p in pts]
            for scaled in (ev, [f4_mul_int(2, v) for v in ev]):
                vec = BitVec.from_bits([proj(v) for v in scaled])
                if checks.mul_vec(vec).bits != 0:
                    return False
    return True


def delta_of(n: int) -> Fraction:
    """Matching density (n-1)/(3n) of the per-vertex triples."""
    return Fraction(1, 3) - Fraction(1, 3 * n)


# ---------------------------------------------------------------------------
# file I/O (1-based points on disk)
# ---------------------------------------------------------------------------


def design_to_json(obj: Design | DesignLcc) -> str:
    design = obj.design if isinstance(obj, DesignLcc) else obj
    payload: dict = {
        "n": design.n,
        "blocks": [[v + 1 for v in block] for block in design.blocks],
    }
    if isinstance(obj, DesignLcc):
        payload["k"] = obj.dimension_k
        payload["dual_basis"] = [b.to_hex() for b in obj.dual_basis]
    return json.dumps(payload, sort_keys=True)


def design_from_json(text: str) -> Design | DesignLcc:
    payload = json.loads(text)
    blocks = tuple(tuple(sorted(v - 1 for v in block)) for block in payload["blocks"])
    design = Design(n=payload["n"], blocks=blocks)
    if "dual_basis" in payload:
        basis = tuple(BitVec.from_hex(design.n, h) for h in payload["dual_basis"])
        return DesignLcc(design=design, dual_basis=basis, dimension_k=payload["k"])
    return design


def save_design(obj: Design | DesignLcc, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(design_to_json(obj) + "\n")


def load_design(path: str) -> Design | DesignLcc:
    with open(path) as fh:
        return design_from_json(fh.read())


def load_design_lcc(path: str) -> DesignLcc:
    obj = load_design(path)
    if isinstance(obj, DesignLcc):
        return obj
    r, basis = rank_and_nullspace(incidence_matrix(obj))
    return DesignLcc(design=obj, dual_basis=tuple(basis), dimension_k=obj.n - r)


def mutate_drop_block(d: Design, index: int = 0) -> Design:
    blocks = list(d.blocks)
    del blocks[index]
    return Design(n=d.n, blocks=tuple(blocks))


def mutate_duplicate_block(d: Design, index: int = 0) -> Design:
    return Design(n=d.n, blocks=d.blocks + (d.blocks[index],))
