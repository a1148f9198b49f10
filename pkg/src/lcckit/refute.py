"""Kikuchi matrices for chain XOR instances and spectral refutation.

Graph-tailed instances at level t index rows by t-tuples of l-subsets; a
chain label activates the entry pairs whose blockwise symmetric differences
reproduce its links (left vertex in the row set, right vertex in the column
set), exactly C(n-2, l-1) per link.  Hypergraph-tailed cross-term instances
index rows by (2r+2)-tuples: ordinary symmetric-difference blocks for the
un-modded links of both chains, a shared-remainder block per modded link
(with a canonical extra excluded vertex when the two leftover vertices
coincide, keeping the count at exactly C(n-2, l-1)), and a free block that
any l-subset may occupy.

Row pruning zeroes rows/columns whose l1-norm exceeds Gamma/N (graph tail)
or Gamma/(N delta n) (hypergraph tail), then truncates every label to
exactly ceil(D_t/2) surviving entries, deterministically.  Each label's
entries are rescaled by D_t / (2 ceil(D_t/2)) so the pruned quadratic form
equals exactly half the instance polynomial regardless of parity, making
val(f) <= 2 N ||B||_2 an exact inequality that the brute-force oracle
checks on every desk-scale instance.

Spectral norms come from a dense SVD when the touched index space is small,
or from deterministic seeded block power iteration on B^T B with a
Rayleigh-residual upper bound (capped by the Schur bound
sqrt(||B||_1 ||B||_inf)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, log
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix

from .chain_xor import (
    ChainXorInstance,
    InducedPartition,
    bipartite_psi_eval,
    modded_monomial_mask,
    monomial_mask,
    val_brute_polynomial,
)
from .designs import BudgetExceededError

DEFAULT_MAX_ENTRIES = 2_000_000
DEFAULT_GAMMA = 64.0


class PruningError(RuntimeError):
    """A label kept fewer than ceil(D_t/2) entries after row pruning."""


# ---------------------------------------------------------------------------
# entry generation helpers
# ---------------------------------------------------------------------------


def _mask_iter(free: Sequence[int], size: int) -> Iterable[int]:
    for rest in combinations(free, size):
        m = 0
        for v in rest:
            m |= 1 << v
        yield m


def sd_block_pairs(v1: int, v2: int, n: int, ell: int) -> list[tuple[int, int]]:
    """(S, T) with S ^ T = {v1, v2}, v1 in S, v2 in T: C(n-2, l-1) pairs."""
    if v1 == v2:
        return []
    free = [v for v in range(n) if v != v1 and v != v2]
    return [(m | (1 << v1), m | (1 << v2)) for m in _mask_iter(free, ell - 1)]


def leftover_block_pairs(w: int, w_prime: int, n: int, ell: int) -> list[tuple[int, int]]:
    """(S, T) = (R + w, R + w') over shared remainders R.

    When w == w', a canonical extra vertex is excluded from R so the count
    stays exactly C(n-2, l-1).
    """
    if w == w_prime:
        extra = min(v for v in range(n) if v != w)
        free = [v for v in range(n) if v not in (w, extra)]
        return [(m | (1 << w), m | (1 << w)) for m in _mask_iter(free, ell - 1)]
    free = [v for v in range(n) if v not in (w, w_prime)]
    return [(m | (1 << w), m | (1 << w_prime)) for m in _mask_iter(free, ell - 1)]


def all_subset_masks(n: int, ell: int) -> list[int]:
    return list(_mask_iter(range(n), ell))


# ---------------------------------------------------------------------------
# label-wise matrices
# ---------------------------------------------------------------------------


@dataclass
class Label:
    """One chain (or chain pair) with its signed weight and entry list."""

    group: tuple  # (i,) for graph tail; (i, j) for hypergraph tail
    level: int
    coeff: Fraction  # signed: includes b_i (and b_j, 1/wt(Q))
    mask: int  # monomial mask of the label (for quadratic-form checks)
    entries: list[tuple[tuple[int, ...], tuple[int, ...]]]
    kept: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)


@dataclass
class KikuchiMatrix:
    """A sparse signed matrix stored label-wise, over tuple-of-subset indices."""

    kind: str  # "graph_tail" | "hyper_tail"
    n: int
    ell: int
    blocks: int  # t for graph tail, 2r+2 for hypergraph tail
    labels: list[Label]
    d_by_level: dict[int, int]  # level -> D_t

    @property
    def full_dimension(self) -> int:
        return comb(self.n, self.ell) ** self.blocks

    def groups(self) -> dict[tuple, list[Label]]:
        out: dict[tuple, list[Label]] = {}
        for lab in self.labels:
            out.setdefault(lab.group, []).append(lab)
        return out

    def row_norms(self, labels: Iterable[Label]) -> dict[tuple[int, ...], Fraction]:
        """l1-norms of the unsigned per-group matrix (1/D_t scaling included)."""
        norms: dict[tuple[int, ...], Fraction] = {}
        for lab in labels:
            w = abs(lab.coeff) / self.d_by_level[lab.level]
            for row, _ in lab.entries:
                norms[row] = norms.get(row, Fraction(0)) + w
        return norms

    def col_norms(self, labels: Iterable[Label]) -> dict[tuple[int, ...], Fraction]:
        norms: dict[tuple[int, ...], Fraction] = {}
        for lab in labels:
            w = abs(lab.coeff) / self.d_by_level[lab.level]
            for _, col in lab.entries:
                norms[col] = norms.get(col, Fraction(0)) + w
        return norms


def lift_value(row: tuple[int, ...], x: Sequence[int]) -> int:
    """x'_{row} = product over blocks of prod_{v in S} x_v."""
    sign = 1
    for m in row:
        while m:
            v = (m & -m).bit_length() - 1
            sign *= x[v]
            m &= m - 1
    return sign


def quadratic_form(mat: KikuchiMatrix, x: Sequence[int], pruned: bool = False) -> Fraction:
    """x'^T A x' over the labels (or x'^T B x' with the exact 1/2 scaling)."""
    total = Fraction(0)
    for lab in mat.labels:
        entries = lab.kept if pruned else lab.entries
        if not entries:
            continue
        if pruned:
            scale = lab.coeff / (2 * len(lab.kept))
        else:
            scale = lab.coeff / mat.d_by_level[lab.level]
        s = 0
        for row, col in entries:
            s += lift_value(row, x) * lift_value(col, x)
        total += scale * s
    return total


# ---------------------------------------------------------------------------
# graph-tailed construction
# ---------------------------------------------------------------------------


def build_graph_tail_matrix(
    inst: ChainXorInstance, ell: int, max_entries: int = DEFAULT_MAX_ENTRIES
) -> KikuchiMatrix:
    """Per-label entries for a graph-tailed instance Phi^(t)."""
    if not inst.kind.startswith("phi"):
        raise ValueError("graph-tailed matrix needs a phi instance")
    t = inst.level
    n = inst.n
    d_t = comb(n - 2, ell - 1) ** t
    if len(inst.coeffs) * d_t > max_entries:
        raise BudgetExceededError(
            f"{len(inst.coeffs)} labels x {d_t} entries exceed budget {max_entries}"
        )
    labels: list[Label] = []
    for (i, verts), coeff in sorted(inst.coeffs.items()):
        if coeff == 0:
            continue
        block_pairs: list[list[tuple[int, int]]] = []
        ok = True
        for h in range(t):
            v1, v2 = verts[1 + 3 * h], verts[2 + 3 * h]
            pairs = sd_block_pairs(v1, v2, n, ell)
            if not pairs:
                ok = False
                break
            block_pairs.append(pairs)
        if not ok:
            continue
        entries: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

        def expand(h: int, row: tuple[int, ...], col: tuple[int, ...]) -> None:
            if h == t:
                entries.append((row, col))
                return
            for s, tt in block_pairs[h]:
                expand(h + 1, row + (s,), col + (tt,))

        expand(0, (), ())
        labels.append(
            Label(group=(i,), level=t, coeff=coeff, mask=monomial_mask(verts), entries=entries)
        )
    return KikuchiMatrix(
        kind="graph_tail", n=n, ell=ell, blocks=t, labels=labels, d_by_level={t: d_t}
    )


# ---------------------------------------------------------------------------
# hypergraph-tailed construction
# ---------------------------------------------------------------------------


def all_max_directed_matchings(k: int) -> list[tuple[tuple[int, int], ...]]:
    """Every maximum matching of [k] with both orientations of each pair.

    Odd k leaves exactly one element unmatched; all k choices occur.
    """
    out: list[tuple[tuple[int, int], ...]] = []

    def pair_up(remaining: list[int], acc: list[tuple[int, int]]) -> None:
        if not remaining:
            out.append(tuple(acc))
            return
        a = remaining[0]
        for idx in range(1, len(remaining)):
            b = remaining[idx]
            rest = remaining[1:idx] + remaining[idx + 1 :]
            pair_up(rest, acc + [(a, b)])
            pair_up(rest, acc + [(b, a)])

    if k % 2 == 0:
        pair_up(list(range(k)), [])
    else:
        for left_out in range(k):
            pair_up([v for v in range(k) if v != left_out], [])
    return out


def sample_directed_matching(k: int, rng: np.random.Generator) -> tuple[tuple[int, int], ...]:
    order = list(rng.permutation(k))
    return tuple((order[2 * i], order[2 * i + 1]) for i in range(k // 2))


def hyper_tail_d(n: int, ell: int, r: int, t: int) -> int:
    return comb(n - 2, ell - 1) ** (2 * r + 2 - t) * comb(n, ell) ** t


def build_hyper_tail_matrix(
    ind: InducedPartition,
    b: Sequence[int],
    matching: Sequence[tuple[int, int]],
    ell: int,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> KikuchiMatrix:
    """Cross-term Kikuchi matrix A_M for the partitioned Psi instance."""
    r = ind.r
    n = ind.n
    pieces: dict[tuple[int, int, tuple[int, ...]], dict] = {}
    for p in ind.pieces:
        pieces[(p.head_index, p.level, p.q)] = p
    by_head: dict[int, list] = {}
    for p in ind.pieces:
        by_head.setdefault(p.head_index, []).append(p)

    labels: list[Label] = []
    total_entries = 0
    d_by_level: dict[int, int] = {}
    free_masks_cache: list[int] | None = None
    for (i, j) in matching:
        for pi in by_head.get(i, []):
            pj = pieces.get((j, pi.level, pi.q))
            if pj is None:
                continue
            t = pi.level
            q = pi.q
            d_t = hyper_tail_d(n, ell, r, t)
            d_by_level.setdefault(t, d_t)
            for c, wc in sorted(pi.chains.items()):
                for cp, wcp in sorted(pj.chains.items()):
                    coeff = b[i] * b[j] * wc * wcp / pi.q_weight
                    total_entries += d_t
                    if total_entries > max_entries:
                        raise BudgetExceededError(
                            f"hyper-tail entry budget {max_entries} exceeded"
                        )
                    # blocks for C then C' (rows S_0..S_r, S'_0..S'_r)
                    c_blocks: list[list[tuple[int, int]]] = []
                    cp_blocks: list[list[tuple[int, int]]] = []
                    for h in range(r + 1 - t):
                        c_blocks.append(
                            sd_block_pairs(c[1 + 3 * h], c[2 + 3 * h], n, ell)
                        )
                        cp_blocks.append(
                            sd_block_pairs(cp[1 + 3 * h], cp[2 + 3 * h], n, ell)
                        )
                    shared_blocks: list[list[tuple[int, int]]] = []
                    for g in range(t):
                        link = r + 1 - t + g
                        v1, v2 = c[1 + 3 * link], c[2 + 3 * link]
                        w = v2 if v1 == q[g] else v1
                        v1p, v2p = cp[1 + 3 * link], cp[2 + 3 * link]
                        wp = v2p if v1p == q[g] else v1p
                        shared_blocks.append(leftover_block_pairs(w, wp, n, ell))
                    if free_masks_cache is None:
                        free_masks_cache = all_subset_masks(n, ell)

                    entries: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

                    def expand(blocks: list[list[tuple[int, int]]], idx: int, row, col, out):
                        if idx == len(blocks):
                            out.append((row, col))
                            return
                        for s, tt in blocks[idx]:
                            expand(blocks, idx + 1, row + (s,), col + (tt,), out)

                    c_side: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
                    expand(c_blocks + shared_blocks, 0, (), (), c_side)
                    cp_side: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
                    expand(cp_blocks, 0, (), (), cp_side)
                    free_tuples: list[tuple[int, ...]] = [()]
                    for _ in range(t):
                        free_tuples = [
                            ft + (f,) for ft in free_tuples for f in free_masks_cache
                        ]
                    for row_c, col_c in c_side:
                        for row_cp, col_cp in cp_side:
                            for frees in free_tuples:
                                entries.append(
                                    (row_c + row_cp + frees, col_c + col_cp + frees)
                                )
                    mask = modded_monomial_mask(c, t, q, r) ^ modded_monomial_mask(
                        cp, t, q, r
                    )
                    labels.append(
                        Label(
                            group=(i, j),
                            level=t,
                            coeff=coeff,
                            mask=mask,
                            entries=entries,
                        )
                    )
    # levels with a C(n, l)^t free factor need t copies of the free mask;
    # the expansion above handles t <= 1 directly, so guard larger t.
    return KikuchiMatrix(
        kind="hyper_tail",
        n=n,
        ell=ell,
        blocks=2 * r + 2,
        labels=labels,
        d_by_level=d_by_level,
    )


@dataclass
class CrossTermPolynomial:
    """f_M = sum_t f_M^(t): per-level and combined coefficient maps."""

    matching: tuple[tuple[int, int], ...]
    by_level: dict[int, dict[int, Fraction]]

    def combined(self) -> dict[int, Fraction]:
        poly: dict[int, Fraction] = {}
        for level_poly in self.by_level.values():
            for m, c in level_poly.items():
                poly[m] = poly.get(m, Fraction(0)) + c
        return poly


def build_cross_term(
    ind: InducedPartition, b: Sequence[int], matching: Sequence[tuple[int, int]]
) -> CrossTermPolynomial:
    pieces: dict[tuple[int, int, tuple[int, ...]], object] = {
        (p.head_index, p.level, p.q): p for p in ind.pieces
    }
    by_head: dict[int, list] = {}
    for p in ind.pieces:
        by_head.setdefault(p.head_index, []).append(p)
    by_level: dict[int, dict[int, Fraction]] = {}
    for (i, j) in matching:
        for pi in by_head.get(i, []):
            pj = pieces.get((j, pi.level, pi.q))
            if pj is None:
                continue
            poly = by_level.setdefault(pi.level, {})
            for c, wc in pi.chains.items():
                mc = modded_monomial_mask(c, pi.level, pi.q, ind.r)
                for cp, wcp in pj.chains.items():
                    mcp = modded_monomial_mask(cp, pi.level, pi.q, ind.r)
                    m = mc ^ mcp
                    poly[m] = poly.get(m, Fraction(0)) + b[i] * b[j] * wc * wcp / pi.q_weight
    return CrossTermPolynomial(matching=tuple(tuple(p) for p in matching), by_level=by_level)


def cross_term_polynomial(
    ind: InducedPartition, b: Sequence[int], matching: Sequence[tuple[int, int]]
) -> dict[int, Fraction]:
    """f_M as a single coefficient map over monomial masks."""
    return build_cross_term(ind, b, matching).combined()


def eval_polynomial(poly: Mapping[int, Fraction], x: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for m, c in poly.items():
        sign = 1
        mm = m
        while mm:
            v = (mm & -mm).bit_length() - 1
            sign *= x[v]
            mm &= mm - 1
        total += c * sign
    return total


def cauchy_schwarz_check(
    ind: InducedPartition,
    b: Sequence[int],
    x: Sequence[int],
    y: Mapping[tuple[int, tuple[int, ...]], int],
    k: int,
    delta: Fraction,
) -> dict:
    """(sum_t Psi^(t)(x,y))^2 <= n (r+1) (k(r+1)/(delta^2 n) + 2k E_M[f_M(x)])."""
    lhs = bipartite_psi_eval(ind, b, x, y) ** 2
    matchings = all_max_directed_matchings(k)
    mean_f = Fraction(0)
    for m in matchings:
        mean_f += eval_polynomial(cross_term_polynomial(ind, b, m), x)
    mean_f /= len(matchings)
    n = ind.n
    r = ind.r
    rhs = n * (r + 1) * (Fraction(k * (r + 1)) / (delta**2 * n) + 2 * k * mean_f)
    return {"lhs": lhs, "rhs": rhs, "ok": lhs <= rhs, "mean_f": mean_f}


# ---------------------------------------------------------------------------
# row pruning
# ---------------------------------------------------------------------------


@dataclass
class PruneReport:
    gamma: float
    threshold: Fraction
    rows_pruned: int
    cols_pruned: int
    min_label_retention: float
    entry_retention: float
    first_moment: Fraction  # measured E_row[deg] over the full index space
    first_moment_target: Fraction
    max_conditional_mean: Fraction
    conditional_target: Fraction
    conditional_c_needed: float


def prune_rows(
    mat: KikuchiMatrix,
    gamma: float = DEFAULT_GAMMA,
    delta: Fraction | None = None,
    require_half: bool = True,
) -> PruneReport:
    """Zero heavy rows/columns per group, then truncate labels to ceil(D/2).

    Thresholds: Gamma/N for graph-tailed matrices, Gamma/(N delta n) for
    hypergraph-tailed ones (delta required).  Fills each label's ``kept``
    list deterministically (sorted entry order).  Raises PruningError if a
    label would retain fewer than ceil(D_t/2) entries and require_half is
    set.
    """
    N = mat.full_dimension
    if mat.kind == "graph_tail":
        threshold = Fraction(gamma).limit_denominator(10**6) / N
    else:
        if delta is None:
            raise ValueError("hyper-tail pruning needs delta")
        threshold = Fraction(gamma).limit_denominator(10**6) / (N * delta * mat.n)

    rows_pruned = 0
    cols_pruned = 0
    total_entries = 0
    total_kept = 0
    min_retention = 1.0
    max_cond = Fraction(0)
    max_group_weight = Fraction(0)
    for group, labels in sorted(mat.groups().items()):
        row_norms = mat.row_norms(labels)
        col_norms = mat.col_norms(labels)
        bad_rows = {s for s, v in row_norms.items() if v >= threshold}
        bad_cols = {s for s, v in col_norms.items() if v >= threshold}
        rows_pruned += len(bad_rows)
        cols_pruned += len(bad_cols)
        for lab in labels:
            d_t = mat.d_by_level[lab.level]
            survivors = [
                e for e in lab.entries if e[0] not in bad_rows and e[1] not in bad_cols
            ]
            need = (d_t + 1) // 2
            if len(survivors) < need:
                if require_half:
                    raise PruningError(
                        f"label in group {group} kept {len(survivors)} < {need} entries"
                    )
                lab.kept = survivors
            else:
                lab.kept = sorted(survivors)[:need]
            total_entries += len(lab.entries)
            total_kept += len(lab.kept)
            if lab.entries:
                min_retention = min(min_retention, len(survivors) / d_t)
            # conditional mean of deg over the label's active rows
            cond = sum(
                (row_norms[row] for row, _ in lab.entries), Fraction(0)
            ) / len(lab.entries)
            max_cond = max(max_cond, cond)
        group_weight = sum((abs(lab.coeff) for lab in labels), Fraction(0))
        max_group_weight = max(max_group_weight, group_weight)

    first_moment = max_group_weight / N
    if mat.kind == "graph_tail":
        first_target = Fraction(4, N)
        cond_target = Fraction(16, N)
        r_for_window = mat.blocks
    else:
        first_target = Fraction(1) / (N * delta * mat.n)
        cond_target = Fraction(4) / (N * delta * mat.n)
        r_for_window = (mat.blocks - 2) // 2
    if max_cond > cond_target:
        c_needed = float(
            (max_cond / cond_target - 1) * mat.n / max(1, mat.ell * max(1, r_for_window))
        )
    else:
        c_needed = 0.0
    return PruneReport(
        gamma=gamma,
        threshold=threshold,
        rows_pruned=rows_pruned,
        cols_pruned=cols_pruned,
        min_label_retention=min_retention,
        entry_retention=total_kept / total_entries if total_entries else 1.0,
        first_moment=first_moment,
        first_moment_target=first_target,
        max_conditional_mean=max_cond,
        conditional_target=cond_target,
        conditional_c_needed=c_needed,
    )


# ---------------------------------------------------------------------------
# assembly and norms
# ---------------------------------------------------------------------------


def assemble_sparse(mat: KikuchiMatrix, pruned: bool = True) -> tuple[csr_matrix, int]:
    """The signed matrix over touched indices; returns (matrix, touched dim).

    With ``pruned`` the per-label scaling is coeff / (2 ceil(D_t/2)), making
    the quadratic form exactly half the polynomial; otherwise coeff / D_t.
    """
    index: dict[tuple[int, ...], int] = {}

    def idx(key: tuple[int, ...]) -> int:
        if key not in index:
            index[key] = len(index)
        return index[key]

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for lab in mat.labels:
        entries = lab.kept if pruned else lab.entries
        if not entries:
            continue
        if pruned:
            scale = float(lab.coeff / (2 * len(entries)))
        else:
            scale = float(lab.coeff / mat.d_by_level[lab.level])
        for row, col in entries:
            rows.append(idx(row))
            cols.append(idx(col))
            vals.append(scale)
    dim = max(1, len(index))
    return csr_matrix((vals, (rows, cols)), shape=(dim, dim)), dim


@dataclass
class NormEstimate:
    lower: float
    upper: float
    method: str
    iterations: int = 0
    residual: float = 0.0


def spectral_norm(
    B: csr_matrix,
    method: str = "auto",
    seed: int = 0,
    tol: float = 1e-9,
    max_iter: int = 5000,
    exact_cap: int = 512,
) -> NormEstimate:
    """Largest singular value with a certified upper bound.

    "exact_small" does a dense SVD (dimension <= exact_cap); power
    iteration runs a deterministic seeded block iteration on B^T B and
    returns sqrt(theta) as the lower bound and
    min(sqrt(theta + residual), Schur bound) as the upper.
    """
    dim = B.shape[0]
    if method == "auto":
        method = "exact_small" if dim <= exact_cap else "power_iteration"
    if method == "exact_small":
        if dim > 4096:
            raise ValueError("matrix too large for a dense decomposition")
        s = np.linalg.svd(B.toarray(), compute_uv=False)
        top = float(s[0]) if len(s) else 0.0
        return NormEstimate(lower=top, upper=top, method="exact_small")
    if method != "power_iteration":
        raise ValueError(f"unknown method {method!r}")

    rng = np.random.default_rng(seed)
    block = min(4, dim)
    V = rng.standard_normal((dim, block))
    V, _ = np.linalg.qr(V)
    Bt = B.T.tocsr()

    def mv(W: np.ndarray) -> np.ndarray:
        return Bt @ (B @ W)

    theta_old = 0.0
    theta = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        W = mv(V)
        V, _ = np.linalg.qr(W)
        H = V.T @ mv(V)
        evals, evecs = np.linalg.eigh((H + H.T) / 2)
        theta = float(evals[-1])
        if theta_old > 0 and abs(theta - theta_old) <= tol * theta:
            break
        theta_old = theta
    top_vec = V @ evecs[:, -1]
    resid = float(np.linalg.norm(mv(top_vec[:, None]).ravel() - theta * top_vec))
    schur = float(
        np.sqrt(
            max(1e-300, abs(B).sum(axis=0).max() * abs(B).sum(axis=1).max())
        )
    )
    lower = float(np.sqrt(max(theta, 0.0)))
    upper = min(float(np.sqrt(theta + resid)), schur)
    upper = max(upper, lower)
    return NormEstimate(
        lower=lower, upper=upper, method="power_iteration", iterations=iterations, residual=resid
    )


def group_matrices(mat: KikuchiMatrix, pruned: bool = True) -> list[np.ndarray]:
    """Unsigned per-group dense matrices on a shared touched index space.

    The group sign (b_i, or b_i b_j) is constant within a group, so these
    are the fixed matrices X_i of the Khintchine inequality: the assembled
    matrix for fresh signs is sum_i s_i X_i.
    """
    index: dict[tuple[int, ...], int] = {}

    def idx(key: tuple[int, ...]) -> int:
        if key not in index:
            index[key] = len(index)
        return index[key]

    triples: dict[tuple, list[tuple[int, int, float]]] = {}
    for lab in mat.labels:
        entries = lab.kept if pruned else lab.entries
        if not entries:
            continue
        if pruned:
            scale = abs(float(lab.coeff)) / (2 * len(entries))
        else:
            scale = abs(float(lab.coeff)) / mat.d_by_level[lab.level]
        bucket = triples.setdefault(lab.group, [])
        for row, col in entries:
            bucket.append((idx(row), idx(col), scale))
    dim = max(1, len(index))
    out = []
    for group in sorted(triples):
        x = np.zeros((dim, dim))
        for i, j, v in triples[group]:
            x[i, j] += v
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class RefutationCertificate:
    kind: str
    params: dict
    norm_upper: float
    val_bound: float
    val_brute: float | None
    pruned_rows: int
    retention: float
    khintchine_ratio: float | None = None

    def sound(self, tol: float = 1e-7) -> bool:
        if self.val_brute is None:
            return True
        return self.val_bound >= self.val_brute - tol * max(1.0, abs(self.val_brute))

    def to_json(self) -> str:
        return json.dumps(
            {
                "params": {**self.params, "kind": self.kind},
                "norm_upper": self.norm_upper,
                "val_bound": self.val_bound,
                "val_brute": self.val_brute,
                "pruned_rows": self.pruned_rows,
                "retention": self.retention,
                "khintchine_ratio": self.khintchine_ratio,
            },
            sort_keys=True,
        )


def certify_graph_tail(
    col,
    heads: Sequence[int],
    t: int,
    ell: int,
    trials: int,
    seed: int,
    gamma: float = DEFAULT_GAMMA,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> list[RefutationCertificate]:
    """Certificates for ``trials`` random sign vectors b on Phi^(t)."""
    from .chain_xor import build_phi_instance, val_brute

    rng = np.random.default_rng(seed)
    certs = []
    kh_ratio: float | None = None
    for trial in range(trials):
        b = [int(v) for v in rng.choice((1, -1), size=len(heads))]
        inst = build_phi_instance(col, heads, b, t)
        mat = build_graph_tail_matrix(inst, ell, max_entries=max_entries)
        report = prune_rows(mat, gamma=gamma)
        if trial == 0:
            mats = group_matrices(mat)
            if mats and max(m.shape[0] for m in mats) <= 1024:
                kh_ratio = khintchine_check(mats, trials=max(trials, 50), seed=seed)["ratio"]
        B, _ = assemble_sparse(mat, pruned=True)
        est = spectral_norm(B, seed=seed)
        bound = 2.0 * mat.full_dimension * est.upper
        brute = val_brute(inst) if inst.n <= 24 else None
        certs.append(
            RefutationCertificate(
                kind="graph_tail",
                params={"trial": trial, "t": t, "ell": ell, "k": len(heads), "n": col.n, "gamma": gamma},
                norm_upper=est.upper,
                val_bound=bound,
                val_brute=brute,
                pruned_rows=report.rows_pruned,
                retention=report.entry_retention,
                khintchine_ratio=kh_ratio,
            )
        )
    return certs


def certify_hyper_tail(
    col,
    heads: Sequence[int],
    r: int,
    ell: int,
    d: int,
    delta: Fraction,
    trials: int,
    seed: int,
    gamma: float = DEFAULT_GAMMA,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> list[RefutationCertificate]:
    """Certificates for random (b, M) draws on the cross-term polynomials."""
    from .chain_xor import greedy_partition, induce_partition

    part = greedy_partition(col, r=r, d=d, delta=delta)
    ind = induce_partition(col, heads, r, part)
    rng = np.random.default_rng(seed)
    k = len(heads)
    certs = []
    kh_ratio: float | None = None
    for trial in range(trials):
        b = [int(v) for v in rng.choice((1, -1), size=k)]
        m = sample_directed_matching(k, rng)
        mat = build_hyper_tail_matrix(ind, b, m, ell, max_entries=max_entries)
        report = prune_rows(mat, delta=delta, gamma=gamma)
        if trial == 0 and mat.labels:
            mats = group_matrices(mat)
            if mats and max(x.shape[0] for x in mats) <= 1024:
                kh_ratio = khintchine_check(mats, trials=max(trials, 50), seed=seed)["ratio"]
        B, _ = assemble_sparse(mat, pruned=True)
        est = spectral_norm(B, seed=seed)
        bound = 2.0 * mat.full_dimension * est.upper
        poly = cross_term_polynomial(ind, b, m)
        brute = val_brute_polynomial(poly, col.n) if col.n <= 24 else None
        certs.append(
            RefutationCertificate(
                kind="hyper_tail",
                params={
                    "trial": trial,
                    "r": r,
                    "ell": ell,
                    "k": k,
                    "n": col.n,
                    "d": d,
                    "delta": str(delta),
                    "gamma": gamma,
                    "matching": [list(p) for p in m],
                },
                norm_upper=est.upper,
                val_bound=bound,
                val_brute=brute,
                pruned_rows=report.rows_pruned,
                retention=report.entry_retention,
                khintchine_ratio=kh_ratio,
            )
        )
    return certs


# ---------------------------------------------------------------------------
# matrix Khintchine Monte Carlo check
# ---------------------------------------------------------------------------


def khintchine_check(
    matrices: Sequence[np.ndarray], trials: int, seed: int
) -> dict:
    """Mean of ||sum b_i X_i||_2 over random signs vs sqrt(2 sigma^2 log(d1+d2)).

    The logarithm is natural; sigma^2 is the exact max of the two Gram
    spectral norms.
    """
    if not matrices:
        raise ValueError("need at least one matrix")
    d1, d2 = matrices[0].shape
    gram_r = sum(x @ x.T for x in matrices)
    gram_c = sum(x.T @ x for x in matrices)
    sigma_sq = max(
        float(np.linalg.norm(gram_r, 2)), float(np.linalg.norm(gram_c, 2))
    )
    bound = float(np.sqrt(2 * sigma_sq * log(d1 + d2)))
    rng = np.random.default_rng(seed)
    norms = []
    for _ in range(trials):
        signs = rng.choice((1.0, -1.0), size=len(matrices))
        total = sum(s * x for s, x in zip(signs, matrices))
        norms.append(float(np.linalg.norm(total, 2)))
    mean = float(np.mean(norms))
    return {
        "mean_norm": mean,
        "bound": bound,
        "ratio": mean / bound if bound else float("inf"),
        "sigma_sq": sigma_sq,
        "trials": trials,
        "ok": mean <= bound,
    }
