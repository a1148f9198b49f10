"""Command-line interface.

Verbs: design, chains, kikuchi, ldc2, decoder, xor, refute, oracle,
pipeline, report.  Exit codes: 0 pass, 1 check failure, 2 config error,
3 budget exceeded.  All files use 1-based vertex indices.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from .config import ConfigError, ExperimentConfig, load_config
from .designs import BudgetExceededError

EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_BUDGET = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map domain errors onto the exit-code contract."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BudgetExceededError as exc:
            _fail(EXIT_BUDGET, str(exc))
        except ConfigError as exc:
            _fail(EXIT_CONFIG_ERROR, str(exc))
        except (ValueError, OSError) as exc:
            _fail(EXIT_CONFIG_ERROR, str(exc))

    wrapper.__name__ = fn.__name__
    return wrapper


@click.group()
def main() -> None:
    """Desk-scale constructions and checks for 3-query LCC lower-bound objects."""


# ---------------------------------------------------------------------------
# design
# ---------------------------------------------------------------------------


@main.group()
def design() -> None:
    """Build and verify 2-(n,4,1) designs and their dual codes."""


@design.command("build")
@click.option("--t", "t", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@_guard
def design_build(t: int, out: str) -> None:
    from .designs import build_rm_design, save_design

    lcc = build_rm_design(t)
    save_design(lcc, out)
    click.echo(f"n={lcc.n} blocks={len(lcc.design.blocks)} dim={lcc.dimension_k} -> {out}")


@design.command("verify")
@click.argument("path", type=click.Path(exists=True))
@_guard
def design_verify(path: str) -> None:
    from .designs import load_design, verify_design

    obj = load_design(path)
    d = obj.design if hasattr(obj, "design") else obj
    rep = verify_design(d)
    click.echo(
        f"pass={rep.ok} uncovered={rep.pairs_uncovered} multicovered={rep.pairs_multicovered}"
    )
    if not rep.ok:
        sys.exit(EXIT_CHECK_FAILURE)


@design.command("matchings")
@click.argument("path", type=click.Path(exists=True))
@_guard
def design_matchings(path: str) -> None:
    from .designs import derive_matchings, load_design_lcc

    lcc = load_design_lcc(path)
    m = derive_matchings(lcc)
    for u, hu in enumerate(m):
        triples = " ".join(",".join(str(v + 1) for v in t) for t in hu)
        click.echo(f"{u + 1}: {triples}")


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------


@main.group()
def chains() -> None:
    """Enumerate and probe correction chains."""


@chains.command("enumerate")
@click.option("--design", "design_path", type=click.Path(exists=True), required=True)
@click.option("--u", "u", type=int, required=True, help="head vertex (1-based)")
@click.option("--r", "r", type=int, required=True)
@click.option("--count-only", is_flag=True)
@click.option("--max-chains", type=int, default=2_000_000)
@_guard
def chains_enumerate(design_path: str, u: int, r: int, count_only: bool, max_chains: int) -> None:
    from .chains import chain_to_line, count_chains, enumerate_chains
    from .designs import derive_matchings, load_design_lcc

    lcc = load_design_lcc(design_path)
    m = derive_matchings(lcc)
    if count_only:
        stats = count_chains(m, u - 1, r)
        click.echo(
            f"count={stats.count} window=[{stats.lower_bound},{stats.upper_bound}] "
            f"ok={stats.within_bounds}"
        )
        if not stats.within_bounds:
            sys.exit(EXIT_CHECK_FAILURE)
        return
    for c in enumerate_chains(m, u - 1, r, max_chains=max_chains):
        click.echo(chain_to_line(c))


@chains.command("smoothness")
@click.option("--design", "design_path", type=click.Path(exists=True), required=True)
@click.option("--u", "u", type=int, required=True)
@click.option("--r", "r", type=int, required=True)
@click.option("--pattern", required=True, help="comma-separated vertices (1-based)")
@click.option("--side", type=click.Choice(["left", "right"]), default="right")
@click.option("--tail", type=int, default=None)
@_guard
def chains_smoothness(design_path, u, r, pattern, side, tail) -> None:
    from .chains import count_chains_with_fixed_pattern, pattern_count_bound
    from .designs import derive_matchings, load_design_lcc

    lcc = load_design_lcc(design_path)
    m = derive_matchings(lcc)
    z = [int(tok) - 1 for tok in pattern.split(",") if tok]
    cnt = count_chains_with_fixed_pattern(
        m, u - 1, r, z, side, tail=None if tail is None else tail - 1
    )
    bound = pattern_count_bound(lcc.n, r, len(z), side, tail_fixed=tail is not None or side == "left")
    click.echo(f"count={cnt} bound={float(bound):.1f} ok={cnt <= bound}")
    if cnt > bound:
        sys.exit(EXIT_CHECK_FAILURE)


# ---------------------------------------------------------------------------
# kikuchi (design-side graph)
# ---------------------------------------------------------------------------


@main.group()
def kikuchi() -> None:
    """Degree moments and matchings of the design-side graphs."""


@kikuchi.command("moments")
@click.option("--design", "design_path", type=click.Path(exists=True), required=True)
@click.option("--u", "u", type=int, default=1)
@click.option("--r", "r", type=int, required=True)
@click.option("--ell", type=int, required=True)
@click.option("--mode", type=click.Choice(["exact", "monte_carlo"]), default="exact")
@click.option("--samples", type=int, default=10_000)
@click.option("--seed", type=int, default=0)
@click.option("--csv", "csv_out", type=click.Path(), default=None)
@_guard
def kikuchi_moments(design_path, u, r, ell, mode, samples, seed, csv_out) -> None:
    from .designs import derive_matchings, load_design_lcc
    from .kikuchi_graph import MOMENTS_CSV_HEADER, KikuchiGraphParams, degree_moments

    lcc = load_design_lcc(design_path)
    params = KikuchiGraphParams(n=lcc.n, r=r, ell=ell, head=u - 1)
    rep = degree_moments(
        lcc, params, mode=mode, seed=seed, samples=samples, m=derive_matchings(lcc)
    )
    if csv_out:
        with open(csv_out, "w") as fh:
            fh.write(MOMENTS_CSV_HEADER)
            fh.write(rep.csv_row() + "\n")
    click.echo(rep.csv_row())


@kikuchi.command("match")
@click.option("--design", "design_path", type=click.Path(exists=True), required=True)
@click.option("--u", "u", type=int, default=1)
@click.option("--r", "r", type=int, required=True)
@click.option("--ell", type=int, required=True)
@click.option("--slack", type=float, default=None)
@_guard
def kikuchi_match(design_path, u, r, ell, slack) -> None:
    from .designs import derive_matchings, load_design_lcc
    from .kikuchi_graph import KikuchiGraphParams, build_graph, prune_and_match

    lcc = load_design_lcc(design_path)
    m = derive_matchings(lcc)
    params = KikuchiGraphParams(n=lcc.n, r=r, ell=ell, head=u - 1)
    g = build_graph(lcc, params, m=m)
    _, matching, stats = prune_and_match(g, slack=slack)
    click.echo(
        f"edges={stats.edges_before} retained={stats.retained_fraction:.4f} "
        f"matching={stats.matching_size} ratio={stats.matching_ratio:.4f}"
    )


# ---------------------------------------------------------------------------
# ldc2
# ---------------------------------------------------------------------------


@main.group()
def ldc2() -> None:
    """Assemble and check the induced 2-query code."""


@ldc2.command("assemble")
@click.option("--design", "design_path", type=click.Path(exists=True), required=True)
@click.option("--r", "r", type=int, required=True)
@click.option("--ell", type=int, required=True)
@click.option("--slack", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
@_guard
def ldc2_assemble(design_path, r, ell, slack, out) -> None:
    import math

    from .designs import load_design_lcc
    from .kikuchi_graph import assemble_2ldc

    lcc = load_design_lcc(design_path)
    ldc = assemble_2ldc(lcc, r=r, ell=ell, slack=slack)
    payload = {
        "k": ldc.k,
        "block_length": ldc.block_length,
        "delta_prime": str(ldc.delta_prime),
        "two_delta_k": float(2 * ldc.delta_prime * ldc.k),
        "log2_block_length": math.log2(ldc.block_length),
        "bound_holds": ldc.bound_holds,
        "decode_ok": ldc.decode_ok,
        "matching_sizes": {str(i + 1): len(v) for i, v in ldc.matchings.items()},
    }
    text = json.dumps(payload, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)
    if not (ldc.bound_holds and ldc.decode_ok):
        sys.exit(EXIT_CHECK_FAILURE)


@ldc2.command("verify")
@click.argument("path", type=click.Path(exists=True))
@_guard
def ldc2_verify(path: str) -> None:
    with open(path) as fh:
        payload = json.load(fh)
    ok = payload.get("bound_holds") and payload.get("decode_ok")
    click.echo(f"pass={bool(ok)} two_delta_k={payload.get('two_delta_k')}")
    if not ok:
        sys.exit(EXIT_CHECK_FAILURE)


# ---------------------------------------------------------------------------
# decoder
# ---------------------------------------------------------------------------


@main.group()
def decoder() -> None:
    """Compile decision-tree decoders into hypergraph collections."""


@decoder.command("compile")
@click.option("--tree", "tree_path", type=click.Path(exists=True), required=True)
@click.option("--code", "code_path", type=click.Path(exists=True), required=True)
@click.option("--delta", default=None, help='smoothness "p/q"; default: measured')
@click.option("--out", type=click.Path(), required=True)
@_guard
def decoder_compile(tree_path, code_path, delta, out) -> None:
    from .decoders import (
        code_from_json,
        compile_collection,
        decoder_from_json,
        measured_decoder_smoothness,
    )

    with open(tree_path) as fh:
        dec, n = decoder_from_json(fh.read())
    with open(code_path) as fh:
        code = code_from_json(fh.read())
    if code.n != n:
        raise ValueError(f"decoder n={n} vs code n={code.n}")
    delta_frac = Fraction(delta) if delta else measured_decoder_smoothness(dec, code)
    col = compile_collection(dec, code, delta_frac)
    with open(out, "w") as fh:
        fh.write(col.to_jsonl())
    c, pair = col.smoothness_constant(delta_frac)
    click.echo(f"n'={col.n} delta={delta_frac} c={float(c):.3f} worst={tuple(pair)} -> {out}")


# ---------------------------------------------------------------------------
# xor
# ---------------------------------------------------------------------------


@main.group()
def xor() -> None:
    """Chain XOR instances over a compiled collection."""


def _load_collection(path: str):
    from .decoders import HypergraphCollection

    with open(path) as fh:
        return HypergraphCollection.from_jsonl(fh.read())


@xor.command("build")
@click.option("--collection", "col_path", type=click.Path(exists=True), required=True)
@click.option("--k", "k", type=int, required=True, help="heads 1..k")
@click.option("--r", "r", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@_guard
def xor_build(col_path, k, r, seed, out) -> None:
    import numpy as np

    from .chain_xor import build_phi_instance, build_psi_instance

    col = _load_collection(col_path)
    heads = list(range(k))
    rng = np.random.default_rng(seed)
    b = [int(v) for v in rng.choice((1, -1), size=k)]
    chunks = []
    for t in range(1, r + 2):
        chunks.append(build_phi_instance(col, heads, b, t).to_jsonl())
    chunks.append(build_psi_instance(col, heads, b, r).to_jsonl())
    with open(out, "w") as fh:
        fh.writelines(chunks)
    click.echo(f"b={b} -> {out}")


@xor.command("eval")
@click.option("--instance", "inst_path", type=click.Path(exists=True), required=True)
@click.option("--x", "x_bits", required=True, help="+-1 assignment, e.g. '1,-1,1,...'")
@_guard
def xor_eval(inst_path, x_bits) -> None:
    x = [int(tok) for tok in x_bits.split(",")]
    total = Fraction(0)
    with open(inst_path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            sign = 1
            verts = [v - 1 for v in rec["tuple"]]
            t = len(verts) // 3
            for h in range(t):
                sign *= x[verts[1 + 3 * h]] * x[verts[2 + 3 * h]]
            if len(verts) % 3 == 1 and len(verts) > 1:
                sign *= x[verts[-1]]
            total += Fraction(rec["w"]) * sign
    click.echo(str(total))


@xor.command("partition")
@click.option("--collection", "col_path", type=click.Path(exists=True), required=True)
@click.option("--r", "r", type=int, required=True)
@click.option("--d", "d", type=int, required=True)
@click.option("--delta", required=True, help='smoothness "p/q"')
@_guard
def xor_partition(col_path, r, d, delta) -> None:
    from .chain_xor import greedy_partition, rescan_confirms_maximal

    col = _load_collection(col_path)
    part = greedy_partition(col, r=r, d=d, delta=Fraction(delta))
    for t, parts in part.levels.items():
        click.echo(
            f"level {t}: {len(parts)} parts, threshold {float(part.threshold(t)):.6g}, "
            f"residual {len(part.residual[t])}"
        )
    click.echo(f"maximal={rescan_confirms_maximal(part)} total_weight={part.total_weight()}")


@xor.command("val-brute")
@click.option("--instance", "inst_path", type=click.Path(exists=True), required=True)
@click.option("--n", "n", type=int, required=True)
@_guard
def xor_val_brute(inst_path, n) -> None:
    from .chain_xor import val_brute_polynomial

    poly: dict[int, Fraction] = {}
    with open(inst_path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            verts = [v - 1 for v in rec["tuple"]]
            mask = 0
            t = len(verts) // 3
            for h in range(t):
                mask ^= 1 << verts[1 + 3 * h]
                mask ^= 1 << verts[2 + 3 * h]
            if len(verts) % 3 == 1 and len(verts) > 1:
                mask ^= 1 << verts[-1]
            poly[mask] = poly.get(mask, Fraction(0)) + Fraction(rec["w"])
    click.echo(str(val_brute_polynomial(poly, n)))


# ---------------------------------------------------------------------------
# refute / oracle
# ---------------------------------------------------------------------------


@main.group()
def refute() -> None:
    """Spectral refutation certificates."""


@refute.command("graph-tail")
@click.option("--collection", "col_path", type=click.Path(exists=True), required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--t", "t", type=int, required=True)
@click.option("--ell", type=int, required=True)
@click.option("--trials", type=int, default=5)
@click.option("--seed", type=int, required=True)
@click.option("--gamma", type=float, default=64.0)
@_guard
def refute_graph_tail(col_path, k, t, ell, trials, seed, gamma) -> None:
    from .refute import certify_graph_tail

    col = _load_collection(col_path)
    certs = certify_graph_tail(col, list(range(k)), t=t, ell=ell, trials=trials, seed=seed, gamma=gamma)
    for cert in certs:
        click.echo(cert.to_json())
    if not all(c.sound() for c in certs):
        sys.exit(EXIT_CHECK_FAILURE)


@refute.command("hyper-tail")
@click.option("--collection", "col_path", type=click.Path(exists=True), required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--r", "r", type=int, required=True)
@click.option("--ell", type=int, required=True)
@click.option("--d", "d", type=int, required=True)
@click.option("--delta", required=True)
@click.option("--trials", type=int, default=5)
@click.option("--seed", type=int, required=True)
@click.option("--gamma", type=float, default=64.0)
@_guard
def refute_hyper_tail(col_path, k, r, ell, d, delta, trials, seed, gamma) -> None:
    from .refute import certify_hyper_tail

    col = _load_collection(col_path)
    certs = certify_hyper_tail(
        col, heads=list(range(k)), r=r, ell=ell, d=d, delta=Fraction(delta),
        trials=trials, seed=seed, gamma=gamma,
    )
    for cert in certs:
        click.echo(cert.to_json())
    if not all(c.sound() for c in certs):
        sys.exit(EXIT_CHECK_FAILURE)


@refute.command("khintchine")
@click.option("--trials", type=int, default=200)
@click.option("--seed", type=int, required=True)
@click.option("--dim", type=int, default=16)
@click.option("--count", type=int, default=8)
@_guard
def refute_khintchine(trials, seed, dim, count) -> None:
    import numpy as np

    from .refute import khintchine_check

    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(count):
        perm = rng.permutation(dim)
        p = np.zeros((dim, dim))
        p[np.arange(dim), perm] = 1.0
        mats.append(p)
    res = khintchine_check(mats, trials=trials, seed=seed)
    click.echo(json.dumps({k: v for k, v in res.items()}, sort_keys=True))
    if not res["ok"]:
        sys.exit(EXIT_CHECK_FAILURE)


@main.group()
def oracle() -> None:
    """Brute-force oracles."""


@oracle.command("val")
@click.option("--instance", "inst_path", type=click.Path(exists=True), required=True)
@click.option("--n", "n", type=int, required=True)
@click.pass_context
def oracle_val(ctx, inst_path, n) -> None:
    ctx.invoke(xor_val_brute, inst_path=inst_path, n=n)


# ---------------------------------------------------------------------------
# pipeline / report
# ---------------------------------------------------------------------------


@main.group()
def pipeline() -> None:
    """End-to-end pipelines."""


@pipeline.command("design")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--timing", is_flag=True)
@_guard
def pipeline_design_cmd(config_path, seed, out, timing) -> None:
    from .pipeline import pipeline_design

    cfg = load_config(config_path, seed=seed)
    rep = pipeline_design(cfg)
    text = rep.to_json(include_timing=timing)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)
    if not rep.ok:
        sys.exit(EXIT_CHECK_FAILURE)


@pipeline.command("nonlinear")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--decoder", "decoder_path", type=click.Path(exists=True), required=True)
@click.option("--code", "code_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--timing", is_flag=True)
@_guard
def pipeline_nonlinear_cmd(config_path, decoder_path, code_path, seed, out, timing) -> None:
    from .pipeline import pipeline_nonlinear

    cfg = load_config(config_path, seed=seed)
    rep = pipeline_nonlinear(cfg, decoder_path, code_path)
    text = rep.to_json(include_timing=timing)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    click.echo(text)
    if not rep.ok:
        sys.exit(EXIT_CHECK_FAILURE)


@main.command("report")
@click.argument("path", type=click.Path(exists=True))
@_guard
def report_cmd(path: str) -> None:
    """Summarize a run report JSON."""
    with open(path) as fh:
        payload = json.load(fh)
    click.echo(f"pipeline: {payload['pipeline']}  ok: {payload['ok']}")
    for stage in payload["stages"]:
        click.echo(f"  [{'PASS' if stage['ok'] else 'FAIL'}] {stage['name']}")
    if not payload["ok"]:
        sys.exit(EXIT_CHECK_FAILURE)


if __name__ == "__main__":
    main()
