"""End-to-end pipelines and deterministic run reports.

The design pipeline runs build -> verify -> chains -> moments ->
prune/match -> 2-LDC assembly and records the numeric evaluation of
2 delta' k <= log2(block length) with measured quantities.  The nonlinear
pipeline compiles a decoder into a hypergraph collection, checks the
weight/completeness invariants, partitions the chains, and emits refutation
certificates for the graph- and hypergraph-tailed instances together with
the Khintchine ratio.

Reports contain no timestamps unless timing is explicitly requested;
re-running a pipeline with the same seed and config yields byte-identical
JSON.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .chains import count_chains, enumerate_chains, verify_chain_completeness
from .chain_xor import (
    completeness_sum,
    greedy_partition,
    induce_partition,
    rescan_confirms_maximal,
    verify_weight_conservation,
)
from .config import ConfigError, ExperimentConfig
from .decoders import (
    code_from_json,
    compile_collection,
    decoder_from_json,
    measured_decoder_smoothness,
)
from .designs import (
    BudgetExceededError,
    build_rm_design,
    claimed_dimension,
    code_dimension_report,
    derive_matchings,
    verify_design,
)
from .kikuchi_graph import (
    KikuchiGraphParams,
    assemble_2ldc,
    build_graph,
    degree_moments,
    first_moment_window,
    moment_window,
    prune_and_match,
)
from .refute import certify_graph_tail, certify_hyper_tail, khintchine_check


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r}: {message}")
        self.stage = stage


@dataclass
class RunReport:
    pipeline: str
    config: dict[str, Any]
    stages: list[dict[str, Any]] = field(default_factory=list)
    ok: bool = True
    timing: dict[str, float] | None = None

    def add(self, name: str, ok: bool, **details: Any) -> None:
        self.stages.append({"name": name, "ok": ok, "details": details})
        self.ok = self.ok and ok

    def to_json(self, include_timing: bool = False) -> str:
        payload = {
            "pipeline": self.pipeline,
            "config": self.config,
            "ok": self.ok,
            "stages": self.stages,
        }
        if include_timing and self.timing is not None:
            payload["timing"] = self.timing
        return json.dumps(payload, sort_keys=True, default=str)


def _run_stage(report: RunReport, timing: dict, name: str, fn: Callable[[], dict]) -> dict:
    start = time.perf_counter()
    try:
        details = fn()
    except BudgetExceededError as exc:
        report.add(name, False, error=f"budget: {exc}")
        raise StageError(name, str(exc)) from exc
    except Exception as exc:
        report.add(name, False, error=str(exc))
        raise StageError(name, str(exc)) from exc
    finally:
        timing[name] = time.perf_counter() - start
    ok = bool(details.pop("_ok", True))
    report.add(name, ok, **details)
    return details


# ---------------------------------------------------------------------------
# design pipeline
# ---------------------------------------------------------------------------


def pipeline_design(cfg: ExperimentConfig) -> RunReport:
    if cfg.t is None:
        raise ConfigError("design pipeline needs t")
    cfg.validate(n=4**cfg.t)
    report = RunReport(pipeline="design", config=cfg.to_dict())
    timing: dict[str, float] = {}
    state: dict[str, Any] = {}

    def build() -> dict:
        lcc = build_rm_design(cfg.t, max_points=cfg.max_subsets)
        state["lcc"] = lcc
        return {
            "n": lcc.n,
            "blocks": len(lcc.design.blocks),
            "dim_dual": lcc.dimension_k,
            "claimed_k": claimed_dimension(cfg.t),
        }

    def verify() -> dict:
        rep = verify_design(state["lcc"].design)
        state["matchings"] = derive_matchings(state["lcc"])
        dim = code_dimension_report(cfg.t, max_points=cfg.max_subsets)
        return {
            "_ok": rep.ok and dim.any_match(),
            "pairs_uncovered": rep.pairs_uncovered,
            "pairs_multicovered": rep.pairs_multicovered,
            "dimension_match": dim.any_match(),
        }

    def chains() -> dict:
        lcc = state["lcc"]
        r_eff = 1 if cfg.t == 1 and cfg.r > 1 else cfg.r
        state["r_eff"] = r_eff
        stats = count_chains(state["matchings"], 0, r_eff)
        rng = np.random.default_rng(cfg.seed)
        checked = 0
        for c in enumerate_chains(state["matchings"], 0, r_eff, max_chains=cfg.max_chains):
            if checked >= 50:
                break
            if not verify_chain_completeness(lcc, c):
                return {"_ok": False, "violating_chain": c.to_tuple()}
            checked += 1
        return {
            "_ok": stats.within_bounds,
            "r_used": r_eff,
            "count": stats.count,
            "lower": stats.lower_bound,
            "upper": stats.upper_bound,
            "clamped": r_eff != cfg.r,
        }

    def moments() -> dict:
        lcc = state["lcc"]
        r_eff = state["r_eff"]
        ell = max(cfg.ell, r_eff)
        params = KikuchiGraphParams(n=lcc.n, r=r_eff, ell=ell, head=0)
        rep = degree_moments(
            lcc,
            params,
            mode=cfg.mode,
            seed=cfg.seed,
            samples=cfg.samples,
            m=state["matchings"],
        )
        win_r = moment_window(
            rep.d_right_sq, rep.formula_right, lcc.n, r_eff, ell, rep.d_right, se=rep.se_right
        )
        win_l = moment_window(
            rep.d_left_sq, rep.formula_left, lcc.n, r_eff, ell, rep.d_left, se=rep.se_left
        )
        first = first_moment_window(lcc.n, r_eff, ell, rep.chain_count)
        state["params"] = params
        return {
            "_ok": win_r["ok"] and win_l["ok"] and first["upper_holds"],
            "mode": rep.mode,
            "d_right": float(rep.d_right),
            "d_right_sq": rep.d_right_sq,
            "formula_right": float(rep.formula_right),
            "ratio_right": rep.ratio_right,
            "ratio_left": rep.ratio_left,
            "c_needed_right": win_r["c_needed"],
            "c_needed_left": win_l["c_needed"],
            "stderr": max(rep.se_left, rep.se_right),
            "csv_row": rep.csv_row(),
        }

    def prune_match() -> dict:
        lcc = state["lcc"]
        g = build_graph(lcc, state["params"], m=state["matchings"], max_left_vertices=cfg.max_subsets)
        _, matching, stats = prune_and_match(g, slack=cfg.slack)
        return {
            "edges": stats.edges_before,
            "retained": stats.retained_fraction,
            "matching_size": stats.matching_size,
            "matching_ratio": stats.matching_ratio,
        }

    def ldc2() -> dict:
        lcc = state["lcc"]
        r_eff = state["r_eff"]
        ell = max(cfg.ell, r_eff)
        ldc = assemble_2ldc(lcc, r=r_eff, ell=ell, slack=cfg.slack, m=state["matchings"])
        log2_block = math.log2(ldc.block_length)
        return {
            "_ok": ldc.decode_ok and ldc.bound_holds,
            "k": ldc.k,
            "block_length": ldc.block_length,
            "delta_prime": float(ldc.delta_prime),
            "two_delta_k": float(2 * ldc.delta_prime * ldc.k),
            "log2_block_length": log2_block,
            "decode_ok": ldc.decode_ok,
        }

    try:
        _run_stage(report, timing, "build", build)
        _run_stage(report, timing, "verify", verify)
        _run_stage(report, timing, "chains", chains)
        _run_stage(report, timing, "moments", moments)
        _run_stage(report, timing, "prune_match", prune_match)
        _run_stage(report, timing, "ldc2", ldc2)
    except StageError:
        pass
    report.timing = timing
    return report


# ---------------------------------------------------------------------------
# nonlinear pipeline
# ---------------------------------------------------------------------------


def pipeline_nonlinear(cfg: ExperimentConfig, decoder_path: str, code_path: str) -> RunReport:
    report = RunReport(pipeline="nonlinear", config=cfg.to_dict())
    timing: dict[str, float] = {}
    state: dict[str, Any] = {}

    def load() -> dict:
        with open(decoder_path) as fh:
            decoder, n = decoder_from_json(fh.read())
        with open(code_path) as fh:
            code = code_from_json(fh.read())
        if code.n != n:
            raise ValueError(f"decoder is for n={n}, code has n={code.n}")
        state["decoder"] = decoder
        state["code"] = code
        return {"n": code.n, "k": code.k, "n_padded": code.n_padded}

    def compile_stage() -> dict:
        import dataclasses

        code = state["code"]
        delta = cfg.delta_fraction() or measured_decoder_smoothness(state["decoder"], code)
        col = compile_collection(state["decoder"], code, delta)
        c_meas, worst = col.smoothness_constant(delta)
        from .toys import collection_delta

        state["col"] = col
        state["delta"] = delta
        state["delta_col"] = collection_delta(col)
        state["heads"] = code.systematic
        r_eff, clamp_note = cfg.clamp_r(col.n)
        state["r_eff"] = r_eff
        state["clamp_note"] = clamp_note
        dataclasses.replace(cfg, r=r_eff, ell=max(cfg.ell, max(1, r_eff))).validate(n=col.n)
        return {
            "delta": str(delta),
            "delta_collection": str(state["delta_col"]),
            "smoothness_c": float(c_meas),
            "worst_pair": list(worst),
            "r_used": r_eff,
            "clamp_note": clamp_note,
            "_ok": c_meas <= 16,
        }

    def conservation() -> dict:
        col = state["col"]
        worst_h = Fraction(0)
        worst_g = Fraction(0)
        ok = True
        for t in range(1, 5):
            for u in range(0, col.n, max(1, col.n // 8)):
                rep = verify_weight_conservation(col, u, t)
                ok = ok and rep["ok"]
                worst_h = max(worst_h, rep["hyper_total"])
                worst_g = max(worst_g, rep["graph_total"])
        return {"_ok": ok, "max_hyper_total": str(worst_h), "max_graph_total": str(worst_g)}

    def completeness() -> dict:
        code = state["code"]
        col = state["col"]
        heads = state["heads"]
        k = len(heads)
        r_eff, note = state["r_eff"], state["clamp_note"]
        eps = cfg.eps_fraction()
        bound = k * (1 - 2 * (r_eff + 1) * eps)
        rng = np.random.default_rng(cfg.seed)
        worst = None
        for _ in range(min(cfg.trials, 20)):
            b = [int(v) for v in rng.choice((1, -1), size=k)]
            x = code.pad(code.codeword_for_message(tuple(b)))
            total = completeness_sum(col, heads, b, r_eff, x)
            worst = total if worst is None else min(worst, total)
        return {
            "_ok": worst is not None and worst >= bound,
            "r_used": r_eff,
            "clamp_note": note,
            "lower_bound": str(bound),
            "worst_planted_value": str(worst),
        }

    def partition_stage() -> dict:
        col = state["col"]
        d = cfg.d if cfg.d is not None else max(2, math.ceil(col.n ** (1 / (state["r_eff"] + 1))))
        state["d"] = d
        part = greedy_partition(col, r=state["r_eff"], d=d, delta=state["delta_col"])
        state["partition"] = part
        return {
            "_ok": rescan_confirms_maximal(part),
            "d": d,
            "parts": {t: len(ps) for t, ps in part.levels.items()},
            "total_weight": str(part.total_weight()),
            "mass_bound_ok": part.total_weight() <= (state["r_eff"] + 1) * col.n,
        }

    def refute_graph() -> dict:
        col = state["col"]
        heads = state["heads"]
        certs = []
        for t in range(1, state["r_eff"] + 2):
            certs.extend(
                certify_graph_tail(
                    col, heads, t=t, ell=cfg.ell, trials=cfg.trials, seed=cfg.seed,
                    gamma=cfg.gamma, max_entries=cfg.max_entries,
                )
            )
        state["graph_certs"] = certs
        return {
            "_ok": all(c.sound() for c in certs),
            "certificates": len(certs),
            "max_val_bound": max(c.val_bound for c in certs),
            "max_brute": max(c.val_brute for c in certs if c.val_brute is not None),
        }

    def refute_hyper() -> dict:
        col = state["col"]
        certs = certify_hyper_tail(
            col,
            heads=state["heads"],
            r=state["r_eff"],
            ell=cfg.ell,
            d=state["d"],
            delta=state["delta_col"],
            trials=cfg.trials,
            seed=cfg.seed,
            gamma=cfg.gamma,
            max_entries=cfg.max_entries,
        )
        state["hyper_certs"] = certs
        return {
            "_ok": all(c.sound() for c in certs),
            "certificates": len(certs),
            "max_val_bound": max(c.val_bound for c in certs),
        }

    def summary() -> dict:
        heads = state["heads"]
        k = len(heads)
        eps = cfg.eps_fraction()
        r_eff = state["r_eff"]
        planted = float(k * (1 - 2 * (r_eff + 1) * eps))
        total_bound = sum(c.val_bound for c in state["graph_certs"]) / max(
            1, cfg.trials
        ) + sum(c.val_bound for c in state["hyper_certs"]) / max(1, cfg.trials)
        mats = []
        rng = np.random.default_rng(cfg.seed + 1)
        dim = min(16, state["col"].n)
        for _ in range(6):
            perm = rng.permutation(dim)
            p = np.zeros((dim, dim))
            p[np.arange(dim), perm] = 1.0
            mats.append(p)
        kh = khintchine_check(mats, trials=max(cfg.trials, 50), seed=cfg.seed)
        return {
            "_ok": kh["ok"],
            "planted_value": planted,
            "mean_certified_bound_total": total_bound,
            "khintchine_ratio": kh["ratio"],
        }

    try:
        _run_stage(report, timing, "load", load)
        _run_stage(report, timing, "compile", compile_stage)
        _run_stage(report, timing, "conservation", conservation)
        _run_stage(report, timing, "completeness", completeness)
        _run_stage(report, timing, "partition", partition_stage)
        _run_stage(report, timing, "refute_graph", refute_graph)
        _run_stage(report, timing, "refute_hyper", refute_hyper)
        _run_stage(report, timing, "summary", summary)
    except StageError:
        pass
    report.timing = timing
    return report
