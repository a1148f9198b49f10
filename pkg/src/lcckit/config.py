"""Experiment configuration: parse-time validation, budgets, overrides.

Configs load from JSON or TOML and validate every constraint before any
stage runs: seeds are mandatory (all stochastic stages derive from the one
seed), l >= r always, d^(r+1) >= n whenever the hypergraph-tail refutation
is enabled, and the asymptotic-regime inequalities l >= 6 d (r+1) / delta
and l r <= n/10 only under ``strict_asymptotic`` (desk-scale parameters
deliberately violate them).  Budgets can be overridden by the environment
variables LCCKIT_MAX_CHAINS, LCCKIT_MAX_ENTRIES and LCCKIT_MAX_SUBSETS.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any


class ConfigError(ValueError):
    """Invalid configuration, reported at parse time."""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"environment override {name}={raw!r} is not an integer") from exc


@dataclass
class ExperimentConfig:
    seed: int
    t: int | None = None  # design pipeline: blocklength 4^t
    r: int = 1
    ell: int = 1
    d: int | None = None  # hypergraph-tail partition parameter
    delta: str | None = None  # claimed smoothness "p/q"; None = measured
    eps: str = "0"  # completeness deficit "p/q"
    gamma: float = 64.0
    eta: float = 0.25  # Theorem-2 style clamp parameter
    slack: float | None = None  # degree-window slack; None = 3(l^2/n + n/C(l,r))
    mode: str = "exact"  # "exact" | "monte_carlo"
    samples: int = 10_000
    trials: int = 10
    workers: int = 1
    strict_asymptotic: bool = False
    hyper_tail: bool = False
    max_chains: int = field(default_factory=lambda: _env_int("LCCKIT_MAX_CHAINS", 2_000_000))
    max_entries: int = field(default_factory=lambda: _env_int("LCCKIT_MAX_ENTRIES", 2_000_000))
    max_subsets: int = field(default_factory=lambda: _env_int("LCCKIT_MAX_SUBSETS", 2_000_000))

    def delta_fraction(self) -> Fraction | None:
        return Fraction(self.delta) if self.delta is not None else None

    def eps_fraction(self) -> Fraction:
        return Fraction(self.eps)

    def validate(self, n: int | None = None) -> None:
        if self.seed is None:
            raise ConfigError("seed is mandatory")
        if self.r < 0:
            raise ConfigError("r must be >= 0")
        if self.ell < max(1, self.r):
            raise ConfigError(f"need ell >= r >= 1, got ell={self.ell}, r={self.r}")
        if self.mode not in ("exact", "monte_carlo"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "monte_carlo" and self.samples < 1:
            raise ConfigError("monte_carlo mode needs samples >= 1")
        if self.eps_fraction() < 0 or self.eps_fraction() >= Fraction(1, 2):
            raise ConfigError("eps must lie in [0, 1/2)")
        if self.hyper_tail:
            if self.d is None:
                raise ConfigError("hyper-tail refutation needs d")
            if n is not None and self.d ** (self.r + 1) < n:
                raise ConfigError(
                    f"hyper-tail refutation needs d^(r+1) >= n: {self.d}^{self.r + 1} < {n}"
                )
        if self.strict_asymptotic:
            if self.d is None or self.delta is None:
                raise ConfigError("strict_asymptotic needs d and delta")
            delta = float(Fraction(self.delta))
            if self.ell < 6 * self.d * (self.r + 1) / delta:
                raise ConfigError(
                    f"strict regime needs ell >= 6 d (r+1)/delta = "
                    f"{6 * self.d * (self.r + 1) / delta:.1f}"
                )
            if n is not None and self.ell * self.r > n / 10:
                raise ConfigError("strict regime needs ell * r <= n / 10")

    def clamp_r(self, n: int) -> tuple[int, str | None]:
        """The chain length actually used: min(r, floor((1-eta)/2eps), log2 n)."""
        eps = self.eps_fraction()
        bounds = [self.r, int(math.log2(n)) if n > 1 else self.r]
        note = None
        if eps > 0:
            bounds.append(math.floor((1 - self.eta) / float(2 * eps)))
        r_eff = max(0, min(bounds))
        if r_eff != self.r:
            note = f"r clamped from {self.r} to {r_eff}"
        return r_eff, note

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_config(path: str, **overrides: Any) -> ExperimentConfig:
    """Load JSON or TOML (by extension) and apply keyword overrides."""
    if path.endswith(".toml"):
        try:
            import tomllib  # Python 3.11+
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            payload = tomllib.load(fh)
    else:
        with open(path) as fh:
            payload = json.load(fh)
    payload.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(payload) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "seed" not in payload:
        raise ConfigError("seed is mandatory")
    try:
        cfg = ExperimentConfig(**payload)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg
