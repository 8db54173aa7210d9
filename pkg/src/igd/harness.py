"""Benchmark matrix: derivative-free methods on the seeded problem families.

The method grid crosses three momentum variants with the two differencing
rules:

    DF   no momentum            fordif   forward differences
    DFn  beta = gamma = k/(k+3) cendif   central differences
    DFp  beta = k/(k+3), gamma = 0

Every run is budgeted in value evaluations (``budget_multiplier * n``) and
otherwise left to run; the per-iteration records land in one CSV per
(problem, n, noise, method, seed) with the fixed header

    k,value_evals,f_val,g_norm,step_norm,lyapunov_H,descent_ok

where floats are shortest round-trip decimals, missing certificate values
are empty strings, and ``descent_ok`` is ``true``/``false``/empty.  A
``summary.json`` next to the CSVs aggregates per-run outcomes and medians,
which is all downstream tooling (the figure renderer, the ``check`` and
``rates`` subcommands) consumes.
"""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .core import RunTrace
from .momentum import MomentumSchedule
from .oracles import AdaptiveDeltaPolicy, NoiseModel, noisy_wrap
from .problems import gen_image_restoration, gen_least_squares
from .solvers import SolverParams, run
from .diagnostics import descent_flags

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "METHODS",
    "parse_problem_token",
    "config_from_dict",
    "run_matrix",
    "emit_csv",
    "read_trace_csv",
    "evals_to_target",
]

METHODS = (
    "DF-fordif", "DF-cendif",
    "DFn-fordif", "DFn-cendif",
    "DFp-fordif", "DFp-cendif",
)

_GENERATORS = {"L": gen_least_squares, "N": gen_image_restoration}

# Offset so the evaluation-noise stream never replays the instance stream.
_NOISE_SEED_OFFSET = 1_000_003


class ConfigError(ValueError):
    """A benchmark configuration that cannot be run."""


@dataclass
class ExperimentConfig:
    """Everything one matrix invocation depends on.

    ``tau=None`` resolves per problem to ``0.9 * (1 - nu) / L``.  The
    evaluation-noise stream of a run is seeded with ``seed + 1_000_003`` so
    it never replays the instance stream.
    """

    problems: list[tuple[str, int]] = field(
        default_factory=lambda: [("L", 50), ("L", 100), ("N", 50), ("N", 100)])
    noise: bool = False
    noise_amplitude: float = 1e-4
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    seeds: list[int] = field(default_factory=lambda: [1])
    budget_multiplier: int = 200
    nu: float = 0.5
    theta: float = 0.5
    epsilon0: float = 0.1
    max_backtracks: int = 60
    tau: float | None = None
    target_rel: float = 1e-6
    out_dir: str = "results"
    workers: int = 1

    def validate(self) -> None:
        for kind, n in self.problems:
            if kind not in _GENERATORS:
                raise ConfigError(f"unknown problem kind {kind!r}")
            if n < 1:
                raise ConfigError(f"problem size must be positive, got {n}")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if self.budget_multiplier < 1:
            raise ConfigError("budget_multiplier must be positive")
        if not 0 < self.nu < 1:
            raise ConfigError("nu must lie in (0, 1)")
        if not 0 < self.theta < 1:
            raise ConfigError("theta must lie in (0, 1)")
        if self.epsilon0 <= 0:
            raise ConfigError("epsilon0 must be positive")
        if self.noise_amplitude <= 0:
            raise ConfigError("noise_amplitude must be positive")
        if self.tau is not None and self.tau <= 0:
            raise ConfigError("tau must be positive when given")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")


def parse_problem_token(token: str) -> tuple[str, int]:
    """Parse ``"L50"`` style problem names."""
    kind = token[:1]
    if kind not in _GENERATORS or not token[1:].isdigit():
        raise ConfigError(f"cannot parse problem token {token!r}; expected e.g. L50")
    return kind, int(token[1:])


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a validated config from parsed JSON."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    kwargs: dict = {}
    known = set(ExperimentConfig.__dataclass_fields__)
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[key] = value
    if "problems" in kwargs:
        kwargs["problems"] = [
            parse_problem_token(p) if isinstance(p, str) else (str(p[0]), int(p[1]))
            for p in kwargs["problems"]
        ]
    if "noise" in kwargs and isinstance(kwargs["noise"], str):
        if kwargs["noise"] not in ("on", "off"):
            raise ConfigError("noise must be 'on' or 'off'")
        kwargs["noise"] = kwargs["noise"] == "on"
    try:
        cfg = ExperimentConfig(**kwargs)
    except TypeError as err:
        raise ConfigError(str(err)) from None
    cfg.validate()
    return cfg


def _method_parts(method: str) -> tuple[str, str]:
    momentum, diff = method.split("-", 1)
    kind = {"fordif": "forward", "cendif": "central"}[diff]
    return momentum, kind


def _method_schedule(momentum: str) -> MomentumSchedule:
    if momentum == "DF":
        return MomentumSchedule.none()
    if momentum == "DFn":
        return MomentumSchedule.nesterov_convex()
    if momentum == "DFp":
        return MomentumSchedule.polyak()
    raise ConfigError(f"unknown momentum tag {momentum!r}")


def _float_cell(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def emit_csv(trace: RunTrace, path) -> None:
    """Write one run's records in the fixed benchmark schema."""
    flags = descent_flags(trace)
    lines = ["k,value_evals,f_val,g_norm,step_norm,lyapunov_H,descent_ok"]
    for rec, flag in zip(trace.records, flags):
        ok = "" if flag is None else ("true" if flag else "false")
        lines.append(",".join([
            str(rec.k),
            str(rec.value_evals),
            _float_cell(rec.f_val),
            _float_cell(rec.g_norm),
            _float_cell(rec.step_norm),
            _float_cell(rec.lyapunov_H),
            ok,
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path) -> list[dict]:
    """Parse a benchmark CSV back into per-row dicts (None for empty cells)."""
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0] != "k,value_evals,f_val,g_norm,step_norm,lyapunov_H,descent_ok":
        raise ValueError(f"{path}: not a benchmark trace CSV")
    rows = []
    for line in text[1:]:
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}: malformed row {line!r}")
        rows.append({
            "k": int(parts[0]),
            "value_evals": int(parts[1]),
            "f_val": float(parts[2]),
            "g_norm": float(parts[3]),
            "step_norm": float(parts[4]),
            "lyapunov_H": float(parts[5]) if parts[5] else None,
            "descent_ok": None if parts[6] == "" else parts[6] == "true",
        })
    return rows


def evals_to_target(f_vals, value_evals, fstar: float, rel: float = 1e-6) -> int | None:
    """Value evaluations spent when ``f - fstar`` first reached ``rel`` of its start."""
    if len(f_vals) == 0:
        return None
    target = fstar + rel * (f_vals[0] - fstar)
    for f, ve in zip(f_vals, value_evals):
        if f <= target:
            return int(ve)
    return None


def _run_unit(unit: dict) -> dict:
    """Execute one (problem, n, noise, method, seed) run and write its CSV.

    Module-level and dict-driven so process pools can ship it around.
    """
    kind, n, seed = unit["kind"], unit["n"], unit["seed"]
    method = unit["method"]
    momentum, diff_kind = _method_parts(method)
    instance = _GENERATORS[kind](n, seed)
    objective = instance.objective
    L = objective.lipschitz_L
    if unit["noise"]:
        objective = noisy_wrap(objective, NoiseModel(
            amplitude=unit["noise_amplitude"], rng_seed=seed + _NOISE_SEED_OFFSET))
    tau = unit["tau"] if unit["tau"] is not None else 0.9 * (1.0 - unit["nu"]) / L
    budget = unit["budget_multiplier"] * n
    params = SolverParams(
        tau=tau, nu=unit["nu"], budget_evals=budget, grad_tol=0.0,
        max_iters=budget, store_iterates=False)
    policy = AdaptiveDeltaPolicy(theta=unit["theta"], epsilon0=unit["epsilon0"],
                                 max_backtracks=unit["max_backtracks"])
    trace = run(
        objective, [0.0] * n, params,
        scheme="igdm", schedule=_method_schedule(momentum),
        gradient=diff_kind, checker="bound", policy=policy)

    csv_name = unit["csv_name"]
    emit_csv(trace, Path(unit["out_dir"]) / csv_name)

    f_vals = [rec.f_val for rec in trace.records]
    evals = [rec.value_evals for rec in trace.records]
    fstar = instance.known_fstar
    ett = None
    if fstar is not None and f_vals:
        ett = evals_to_target(f_vals, evals, fstar, rel=unit["target_rel"])
    return {
        "seed": seed,
        "csv": csv_name,
        "reason": trace.reason,
        "iterations": len(trace.records),
        "value_evals": trace.meta["value_evals_total"],
        "f0": f_vals[0] if f_vals else None,
        "final_f": f_vals[-1] if f_vals else None,
        "final_best": min(f_vals) if f_vals else None,
        "fstar": fstar,
        "evals_to_target": ett,
        "L": L,
        "tau": tau,
        "nu": unit["nu"],
        "lyapunov": trace.meta.get("lyapunov"),
        "noise_limited_rounds": trace.meta["noise_limited_rounds"],
    }


def _median_or_none(values: list) -> float | None:
    # None marks an unreached target; treat it as infinite so the median is
    # None exactly when half or more of the runs never got there.
    vals = [math.inf if v is None else float(v) for v in values]
    if not vals:
        return None
    mid = float(statistics.median(vals))
    return None if math.isinf(mid) else mid


def run_matrix(config: ExperimentConfig) -> dict:
    """Run the whole grid, write CSVs plus ``summary.json``, return the summary."""
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    units = []
    for kind, n in config.problems:
        for method in config.methods:
            for seed in config.seeds:
                noise_tag = "noise" if config.noise else "clean"
                units.append({
                    "kind": kind, "n": n, "seed": seed, "method": method,
                    "noise": config.noise, "noise_amplitude": config.noise_amplitude,
                    "nu": config.nu, "theta": config.theta,
                    "epsilon0": config.epsilon0, "max_backtracks": config.max_backtracks,
                    "tau": config.tau, "budget_multiplier": config.budget_multiplier,
                    "target_rel": config.target_rel, "out_dir": str(out),
                    "csv_name": f"{kind}{n}_{noise_tag}_{method}_s{seed}.csv",
                })

    failures = []
    results: dict[tuple, dict] = {}
    if config.workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(_run_unit, u): u for u in units}
            for fut, u in futures.items():
                key = (u["kind"], u["n"], u["method"], u["seed"])
                try:
                    results[key] = fut.result()
                except Exception as err:  # cell failures must not kill the matrix
                    failures.append({"unit": u["csv_name"], "error": f"{type(err).__name__}: {err}"})
    else:
        for u in units:
            key = (u["kind"], u["n"], u["method"], u["seed"])
            try:
                results[key] = _run_unit(u)
            except Exception as err:
                failures.append({"unit": u["csv_name"], "error": f"{type(err).__name__}: {err}"})

    cells = []
    for kind, n in config.problems:
        for method in config.methods:
            runs = [results[(kind, n, method, s)]
                    for s in config.seeds if (kind, n, method, s) in results]
            if not runs:
                continue
            cells.append({
                "problem": kind,
                "n": n,
                "noise": config.noise,
                "method": method,
                "budget": config.budget_multiplier * n,
                "runs": runs,
                "median_final_best": _median_or_none([r["final_best"] for r in runs]),
                "median_evals_to_target": _median_or_none([r["evals_to_target"] for r in runs]),
                "target_reached": sum(1 for r in runs if r["evals_to_target"] is not None),
            })

    leaders = {}
    for kind, n in config.problems:
        group = [c for c in cells if c["problem"] == kind and c["n"] == n
                 and c["median_final_best"] is not None]
        if group:
            best = min(group, key=lambda c: c["median_final_best"])
            leaders[f"{kind}{n}"] = best["method"]

    summary = {
        "config": {
            **asdict(config),
            "problems": [f"{k}{n}" for k, n in config.problems],
        },
        "cells": cells,
        "leaders": leaders,
        "failures": failures,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
