"""Command line front end.

Three subcommands:

``igd run``
    Execute a benchmark matrix (optionally described by a JSON config,
    with flags overriding individual keys) and write CSV traces plus
    ``summary.json``.

``igd check``
    Re-verify the descent certificate of a recorded trace from its CSV,
    taking the constants either from a ``summary.json`` or from explicit
    ``--L/--tau/--nu/--beta-bar/--delta-bar`` flags.

``igd rates``
    Fit a geometric or power-law tail to a recorded error sequence.

Exit codes: 0 success, 1 benchmark/certificate failure, 2 unusable
configuration or input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import InfeasibleParametersError
from .diagnostics import fit_rate, lyapunov_constants
from .harness import ConfigError, METHODS, config_from_dict, read_trace_csv, run_matrix

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igd",
        description="Inexact gradient descent with momentum: benchmarks and audits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark matrix")
    p_run.add_argument("--config", type=Path, help="JSON config file")
    p_run.add_argument("--problems", help="comma list, e.g. L50,N100")
    p_run.add_argument("--noise", choices=["on", "off"])
    p_run.add_argument("--methods", help=f"comma list from {','.join(METHODS)}")
    p_run.add_argument("--seeds", help="comma list of integer seeds")
    p_run.add_argument("--budget-multiplier", type=int)
    p_run.add_argument("--nu", type=float)
    p_run.add_argument("--theta", type=float)
    p_run.add_argument("--epsilon0", type=float)
    p_run.add_argument("--tau", type=float)
    p_run.add_argument("--noise-amplitude", type=float)
    p_run.add_argument("--workers", type=int)
    p_run.add_argument("--out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="re-verify a trace's descent certificate")
    p_check.add_argument("--trace", type=Path, required=True, help="benchmark CSV")
    p_check.add_argument("--summary", type=Path,
                         help="summary.json holding this run's constants")
    p_check.add_argument("--L", type=float, help="gradient Lipschitz constant")
    p_check.add_argument("--tau", type=float, help="step size")
    p_check.add_argument("--nu", type=float, help="relative gradient error bound")
    p_check.add_argument("--beta-bar", type=float, help="momentum coefficient bound")
    p_check.add_argument("--delta-bar", type=float,
                         help="bound on the inner/extrapolation coefficient gap")
    p_check.set_defaults(func=_cmd_check)

    p_rates = sub.add_parser("rates", help="fit a convergence rate to a trace")
    p_rates.add_argument("--trace", type=Path, required=True, help="benchmark CSV")
    p_rates.add_argument("--y", choices=["gnorm", "gap"], default="gnorm",
                         help="error sequence: gradient norms or value gap")
    p_rates.add_argument("--fstar", type=float,
                         help="optimal value, required for --y gap")
    p_rates.set_defaults(func=_cmd_rates)
    return parser


def _apply_overrides(raw: dict, args: argparse.Namespace) -> dict:
    if args.problems is not None:
        raw["problems"] = [t for t in args.problems.split(",") if t]
    if args.noise is not None:
        raw["noise"] = args.noise
    if args.methods is not None:
        raw["methods"] = [t for t in args.methods.split(",") if t]
    if args.seeds is not None:
        try:
            raw["seeds"] = [int(t) for t in args.seeds.split(",") if t]
        except ValueError:
            raise ConfigError(f"--seeds must be integers, got {args.seeds!r}")
    for key, value in [
        ("budget_multiplier", args.budget_multiplier),
        ("nu", args.nu), ("theta", args.theta), ("epsilon0", args.epsilon0),
        ("tau", args.tau), ("noise_amplitude", args.noise_amplitude),
        ("workers", args.workers), ("out_dir", args.out),
    ]:
        if value is not None:
            raw[key] = value
    return raw


def _cmd_run(args: argparse.Namespace) -> int:
    raw: dict = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as err:
            print(f"igd run: cannot read config: {err}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        cfg = config_from_dict(_apply_overrides(raw, args))
    except ConfigError as err:
        print(f"igd run: {err}", file=sys.stderr)
        return EXIT_CONFIG

    summary = run_matrix(cfg)
    noise_tag = "noise" if cfg.noise else "clean"
    for cell in summary["cells"]:
        best = cell["median_final_best"]
        ett = cell["median_evals_to_target"]
        best_text = "n/a" if best is None else f"{best:.6e}"
        print(f"{cell['problem']}{cell['n']} {noise_tag} {cell['method']}: "
              f"median final best {best_text}, "
              + (f"median evals to target {ett:.0f}" if ett is not None
                 else f"target reached in {cell['target_reached']}/{len(cell['runs'])} runs"))
    for failure in summary["failures"]:
        print(f"FAILED {failure['unit']}: {failure['error']}", file=sys.stderr)
    print(f"wrote {Path(cfg.out_dir) / 'summary.json'}")
    return EXIT_FAIL if summary["failures"] else EXIT_OK


def _constants_from_summary(summary_path: Path, trace_path: Path) -> dict | None:
    data = json.loads(summary_path.read_text())
    name = trace_path.name
    for cell in data.get("cells", []):
        for run in cell.get("runs", []):
            if run.get("csv") == name:
                return run.get("lyapunov")
    raise ConfigError(f"{name} not found in {summary_path}")


def _cmd_check(args: argparse.Namespace) -> int:
    try:
        rows = read_trace_csv(args.trace)
    except (OSError, ValueError) as err:
        print(f"igd check: {err}", file=sys.stderr)
        return EXIT_CONFIG

    explicit = [args.L, args.tau, args.nu, args.beta_bar, args.delta_bar]
    if all(v is not None for v in explicit):
        try:
            consts = lyapunov_constants(args.L, args.tau, args.nu,
                                        args.beta_bar, args.delta_bar)
        except (ValueError, InfeasibleParametersError) as err:
            print(f"igd check: {err}", file=sys.stderr)
            return EXIT_CONFIG
        alpha, c1 = consts.alpha, consts.c1
    elif args.summary is not None:
        try:
            constants = _constants_from_summary(args.summary, args.trace)
        except (OSError, json.JSONDecodeError, ConfigError) as err:
            print(f"igd check: {err}", file=sys.stderr)
            return EXIT_CONFIG
        if constants is None:
            print("igd check: run carries no certificate "
                  "(parameters were outside the guaranteed region)", file=sys.stderr)
            return EXIT_CONFIG
        alpha, c1 = constants["alpha"], constants["c1"]
    else:
        print("igd check: need either --summary or all of "
              "--L --tau --nu --beta-bar --delta-bar", file=sys.stderr)
        return EXIT_CONFIG

    if len(rows) < 2:
        print("igd check: trace has fewer than two records, nothing to verify")
        return EXIT_OK

    # H_k = f(x_k) + alpha * ||x_k - x_{k-1}||^2, rebuilt from the recorded
    # step norms; the step stored on row i was taken from x_i to x_{i+1}.
    violations = []
    for i in range(len(rows) - 1):
        prev_step = rows[i - 1]["step_norm"] if i > 0 else 0.0
        step = rows[i]["step_norm"]
        h_now = rows[i]["f_val"] + alpha * prev_step ** 2
        h_next = rows[i + 1]["f_val"] + alpha * step ** 2
        lhs = c1 * (step ** 2 + prev_step ** 2)
        rhs = h_now - h_next
        if lhs > rhs + 1e-9 * (1.0 + abs(h_now)):
            violations.append((rows[i]["k"], lhs, rhs))

    print(f"checked {len(rows) - 1} transitions with alpha={alpha:.6g} "
          f"c1={c1:.6g}: {len(violations)} violation(s)")
    for k, lhs, rhs in violations[:10]:
        print(f"  k={k}: required decrease {lhs:.6e}, observed {rhs:.6e}")
    return EXIT_FAIL if violations else EXIT_OK


def _cmd_rates(args: argparse.Namespace) -> int:
    try:
        rows = read_trace_csv(args.trace)
    except (OSError, ValueError) as err:
        print(f"igd rates: {err}", file=sys.stderr)
        return EXIT_CONFIG

    if args.y == "gap":
        if args.fstar is None:
            print("igd rates: --y gap requires --fstar", file=sys.stderr)
            return EXIT_CONFIG
        errors = np.array([r["f_val"] - args.fstar for r in rows])
    else:
        errors = np.array([r["g_norm"] for r in rows])
    ks = np.array([r["k"] for r in rows], dtype=float)

    try:
        fit = fit_rate(errors, ks=ks)
    except ValueError as err:
        print(f"igd rates: {err}", file=sys.stderr)
        return EXIT_CONFIG

    lo, hi = fit.window
    if fit.model == "geometric":
        print(f"geometric fit on k in [{lo:.0f}, {hi:.0f}]: "
              f"rate {fit.rate_or_slope:.6f} per iteration, r2={fit.r2:.4f}")
    else:
        print(f"power-law fit on k in [{lo:.0f}, {hi:.0f}]: "
              f"slope {fit.rate_or_slope:.4f} in log error vs log k, r2={fit.r2:.4f}")
    print(f"(alternative: geometric r2={fit.r2_geometric:.4f}, "
          f"power r2={fit.r2_power:.4f})")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"igd: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
