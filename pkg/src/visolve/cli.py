"""Command-line interface.

Subcommands:
  run        execute an experiment described by a TOML/JSON config file
  reproduce  run a named built-in experiment preset
  check      numerically probe structural properties of an operator family
  bounds     tabulate a theoretical error bound over iteration counts

Exit codes: 0 success, 1 configuration error, 2 every seed diverged.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, experiments, feasible_sets
from .experiments import ConfigError
from .operators import make_example1, make_random_switched_quadratic

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="visolve",
        description="Stochastic Popov and projection methods for variational inequalities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("--config", required=True, help="TOML or JSON experiment config")
    p_run.add_argument("--out", default="out", help="output directory for CSV files")
    p_run.add_argument("--seeds", type=int, default=None, help="override number of seeds")
    p_run.add_argument("--iters", type=int, default=None, help="override iteration count K")
    p_run.add_argument(
        "--deterministic-order",
        action="store_true",
        help="force sequential single-threaded execution",
    )

    p_rep = sub.add_parser("reproduce", help="run a built-in experiment preset")
    p_rep.add_argument("preset", choices=experiments.PRESET_NAMES)
    p_rep.add_argument("--out", default="out", help="output directory for CSV files")
    p_rep.add_argument("--seeds", type=int, default=None)
    p_rep.add_argument("--iters", type=int, default=None)
    p_rep.add_argument("--deterministic-order", action="store_true")

    p_chk = sub.add_parser("check", help="probe sharpness/growth/monotonicity of an operator")
    p_chk.add_argument("operator", choices=["example1", "switched_quadratic"])
    p_chk.add_argument("--p", type=float, default=2.0, help="sharpness exponent (example1)")
    p_chk.add_argument("--mu", type=float, default=None, help="sharpness modulus to test")
    p_chk.add_argument("--samples", type=int, default=10_000)
    p_chk.add_argument("--seed", type=int, default=0)

    p_bnd = sub.add_parser("bounds", help="tabulate a theoretical bound over K")
    p_bnd.add_argument("theorem", choices=diagnostics.BOUND_THEOREMS)
    p_bnd.add_argument("--constants", required=True, help="JSON file of constant values")
    p_bnd.add_argument("--k-max", type=int, required=True)
    p_bnd.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    return parser


def _apply_overrides(cfg, args):
    if args.seeds is not None:
        cfg.n_seeds = args.seeds
    if args.iters is not None:
        cfg.K = args.iters
    if getattr(args, "deterministic_order", False):
        import os

        os.environ["VISOLVE_THREADS"] = "1"
    return cfg


def _report(summary) -> int:
    total_ok = 0
    for method, ms in summary.methods.items():
        if ms.n_seeds_ok == 0:
            print(f"{method}: all seeds diverged ({len(ms.diverged_seeds)})")
            continue
        total_ok += ms.n_seeds_ok
        final = ms.mean_dist_sq[-1]
        note = f", diverged seeds: {ms.diverged_seeds}" if ms.diverged_seeds else ""
        print(
            f"{method}: {ms.n_seeds_ok} seeds, final mean dist^2 = {final:.6g}{note}"
        )
    print(
        f"kappa_F (mean) = {summary.kappa_mean:.6g}, sigma^2 (measured) = "
        f"{summary.sigma_sq_measured:.6g}, r_1 = {summary.r_1:.6g}, "
        f"M = {summary.M:.6g}, wall time = {summary.wall_time:.2f}s"
    )
    return EXIT_OK if total_ok > 0 else EXIT_DIVERGED


def cmd_run(args) -> int:
    cfg = _apply_overrides(experiments.load_config(args.config), args)
    summary = experiments.run_experiment(cfg, out_dir=args.out)
    print(f"wrote {args.out}/{cfg.name}_runs.csv and {args.out}/{cfg.name}_summary.csv")
    return _report(summary)


def cmd_reproduce(args) -> int:
    overrides = {}
    if args.seeds is not None:
        overrides["n_seeds"] = args.seeds
    if args.iters is not None:
        overrides["K"] = args.iters
    cfg = experiments.preset_config(args.preset, **overrides)
    if args.deterministic_order:
        import os

        os.environ["VISOLVE_THREADS"] = "1"
    summary = experiments.run_experiment(cfg, out_dir=args.out)
    print(f"wrote {args.out}/{cfg.name}_runs.csv and {args.out}/{cfg.name}_summary.csv")
    code = _report(summary)
    pop = summary.methods.get("popov")
    if pop is not None and pop.n_seeds_ok:
        floor = experiments.noise_floor(pop.ks, pop.mean_dist_sq)
        print(f"popov noise floor = {floor:.6g}")
        for method, ms in summary.methods.items():
            t = experiments.time_to_threshold(ms.ks, ms.mean_dist_sq, 2.0 * floor)
            print(f"{method}: time to 2x floor = {t:g}")
    return code


def cmd_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.operator == "example1":
        op = make_example1(args.p)
        mu = args.mu if args.mu is not None else 2.0 ** (1.0 - args.p)
        p = args.p
    else:
        op = make_random_switched_quadratic(4, 4, 0.2, 1.0, rng)
        mu = args.mu if args.mu is not None else op.declared.mu
        p = 2.0
    fset = feasible_sets.WholeSpace(op.dim)

    sharp = diagnostics.check_quasi_sharpness(op, fset, p, mu, n=args.samples, rng=rng)
    print(f"quasi-sharpness (p={p:g}, mu={mu:g}): {sharp.verdict} "
          f"(max violation {sharp.max_violation:.3g} over {sharp.n_samples} samples)")

    C_hat, D_hat, growth = diagnostics.estimate_linear_growth(op, n=args.samples, rng=rng)
    print(f"linear growth estimate: C ~ {C_hat:.4g}, D ~ {D_hat:.4g} ({growth.verdict})")

    mono = diagnostics.find_monotonicity_violation(op, rng=rng)
    if mono.verdict == diagnostics.VIOLATED:
        print(f"monotonicity: violated, witness gap {mono.max_violation:.3g}")
    else:
        print(f"monotonicity: no violation found in {mono.n_samples} pairs")
    return EXIT_OK


def cmd_bounds(args) -> int:
    path = Path(args.constants)
    if not path.exists():
        print(f"constants file not found: {path}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        constants = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        print(f"malformed constants file: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        curve = diagnostics.bound_curve(args.theorem, constants, range(2, args.k_max + 1))
    except (KeyError, ValueError) as err:
        print(f"cannot evaluate bound: {err}", file=sys.stderr)
        return EXIT_CONFIG
    lines = ["theorem,K,bound"]
    lines += [f"{args.theorem},{K},{repr(float(v))}" for K, v in sorted(curve.values.items())]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "reproduce": cmd_reproduce,
        "check": cmd_check,
        "bounds": cmd_bounds,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except experiments.DivergenceError as err:
        print(f"divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
