"""Declarative multi-seed experiments with CSV output.

Config schema (TOML, with JSON accepted as an alternative encoding):

    name = "fig2-a"

    [operator]
    family = "switched_quadratic"   # or "example1", "finite_sum"
    m = 30
    s = 30
    mu_min = 0.2
    lam_max = 1.0

    [feasible_set]
    kind = "whole_space"            # or "box" (lo, hi) / "ball" (center, radius)

    [methods.popov]
    preset = "thm4"                 # or kind = "constant"/"diminishing"/"switching"
    k0 = 200                        # optional switching-threshold override

    [methods.projection]
    preset = "proj-baseline"

    [run]
    K = 10000
    n_seeds = 20
    base_seed = 0
    audit = false
    record_stride = 10

Output files (per experiment name):
  <name>_runs.csv     method,seed,k,dist_sq_u,dist_sq_h,alpha
  <name>_summary.csv  method,k,mean_dist_sq,std_dist_sq

Random operator instances are regenerated per seed; kappa_F is reported as
the mean condition number over seeds.  Seed i uses base_seed + i.  The env
var VISOLVE_THREADS caps parallel runs; results are collected into a
deterministic order regardless of execution order.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import feasible_sets, schedules
from .operators import (
    OperatorInstance,
    condition_number,
    eval_mean,
    make_example1,
    make_finite_sum_game,
    make_random_switched_quadratic,
    sample_oracle,
)
from .solvers import DivergenceError, run

PRESET_NAMES = ("fig2-a", "fig2-b", "fig2-c", "fig3", "finite-sum", "example-p")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    operator: dict
    methods: dict
    K: int
    n_seeds: int
    feasible_set: dict = field(default_factory=lambda: {"kind": "whole_space"})
    base_seed: int = 0
    audit: bool = False
    record_stride: int = 1

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            if m not in ("popov", "projection"):
                raise ConfigError(f"unknown method {m!r}")

    def fingerprint(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, default=str)


@dataclass
class MethodSummary:
    ks: list
    mean_dist_sq: list
    std_dist_sq: list
    n_seeds_ok: int
    diverged_seeds: list


@dataclass
class RunSummary:
    name: str
    methods: dict  # method -> MethodSummary
    kappa_mean: float = math.nan
    sigma_sq_measured: float = math.nan
    r_1: float = math.nan
    M: float = math.nan
    wall_time: float = 0.0


def build_operator(spec: dict, rng) -> OperatorInstance:
    family = spec.get("family")
    if family == "example1":
        return make_example1(float(spec.get("p", 2.0)), float(spec.get("sigma_sq", 0.0)))
    if family == "switched_quadratic":
        return make_random_switched_quadratic(
            int(spec.get("m", 30)),
            int(spec.get("s", 30)),
            float(spec.get("mu_min", 0.2)),
            float(spec.get("lam_max", 1.0)),
            rng,
        )
    if family == "finite_sum":
        m = int(spec.get("m", 30))
        s = int(spec.get("s", 30))
        return make_finite_sum_game(
            n=int(spec.get("n", 20)),
            m=m,
            s=s,
            mu_A=float(spec.get("mu_A", 0.2)),
            L_A=float(spec.get("L_A", 1.0)),
            mu_C=float(spec.get("mu_C", spec.get("mu_A", 0.2))),
            L_C=float(spec.get("L_C", 1.0)),
            sigma_B_sq=float(spec.get("sigma_B_sq", 1.0 / (m + s) ** 2)),
            sigma_bias_sq=float(spec.get("sigma_bias_sq", 1.0 / (m + s))),
            rng=rng,
        )
    raise ConfigError(f"unknown operator family {family!r}")


def build_schedule(spec: dict, op: OperatorInstance, fset, K: int):
    k0 = int(spec.get("k0", -1))
    if "preset" in spec:
        constants = op.declared
        dia = fset.diameter()
        if math.isfinite(dia) and constants.M_U is None:
            constants = dataclasses.replace(constants, M_U=dia)
        return schedules.preset(spec["preset"], constants, K, k0=k0)
    kind = spec.get("kind")
    if kind == "constant":
        return schedules.Constant(float(spec["alpha"]))
    if kind == "diminishing":
        return schedules.DiminishingHarmonic(
            mu=float(spec["mu"]),
            offset=int(spec.get("offset", 3)),
            scale=float(spec.get("scale", 1.0)),
        )
    if kind == "switching":
        return schedules.Switching(a=float(spec["a"]), d=float(spec["d"]), K=K, k0=k0)
    raise ConfigError(f"schedule spec needs 'preset' or a known 'kind': {spec!r}")


def estimate_sigma_sq(op: OperatorInstance, radius: float, rng, n_points: int = 32) -> float:
    """Empirical oracle-variance bound on a ball around the origin.

    For finite-sum operators the variance is computed exactly over the index
    distribution at each sampled point; for additive noise the declared bound
    is returned when available.
    """
    if op.noise.kind == "gaussian":
        return op.dim * op.noise.sigma_sq_per_coord
    if op.noise.kind == "none":
        return 0.0
    worst = 0.0
    n = op.noise.n
    J_stack, b_stack = op.params["components"]
    for _ in range(n_points):
        u = rng.normal(size=op.dim)
        u *= radius * rng.uniform() / max(np.linalg.norm(u), 1e-12)
        Fu = eval_mean(op, u)
        var = float(np.mean(np.sum((J_stack @ u + b_stack - Fu) ** 2, axis=1)))
        worst = max(worst, var)
    return worst


def _single_run(cfg: ExperimentConfig, method: str, seed_index: int):
    seed = cfg.base_seed + seed_index
    rng = np.random.default_rng(seed)
    op = build_operator(cfg.operator, rng)
    fset = feasible_sets.from_config(cfg.feasible_set, op.dim)
    u0 = fset.project(rng.normal(size=op.dim))
    sched = build_schedule(cfg.methods[method], op, fset, cfg.K)
    traj = run(
        method,
        op,
        fset,
        sched,
        u0,
        u0,
        cfg.K,
        seed=rng,
        audit=cfg.audit,
        record_stride=cfg.record_stride,
        fingerprint=cfg.fingerprint(),
    )
    traj.seed = seed
    return traj, op


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> RunSummary:
    """Execute the experiment, write CSVs if out_dir is given, return summary."""
    t0 = time.perf_counter()
    tasks = [(m, i) for m in cfg.methods for i in range(cfg.n_seeds)]
    results = {}

    def work(task):
        method, i = task
        try:
            return task, _single_run(cfg, method, i)
        except DivergenceError as err:
            return task, err

    n_threads = int(os.environ.get("VISOLVE_THREADS", "1") or "1")
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            for task, res in pool.map(work, tasks):
                results[task] = res
    else:
        for task in tasks:
            results[task] = work(task)[1]

    kappas, r1s, ops = [], [], []
    method_summaries = {}
    for method in cfg.methods:
        oks, diverged = [], []
        for i in range(cfg.n_seeds):
            res = results[(method, i)]
            if isinstance(res, DivergenceError):
                diverged.append(cfg.base_seed + i)
            else:
                traj, op = res
                oks.append(traj)
                if method == next(iter(cfg.methods)):
                    kappas.append(_safe_kappa(op))
                    ops.append(op)
                if method == "popov" and traj.r1_term is not None:
                    r1s.append(traj.r1_term)
        if not oks:
            method_summaries[method] = MethodSummary([], [], [], 0, diverged)
            continue
        ks = [r.k for r in oks[0].records]
        dist = np.array([[r.dist_sq_u for r in t.records] for t in oks])
        method_summaries[method] = MethodSummary(
            ks=ks,
            mean_dist_sq=list(dist.mean(axis=0)),
            std_dist_sq=list(dist.std(axis=0)),
            n_seeds_ok=len(oks),
            diverged_seeds=diverged,
        )

    summary = RunSummary(name=cfg.name, methods=method_summaries)
    if kappas:
        summary.kappa_mean = float(np.mean(kappas))
    if r1s:
        summary.r_1 = float(np.mean(r1s))
    # pilot-style surrogate for the second-moment bound on h_k
    h_max = [
        max(r.h_norm_sq for r in res[0].records)
        for res in results.values()
        if not isinstance(res, DivergenceError)
    ]
    if h_max:
        summary.M = 1.5 * float(np.mean(h_max))
    if ops:
        rng = np.random.default_rng(cfg.base_seed)
        radius = 2.0 * math.sqrt(max(t.records[0].dist_sq_u for t in _ok_trajs(results)))
        ustar_norm = float(np.linalg.norm(ops[0].solution_set.solve())) if ops[0].solution_set.kind != "unknown" else 0.0
        summary.sigma_sq_measured = estimate_sigma_sq(ops[0], radius + ustar_norm, rng)
    summary.wall_time = time.perf_counter() - t0

    if out_dir is not None:
        write_csvs(cfg, results, summary, out_dir)
    return summary


def _ok_trajs(results):
    return [res[0] for res in results.values() if not isinstance(res, DivergenceError)]


def _safe_kappa(op):
    try:
        return condition_number(op)
    except KeyError:
        return math.nan


def _fmt(x) -> str:
    return repr(float(x))


def write_csvs(cfg: ExperimentConfig, results, summary: RunSummary, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs_path = out / f"{cfg.name}_runs.csv"
    with open(runs_path, "w", newline="\n") as f:
        f.write("method,seed,k,dist_sq_u,dist_sq_h,alpha\n")
        for method in cfg.methods:
            for i in range(cfg.n_seeds):
                res = results[(method, i)]
                if isinstance(res, DivergenceError):
                    continue
                traj = res[0]
                for r in traj.records:
                    f.write(
                        f"{method},{traj.seed},{r.k},{_fmt(r.dist_sq_u)},"
                        f"{_fmt(r.dist_sq_h)},{_fmt(r.alpha)}\n"
                    )
    summary_path = out / f"{cfg.name}_summary.csv"
    with open(summary_path, "w", newline="\n") as f:
        f.write("method,k,mean_dist_sq,std_dist_sq\n")
        for method, ms in summary.methods.items():
            for k, mean, std in zip(ms.ks, ms.mean_dist_sq, ms.std_dist_sq):
                f.write(f"{method},{k},{_fmt(mean)},{_fmt(std)}\n")
    return runs_path, summary_path


# --- trajectory comparison metrics


def noise_floor(ks, means, tail_frac: float = 0.1, trim: float = 0.1) -> float:
    """Trimmed mean of the last fraction of a mean-trajectory curve."""
    ks = np.asarray(ks)
    means = np.asarray(means, dtype=float)
    cutoff = ks[-1] - tail_frac * (ks[-1] - ks[0])
    tail = np.sort(means[ks >= cutoff])
    drop = int(trim * len(tail))
    kept = tail[drop : len(tail) - drop] if len(tail) > 2 * drop else tail
    return float(kept.mean())


def time_to_threshold(ks, means, threshold: float) -> float:
    """First recorded k at which the mean curve is <= threshold (inf if never)."""
    for k, m in zip(ks, means):
        if m <= threshold:
            return float(k)
    return math.inf


# --- presets reproducing the published experiment settings


def preset_config(name: str, **overrides) -> ExperimentConfig:
    """Fully populated config for a named experiment preset.

    Recognized overrides: n_seeds, K, base_seed, k0, record_stride, audit,
    p (example-p), mu_min (switched quadratic), mu (finite-sum spectra).
    """
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r} (choose from {PRESET_NAMES})")
    k0 = int(overrides.pop("k0", -1))
    K = int(overrides.pop("K", 10_000))
    n_seeds = int(overrides.pop("n_seeds", 20))
    base_seed = int(overrides.pop("base_seed", 0))
    record_stride = int(overrides.pop("record_stride", 10))
    audit = bool(overrides.pop("audit", False))

    if name.startswith("fig2") or name == "fig3":
        mu_by_variant = {"fig2-a": 0.2, "fig2-b": 0.02, "fig2-c": 0.002, "fig3": 0.2}
        mu_min = float(overrides.pop("mu_min", mu_by_variant[name]))
        if name == "fig3" and k0 < 0:
            k0 = 200
        operator = {
            "family": "switched_quadratic",
            "m": 30,
            "s": 30,
            "mu_min": mu_min,
            "lam_max": 1.0,
        }
    elif name == "finite-sum":
        mu = float(overrides.pop("mu", 0.2))
        if k0 < 0:
            k0 = 200
        operator = {
            "family": "finite_sum",
            "n": 20,
            "m": 30,
            "s": 30,
            "mu_A": mu,
            "L_A": 1.0,
            "mu_C": mu,
            "L_C": 1.0,
        }
    else:  # example-p
        p = float(overrides.pop("p", 2.0))
        if k0 < 0:
            k0 = 1
        operator = {"family": "example1", "p": p, "sigma_sq": 1.0}

    if overrides:
        raise ConfigError(f"unknown overrides {sorted(overrides)} for preset {name!r}")
    return ExperimentConfig(
        name=name,
        operator=operator,
        feasible_set={"kind": "whole_space"},
        methods={
            "popov": {"preset": "thm4", "k0": k0},
            "projection": {"preset": "proj-baseline", "k0": k0},
        },
        K=K,
        n_seeds=n_seeds,
        base_seed=base_seed,
        audit=audit,
        record_stride=record_stride,
    )


def load_config(path) -> ExperimentConfig:
    """Read an ExperimentConfig from a TOML or JSON file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix == ".json":
            data = json.loads(path.read_text())
        else:
            with open(path, "rb") as f:
                data = tomllib.load(f)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"malformed config {path}: {err}") from err
    try:
        runblock = data.get("run", {})
        return ExperimentConfig(
            name=data.get("name", path.stem),
            operator=data["operator"],
            feasible_set=data.get("feasible_set", {"kind": "whole_space"}),
            methods=data["methods"],
            K=int(runblock.get("K", data.get("K", 1000))),
            n_seeds=int(runblock.get("n_seeds", data.get("n_seeds", 1))),
            base_seed=int(runblock.get("base_seed", 0)),
            audit=bool(runblock.get("audit", False)),
            record_stride=int(runblock.get("record_stride", 1)),
        )
    except KeyError as err:
        raise ConfigError(f"config {path} missing required field: {err}") from err
