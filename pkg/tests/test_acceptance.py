"""Acceptance gate: one test per release criterion, pinned tolerances.

Each test prints a single "criterion N: PASS — ..." line on success (visible
with -s or in the captured output); pytest -v gives the per-criterion
pass/fail verdict either way.
"""

import math
import time

import numpy as np
import pytest

import visolve.experiments as ex
from visolve.diagnostics import (
    CERTIFIED,
    VIOLATED,
    bound_value,
    check_quasi_sharpness,
    estimate_linear_growth,
    find_monotonicity_violation,
)
from visolve.feasible_sets import Ball, Box, WholeSpace
from visolve.operators import (
    NoiseModel,
    make_example1,
    make_random_switched_quadratic,
    make_switched_quadratic,
)
from visolve.schedules import Constant, preset
from visolve.solvers import run

# --- shared expensive runs (computed lazily, reused across criteria 5 and 6)

_mean_dist_cache = {}


def _thm4_mean_dist(K, seeds=50):
    """Mean final dist^2 after K+1 Popov steps on the 20-dim switched
    quadratic (mu_A = 0.2 => mu = 0.1), plus measured r_1 and the largest
    per-seed growth constant."""
    if K not in _mean_dist_cache:
        dists, r1s, Cs = [], [], []
        for seed in range(seeds):
            rng = np.random.default_rng(seed)
            op = make_random_switched_quadratic(10, 10, 0.2, 1.0, rng)
            u0 = rng.normal(size=20)
            sched = preset("thm4", op.declared, K=K)
            # theorem bounds dist^2(u_{K+1}): run K+1 steps
            traj = run("popov", op, WholeSpace(20), sched, u0, u0, K + 1,
                       seed=rng, record_stride=K + 1)
            dists.append(traj.final().dist_sq_u)
            r1s.append(traj.r1_term)
            Cs.append(op.declared.C)
        _mean_dist_cache[K] = (
            float(np.mean(dists)), float(np.mean(r1s)), float(np.max(Cs))
        )
    return _mean_dist_cache[K]


_fig2_cache = {}


def _fig2_times(name):
    """(popov time-to-threshold, projection time-to-threshold, horizon K)."""
    if name not in _fig2_cache:
        cfg = ex.preset_config(name)
        summary = ex.run_experiment(cfg)
        pop = summary.methods["popov"]
        proj = summary.methods["projection"]
        floor = ex.noise_floor(pop.ks, pop.mean_dist_sq)
        t_pop = ex.time_to_threshold(pop.ks, pop.mean_dist_sq, 2.0 * floor)
        t_proj = ex.time_to_threshold(proj.ks, proj.mean_dist_sq, 2.0 * floor)
        _fig2_cache[name] = (t_pop, t_proj, cfg.K)
    return _fig2_cache[name]


def test_criterion_01_projection_properties():
    """10^4 randomized trials per set family satisfy the three projection
    inequalities with violation <= 1e-9."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    dim = 4
    lo = rng.uniform(-2.0, 0.0, size=dim)
    families = {
        "whole_space": WholeSpace(dim),
        "box": Box(lo, lo + rng.uniform(0.1, 3.0, size=dim)),
        "ball": Ball(rng.normal(size=dim), 1.7),
    }
    tol = 1e-9
    for name, fset in families.items():
        for _ in range(10_000):
            v = rng.normal(0.0, 3.0, size=dim)
            w = rng.normal(0.0, 3.0, size=dim)
            u = fset.project(rng.normal(0.0, 3.0, size=dim))
            pv = fset.project(v)
            # variational characterization
            assert float(np.dot(v - pv, u - pv)) <= tol, name
            # strengthened nonexpansiveness
            assert (
                np.sum((u - pv) ** 2)
                <= np.sum((u - v) ** 2) - np.sum((v - pv) ** 2) + tol
            ), name
            # 1-Lipschitz
            pw = fset.project(w)
            assert np.linalg.norm(pv - pw) <= np.linalg.norm(v - w) + tol, name
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print(f"criterion 1: PASS — 3x10^4 projection trials clean ({elapsed:.1f}s)")


def test_criterion_02_sign_power_certification():
    """Sharpness certified at mu = 2^(1-p) for p in {1, 1.5, 2}; the
    deterministic non-monotonicity witness is returned for p = 1.5."""
    t0 = time.perf_counter()
    for p in (1.0, 1.5, 2.0):
        op = make_example1(p)
        rep = check_quasi_sharpness(
            op, WholeSpace(2), p=p, mu=2.0 ** (1.0 - p), n=10_000, rng=0
        )
        assert rep.verdict == CERTIFIED, p
        assert rep.max_violation <= 1e-10, p
    mono = find_monotonicity_violation(make_example1(1.5), rng=0)
    assert mono.verdict == VIOLATED
    u, v = mono.witness
    assert np.allclose(u, [0.0, 1.0]) and np.allclose(v, [0.0, 1.4])
    assert mono.max_violation > 0.0  # strictly negative inner product
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print(f"criterion 2: PASS — certified p in {{1,1.5,2}}, witness found ({elapsed:.1f}s)")


def test_criterion_03_superlinear_growth_falsified():
    """p = 3 field: growth slope at radius 10^3 at least 10x the slope at 10."""
    t0 = time.perf_counter()
    op = make_example1(3.0)
    C_near, _, _ = estimate_linear_growth(op, n=4000, rng=np.random.default_rng(0),
                                          radius=10.0)
    C_far, _, _ = estimate_linear_growth(op, n=4000, rng=np.random.default_rng(1),
                                         radius=1000.0)
    assert C_far >= 10.0 * C_near
    elapsed = time.perf_counter() - t0
    assert elapsed < 2.0
    print(f"criterion 3: PASS — slope ratio {C_far / C_near:.1f} >= 10 ({elapsed:.1f}s)")


def test_criterion_04_pathwise_audit_clean():
    """20 audited noisy Popov runs produce zero per-iteration descent
    inequality violations beyond the 1e-8 slack."""
    t0 = time.perf_counter()
    total_violations = 0
    audited_iters = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        op = make_random_switched_quadratic(4, 4, 0.2, 1.0, rng)
        sched = preset("thm4", op.declared, K=500)
        u0 = rng.normal(size=8)
        traj = run("popov", op, WholeSpace(8), sched, u0, u0, 500,
                   seed=rng, audit=True, record_stride=500)
        total_violations += len(traj.audit_violations)
        assert traj.audit_max_violation <= 1e-8
        audited_iters += 499
    assert total_violations == 0
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    print(f"criterion 4: PASS — 0 violations over {audited_iters} audited "
          f"iterations ({elapsed:.1f}s)")


@pytest.mark.parametrize("K", [500, 2000])
def test_criterion_05_thm4_bound_satisfied(K):
    """Empirical mean dist^2(u_{K+1}) stays below the theoretical bound
    (one-sided: the bound is loose)."""
    mean_d, r1, C_max = _thm4_mean_dist(K)
    bound = bound_value(
        "thm4", {"mu": 0.1, "L": C_max, "sigma_sq": 1.0, "r_1": r1}, K
    )
    assert mean_d <= bound
    print(f"criterion 5 (K={K}): PASS — mean {mean_d:.4g} <= bound {bound:.4g}")


def test_criterion_06_noise_regime_scaling():
    """Quadrupling the horizon in the 1/K regime cuts the error by at
    least half (theoretical factor 0.25 plus statistical slack)."""
    m2, _, _ = _thm4_mean_dist(2000)
    m8, _, _ = _thm4_mean_dist(8000)
    ratio = m8 / m2
    assert ratio <= 0.5
    print(f"criterion 6: PASS — K=8000/K=2000 error ratio {ratio:.3f} <= 0.5")


def test_criterion_07_popov_reaches_neighborhood_first():
    """Moderate conditioning: Popov hits the 2x-noise-floor threshold before
    projection; severe conditioning: projection never reaches it at all."""
    t0 = time.perf_counter()
    t_pop_b, t_proj_b, _ = _fig2_times("fig2-b")
    assert t_pop_b < t_proj_b
    t_pop_c, t_proj_c, K_c = _fig2_times("fig2-c")
    assert math.isfinite(t_pop_c) and t_pop_c <= K_c
    assert t_proj_c == math.inf
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    print(f"criterion 7: PASS — moderate: {t_pop_b:g} < {t_proj_b:g}; severe: "
          f"{t_pop_c:g} vs unreached ({elapsed:.0f}s)")


def test_criterion_08_deterministic_linear_convergence():
    """Noiseless run inside the unswitched basin with alpha = mu/(4 C^2):
    monotone decrease and a 1e-6 contraction by iteration 200."""
    t0 = time.perf_counter()
    op = make_switched_quadratic(
        np.array([[1.0]]), np.array([[1.0]]), np.array([[0.5]]),
        [0.0], [0.0], noise=NoiseModel("none"),
    )
    alpha = op.declared.mu / (4.0 * op.declared.C**2)
    u0 = np.array([3.0, -2.0])  # ||u0|| < 10: stays in the c = 1 region
    traj = run("popov", op, WholeSpace(2), Constant(alpha), u0, u0, K=200, seed=0)
    d = [r.dist_sq_u for r in traj.records]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] / d[0] <= 1e-6
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"criterion 8: PASS — monotone, contraction {d[-1] / d[0]:.2e} ({elapsed:.2f}s)")


def test_criterion_09_preset_determinism(tmp_path):
    """A preset run twice with the same base seed emits byte-identical
    long-format CSVs."""
    cfg1 = ex.preset_config("example-p", n_seeds=3, K=300)
    cfg2 = ex.preset_config("example-p", n_seeds=3, K=300)
    ex.run_experiment(cfg1, out_dir=tmp_path / "a")
    ex.run_experiment(cfg2, out_dir=tmp_path / "b")
    a = (tmp_path / "a" / "example-p_runs.csv").read_bytes()
    b = (tmp_path / "b" / "example-p_runs.csv").read_bytes()
    assert a == b
    print(f"criterion 9: PASS — byte-identical CSVs ({len(a)} bytes)")


def test_criterion_10_bound_evaluator_regression():
    """bound_value reproduces the frozen arithmetic examples to 1e-9 relative."""
    got = bound_value("thm4", {"mu": 1.0, "L": 1.0, "sigma_sq": 0.0, "r_1": 1.0}, K=2)
    assert math.isclose(got, 95.95234484924508, rel_tol=1e-9)
    got = bound_value(
        "thm5b",
        {"mu": 1.0, "D": 1.0, "sigma_sq": 0.0, "M_U": 1.0, "p": 2.0, "dist_sq_u1": 1.0},
        K=101,
    )
    assert math.isclose(got, 8.64000000088883, rel_tol=1e-9)
    got = bound_value(
        "thm2",
        {"mu": 1.0, "C": 0.0, "D": 0.0, "sigma_sq": 0.0, "M": 7.0, "dist_sq_u1": 2.0},
        K=5,
    )
    assert math.isclose(got, 2.25, rel_tol=1e-9)
    print("criterion 10: PASS — all three frozen bound values reproduced")
