"""Iteration engines: stochastic Popov (past-extragradient) and stochastic
projection methods, with trajectory recording.

Popov update, one oracle call per iteration:

    g        = Phi(h_k, xi_k)
    u_{k+1}  = P(u_k - alpha_k * g)
    h_{k+1}  = P(u_{k+1} - alpha_{k+1} * g)

Projection update:

    u_{k+1}  = P(u_k - alpha_k * Phi(u_k, xi_k))

In audit mode every iteration k >= 1 is checked pathwise against the
per-iteration descent inequality

    ||u_{k+1}-y||^2 <= ||u_k-y||^2 - ||u_{k+1}-h_k||^2 - ||u_k-h_k||^2
                       - 2 a_k <e_k + F(h_k), h_k - y>
                       + 6 a_k^2 (||e_{k-1}||^2 + ||F(h_k)-F(h_{k-1})||^2
                                  + ||e_k||^2)

with y the cached solution and e_k the oracle error at h_k.  The inequality
holds surely (not just in expectation), which makes it a cheap and strong
correctness oracle; auditing costs two extra mean-field evaluations per
iteration, so it is gated behind a flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .operators import OperatorInstance, SolutionSet, as_vector, eval_mean, sample_oracle

DIVERGENCE_NORM = 1e12
AUDIT_SLACK = 1e-8


class DivergenceError(RuntimeError):
    """Iterates blew up; carries the offending iterate and partial trajectory."""

    def __init__(self, message, iterate=None, trajectory=None):
        super().__init__(message)
        self.iterate = iterate
        self.trajectory = trajectory


def dist_to_solution_sq(u, sol: SolutionSet) -> float:
    """Squared Euclidean distance from u to the solution set."""
    u = as_vector(u)
    if sol.kind == "point":
        return float(np.sum((u - sol.point) ** 2))
    if sol.kind == "affine":
        ustar = np.linalg.solve(sol.J, -sol.b)
        return float(np.sum((u - ustar) ** 2))
    if sol.kind == "finite":
        return float(min(np.sum((u - v) ** 2) for v in sol.points))
    raise ValueError("solution set is unknown")


@dataclass
class PopovState:
    k: int
    u: np.ndarray
    h: np.ndarray
    cached_sample: Optional[np.ndarray] = None  # Phi(h_{k-1}, xi_{k-1})


@dataclass
class IterationRecord:
    k: int
    alpha: float
    dist_sq_u: float
    dist_sq_h: float
    u: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    sample: Optional[np.ndarray] = None
    mean_at_h: Optional[np.ndarray] = None
    h_norm_sq: float = 0.0


@dataclass
class Trajectory:
    records: list
    seed: Optional[int]
    method: str
    fingerprint: str = ""
    n_oracle_calls: int = 0
    r1_term: Optional[float] = None  # dist^2(u_1, U*) + ||h_0 - u_1||^2
    max_h_norm_sq: float = 0.0
    audit_max_violation: Optional[float] = None
    audit_violations: list = field(default_factory=list)

    def final(self) -> IterationRecord:
        return self.records[-1]


def popov_step(state: PopovState, op, fset, sched, rng) -> PopovState:
    """One Popov iteration; draws exactly one oracle sample."""
    a_k = sched.stepsize(state.k)
    a_next = sched.stepsize(state.k + 1)
    g = sample_oracle(op, state.h, rng)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("oracle returned non-finite sample", iterate=state.u)
    u_next = fset.project(state.u - a_k * g)
    h_next = fset.project(u_next - a_next * g)
    return PopovState(k=state.k + 1, u=u_next, h=h_next, cached_sample=g)


def projection_step(state: PopovState, op, fset, sched, rng) -> PopovState:
    """One stochastic projection iteration; draws exactly one oracle sample."""
    a_k = sched.stepsize(state.k)
    g = sample_oracle(op, state.u, rng)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("oracle returned non-finite sample", iterate=state.u)
    u_next = fset.project(state.u - a_k * g)
    return PopovState(k=state.k + 1, u=u_next, h=u_next, cached_sample=g)


def _descent_violation(u_next, u, h, h_prev, y, a_k, g, mean_h, e_prev, mean_prev):
    e_k = g - mean_h
    lhs = np.sum((u_next - y) ** 2)
    rhs = (
        np.sum((u - y) ** 2)
        - np.sum((u_next - h) ** 2)
        - np.sum((u - h) ** 2)
        - 2.0 * a_k * np.dot(e_k + mean_h, h - y)
        + 6.0 * a_k**2 * np.sum(e_prev**2)
        + 6.0 * a_k**2 * np.sum((mean_h - mean_prev) ** 2)
        + 6.0 * a_k**2 * np.sum(e_k**2)
    )
    return float(lhs - rhs)


def run(
    method: str,
    op: OperatorInstance,
    fset,
    sched,
    u0,
    h0,
    K: int,
    seed=None,
    audit: bool = False,
    record_stride: int = 1,
    fingerprint: str = "",
) -> Trajectory:
    """Run K iterations and return the recorded trajectory.

    Records are kept at k = 0, at every multiple of ``record_stride``, and at
    k = K (ceil(K / record_stride) + 1 records in total).  The
    first-iteration error term dist^2(u_1) + ||h_0 - u_1||^2 is always
    captured in ``r1_term`` regardless of the stride.  Deterministic for a
    fixed seed.
    """
    if method not in ("popov", "projection"):
        raise ValueError(f"unknown method {method!r}")
    if K < 1:
        raise ValueError("K must be >= 1")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    seed_val = seed if isinstance(seed, (int, np.integer)) else None

    u = fset.project(as_vector(u0, op.dim))
    h = fset.project(as_vector(h0, op.dim))
    sol = op.solution_set
    have_sol = sol.kind != "unknown"
    ustar = sol.solve() if have_sol and audit else None
    step = popov_step if method == "popov" else projection_step

    def record(k, alpha, u, h, sample=None, mean_h=None, full=False):
        du = dist_to_solution_sq(u, sol) if have_sol else float("nan")
        dh = dist_to_solution_sq(h, sol) if have_sol else float("nan")
        return IterationRecord(
            k=k,
            alpha=alpha,
            dist_sq_u=du,
            dist_sq_h=dh,
            u=u.copy() if full else None,
            h=h.copy() if full else None,
            sample=sample,
            mean_at_h=mean_h,
            h_norm_sq=float(np.sum(h**2)),
        )

    traj = Trajectory(records=[], seed=seed_val, method=method, fingerprint=fingerprint)
    traj.records.append(record(0, sched.stepsize(0), u, h, full=True))
    traj.max_h_norm_sq = float(np.sum(h**2))

    state = PopovState(k=0, u=u, h=h)
    prev_sample = None
    prev_mean = None
    prev_h = h
    for k in range(K):
        a_k = sched.stepsize(k)
        try:
            new_state = step(state, op, fset, sched, rng)
        except DivergenceError as err:
            err.trajectory = traj
            raise
        traj.n_oracle_calls += 1
        g = new_state.cached_sample

        mean_h = None
        if audit and method == "popov":
            mean_h = eval_mean(op, state.h)
            if k >= 1 and have_sol:
                viol = _descent_violation(
                    new_state.u, state.u, state.h, prev_h, ustar,
                    a_k, g, mean_h, prev_sample - prev_mean, prev_mean,
                )
                if viol > AUDIT_SLACK:
                    traj.audit_violations.append((k, viol))
                cur = traj.audit_max_violation
                traj.audit_max_violation = viol if cur is None else max(cur, viol)
            prev_mean = mean_h
        prev_sample = g
        prev_h = state.h
        state = new_state

        if not np.all(np.isfinite(state.u)) or np.linalg.norm(state.u) > DIVERGENCE_NORM:
            raise DivergenceError(
                f"iterate norm exceeded {DIVERGENCE_NORM:g} at k={state.k}",
                iterate=state.u,
                trajectory=traj,
            )

        if state.k == 1:
            du1 = dist_to_solution_sq(state.u, sol) if have_sol else float("nan")
            traj.r1_term = du1 + float(np.sum((h - state.u) ** 2))
        traj.max_h_norm_sq = max(traj.max_h_norm_sq, float(np.sum(state.h**2)))

        if state.k % record_stride == 0 or state.k == K:
            traj.records.append(
                record(state.k, sched.stepsize(state.k), state.u, state.h,
                       sample=g if audit else None, mean_h=mean_h, full=True)
            )
    return traj
