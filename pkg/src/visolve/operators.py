"""Stochastic operator families for variational inequality problems.

An operator instance bundles a deterministic mean field F, a noisy oracle
returning one sample per call, optional analytic constants (growth slope C,
offset D, Lipschitz constant L, sharpness modulus mu with exponent p, noise
variance bound sigma_sq), and a description of the solution set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class DimensionMismatchError(ValueError):
    """Input vector dimension does not match the operator's ambient dimension."""


class UnavailableConstantError(KeyError):
    """A required analytic constant was not declared on the operator."""


def as_vector(u, dim=None):
    """Validate and return ``u`` as a finite 1-D float64 array."""
    v = np.asarray(u, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite components")
    if dim is not None and v.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.size}")
    return v


@dataclass(frozen=True)
class Constants:
    """Optional analytic constants attached to a built-in operator."""

    C: Optional[float] = None
    D: Optional[float] = None
    L: Optional[float] = None
    mu: Optional[float] = None
    p: Optional[float] = None
    sigma_sq: Optional[float] = None
    M_U: Optional[float] = None  # feasible-set diameter, for bounded settings

    def require(self, *names):
        vals = []
        for name in names:
            v = getattr(self, name)
            if v is None:
                raise UnavailableConstantError(f"constant {name!r} not declared")
            vals.append(v)
        return vals


@dataclass(frozen=True)
class NoiseModel:
    """Noise attached to the stochastic oracle.

    kind is one of "none", "gaussian" (iid zero-mean per coordinate with
    variance ``sigma_sq_per_coord``) or "finite_sum" (uniform index on
    ``{0, ..., n - 1}``).
    """

    kind: str = "none"
    sigma_sq_per_coord: float = 0.0
    n: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "finite_sum"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma_sq_per_coord < 0:
            raise ValueError("sigma_sq_per_coord must be >= 0")
        if self.kind == "finite_sum" and self.n < 1:
            raise ValueError("finite_sum noise needs n >= 1")


@dataclass(frozen=True)
class SolutionSet:
    """Known solution set of the VI: a point, an affine system, a finite
    collection of points, or unknown.

    The affine variant encodes ``{u : J u + b = 0}`` with nonsingular ``J``,
    so the unique solution is recoverable by a linear solve.
    """

    kind: str = "unknown"
    point: Optional[np.ndarray] = None
    points: Optional[tuple] = None
    J: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None

    @staticmethod
    def from_point(v) -> "SolutionSet":
        return SolutionSet(kind="point", point=as_vector(v))

    @staticmethod
    def from_affine(J, b) -> "SolutionSet":
        J = np.asarray(J, dtype=np.float64)
        b = as_vector(b)
        if J.shape != (b.size, b.size):
            raise ValueError("J must be square and match b")
        return SolutionSet(kind="affine", J=J, b=b)

    @staticmethod
    def from_points(pts) -> "SolutionSet":
        return SolutionSet(kind="finite", points=tuple(as_vector(v) for v in pts))

    @staticmethod
    def unknown() -> "SolutionSet":
        return SolutionSet(kind="unknown")

    def solve(self) -> np.ndarray:
        """A representative solution (the nearest one is resolved elsewhere)."""
        if self.kind == "point":
            return self.point
        if self.kind == "affine":
            return np.linalg.solve(self.J, -self.b)
        if self.kind == "finite":
            return self.points[0]
        raise ValueError("solution set is unknown")


@dataclass
class OperatorInstance:
    """A stochastic operator: mean field F plus one-sample oracle.

    The oracle signature is ``oracle(u, rng) -> sample`` and consumes exactly
    one noise draw from ``rng`` per call.  Evaluation is read-only after
    construction; concurrent runs must each own a private rng.
    """

    dim: int
    mean_field: Callable[[np.ndarray], np.ndarray]
    oracle: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    noise: NoiseModel = field(default_factory=NoiseModel)
    solution_set: SolutionSet = field(default_factory=SolutionSet.unknown)
    declared: Constants = field(default_factory=Constants)
    family: str = "custom"
    params: dict = field(default_factory=dict)


def eval_mean(op: OperatorInstance, u) -> np.ndarray:
    """Evaluate the deterministic mean field F(u)."""
    u = as_vector(u, op.dim)
    return np.asarray(op.mean_field(u), dtype=np.float64)


def sample_oracle(op: OperatorInstance, u, rng: np.random.Generator) -> np.ndarray:
    """Draw one stochastic sample of the operator at ``u``."""
    u = as_vector(u, op.dim)
    return np.asarray(op.oracle(u, rng), dtype=np.float64)


def condition_number(op: OperatorInstance) -> float:
    """Ratio of the Lipschitz (or growth) constant to the sharpness modulus."""
    if op.declared.mu is None:
        raise UnavailableConstantError("constant 'mu' not declared")
    top = op.declared.L if op.declared.L is not None else op.declared.C
    if top is None:
        raise UnavailableConstantError("neither 'L' nor 'C' declared")
    return top / op.declared.mu


# --- Example-1 operator (2-D, sign-power field with a switch on the unit ball)


def _signed_power(x, p):
    # sign(0)*|0|^(p-1) := 0 for all p > 0 (continuous extension; keeps F(0)=0)
    out = np.sign(x) * np.abs(x) ** (p - 1.0)
    return np.where(x == 0.0, 0.0, out)


def make_example1(p: float, sigma_sq: float = 0.0) -> OperatorInstance:
    """The 2-D sharp-but-non-monotone benchmark operator.

    F(u) = c * (sign(u1)|u1|^(p-1) + u2, sign(u2)|u2|^(p-1) - u1) with c = 2
    on the closed unit ball and c = 1 outside.  Unique solution (0, 0),
    sharpness modulus mu = 2^(1-p).  Growth constants C = 2, D = 4*sqrt(2)
    hold for p <= 2 only, so they are declared only in that range.

    ``sigma_sq`` is the total additive Gaussian noise variance (split evenly
    across the two coordinates).
    """
    if p <= 0:
        raise ValueError("p must be > 0")

    def F(u):
        c = 2.0 if np.linalg.norm(u) <= 1.0 else 1.0
        return c * np.array(
            [_signed_power(u[0], p) + u[1], _signed_power(u[1], p) - u[0]]
        )

    per_coord = sigma_sq / 2.0
    if sigma_sq > 0:

        def oracle(u, rng):
            return F(u) + rng.normal(0.0, math.sqrt(per_coord), size=2)

        noise = NoiseModel("gaussian", sigma_sq_per_coord=per_coord)
    else:

        def oracle(u, rng):
            rng.normal(0.0, 1.0, size=2)  # keep draw parity with the noisy case
            return F(u)

        noise = NoiseModel("none")

    growth = {"C": 2.0, "D": 4.0 * math.sqrt(2.0)} if p <= 2.0 else {}
    return OperatorInstance(
        dim=2,
        mean_field=F,
        oracle=oracle,
        noise=noise,
        solution_set=SolutionSet.from_point([0.0, 0.0]),
        declared=Constants(mu=2.0 ** (1.0 - p), p=p, sigma_sq=sigma_sq, **growth),
        family="example1",
        params={"p": p, "sigma_sq": sigma_sq},
    )


# --- switched quadratic operator (saddle block matrix with a radius switch)


def _check_spd(A, name):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(A, A.T, atol=1e-10):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(A).min() <= 0:
        raise ValueError(f"{name} must be positive definite")
    return A


def saddle_block_matrix(A1, A2, A3) -> np.ndarray:
    """Assemble J = [[A1, A2], [-A2', A3]]."""
    A1 = np.asarray(A1, dtype=np.float64)
    A2 = np.asarray(A2, dtype=np.float64)
    A3 = np.asarray(A3, dtype=np.float64)
    return np.block([[A1, A2], [-A2.T, A3]])


def make_switched_quadratic(
    A1,
    A3,
    A2,
    b1,
    b2,
    noise: NoiseModel = NoiseModel(),
    radius_switch: float = 10.0,
    c_outside: float = 0.5,
) -> OperatorInstance:
    """Affine saddle operator scaled by c = 1 inside the closed ball of
    ``radius_switch`` and ``c_outside`` beyond it; additive noise outside the
    switch factor.

    Declared constants: C = sqrt(lambda_max(J'J)), D = ||b||,
    mu = c_outside * min(lambda_min(A1), lambda_min(A3)), p = 2.
    """
    A1 = _check_spd(A1, "A1")
    A3 = _check_spd(A3, "A3")
    A2 = np.asarray(A2, dtype=np.float64)
    if A2.shape != (A1.shape[0], A3.shape[0]):
        raise ValueError("A2 must have shape (m, s)")
    b = np.concatenate([as_vector(b1, A1.shape[0]), as_vector(b2, A3.shape[0])])
    J = saddle_block_matrix(A1, A2, A3)
    dim = J.shape[0]

    def F(u):
        c = 1.0 if np.linalg.norm(u) <= radius_switch else c_outside
        return c * (J @ u + b)

    if noise.kind == "gaussian" and noise.sigma_sq_per_coord > 0:
        scale = math.sqrt(noise.sigma_sq_per_coord)

        def oracle(u, rng):
            return F(u) + rng.normal(0.0, scale, size=dim)

        sigma_sq = dim * noise.sigma_sq_per_coord
    elif noise.kind in ("none", "gaussian"):

        def oracle(u, rng):
            rng.normal(0.0, 1.0, size=dim)
            return F(u)

        sigma_sq = 0.0
    else:
        raise ValueError("switched quadratic supports additive Gaussian noise only")

    mu = c_outside * min(
        np.linalg.eigvalsh(A1).min(), np.linalg.eigvalsh(A3).min()
    )
    C = math.sqrt(np.linalg.eigvalsh(J.T @ J).max())
    return OperatorInstance(
        dim=dim,
        mean_field=F,
        oracle=oracle,
        noise=noise,
        solution_set=SolutionSet.from_affine(J, b),
        declared=Constants(
            C=C, D=float(np.linalg.norm(b)), mu=float(mu), p=2.0, sigma_sq=sigma_sq
        ),
        family="switched_quadratic",
        params={"radius_switch": radius_switch, "c_outside": c_outside},
    )


def random_spd(dim: int, lam_min: float, lam_max: float, rng) -> np.ndarray:
    """Symmetric positive definite matrix with spectrum in [lam_min, lam_max].

    Eigenvalues are uniform on the interval with both endpoints forced, then
    conjugated by the orthogonal factor of a QR decomposition of a square
    Gaussian matrix.  Consumes rng in the order: eigenvalues, Gaussian matrix.
    """
    if not 0 < lam_min <= lam_max:
        raise ValueError("need 0 < lam_min <= lam_max")
    lam = rng.uniform(lam_min, lam_max, size=dim)
    lam[0] = lam_min
    if dim > 1:
        lam[1] = lam_max
    S = rng.normal(size=(dim, dim))
    Q, _ = np.linalg.qr(S)
    return Q @ np.diag(lam) @ Q.T


def make_random_switched_quadratic(
    m: int, s: int, mu_min: float, lam_max: float, rng
) -> OperatorInstance:
    """Seed-reproducible switched quadratic instance.

    A1 and A3 get spectra in [mu_min, lam_max]; A2 entries are Gaussian with
    variance 1/(m+s)^2, biases with variance 1/(m+s); the noise is iid
    Gaussian with per-coordinate variance 1/(m+s).  rng consumption order:
    A1, A3, A2, b1, b2.
    """
    A1 = random_spd(m, mu_min, lam_max, rng)
    A3 = random_spd(s, mu_min, lam_max, rng)
    A2 = rng.normal(0.0, 1.0 / (m + s), size=(m, s))
    b1 = rng.normal(0.0, 1.0 / math.sqrt(m + s), size=m)
    b2 = rng.normal(0.0, 1.0 / math.sqrt(m + s), size=s)
    noise = NoiseModel("gaussian", sigma_sq_per_coord=1.0 / (m + s))
    return make_switched_quadratic(A1, A3, A2, b1, b2, noise=noise)


# --- finite-sum min-max game


def make_finite_sum_game(
    n: int,
    m: int,
    s: int,
    mu_A: float,
    L_A: float,
    mu_C: float,
    L_C: float,
    sigma_B_sq: float,
    sigma_bias_sq: float,
    rng,
) -> OperatorInstance:
    """Finite-sum quadratic game operator F(u) = (1/n) sum_i (J_i u + b_i).

    Each A_i, C_i is a random SPD matrix with spectrum in [mu_A, L_A] (resp.
    [mu_C, L_C]); B_i and the bias vectors are Gaussian with the given
    variances.  The oracle draws a uniform component index per call.  rng
    consumption order per component: A_i, C_i, B_i, a_i, c_i.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 < mu_A <= L_A and 0 < mu_C <= L_C):
        raise ValueError("infeasible spectrum bounds")

    Js, bs = [], []
    A_blocks, C_blocks = [], []
    for _ in range(n):
        Ai = random_spd(m, mu_A, L_A, rng)
        Ci = random_spd(s, mu_C, L_C, rng)
        Bi = rng.normal(0.0, math.sqrt(sigma_B_sq), size=(m, s))
        ai = rng.normal(0.0, math.sqrt(sigma_bias_sq), size=m)
        ci = rng.normal(0.0, math.sqrt(sigma_bias_sq), size=s)
        Js.append(saddle_block_matrix(Ai, Bi, Ci))
        bs.append(np.concatenate([ai, ci]))
        A_blocks.append(Ai)
        C_blocks.append(Ci)

    J_stack = np.stack(Js)
    b_stack = np.stack(bs)
    J_mean = J_stack.mean(axis=0)
    b_mean = b_stack.mean(axis=0)
    dim = m + s

    def F(u):
        return J_mean @ u + b_mean

    def oracle(u, rng_):
        i = int(rng_.integers(n))
        return J_stack[i] @ u + b_stack[i]

    A_mean = sum(A_blocks) / n
    C_mean = sum(C_blocks) / n
    mu = min(np.linalg.eigvalsh(A_mean).min(), np.linalg.eigvalsh(C_mean).min())
    C = math.sqrt(np.linalg.eigvalsh(J_mean.T @ J_mean).max())
    op = OperatorInstance(
        dim=dim,
        mean_field=F,
        oracle=oracle,
        noise=NoiseModel("finite_sum", n=n),
        solution_set=SolutionSet.from_affine(J_mean, b_mean),
        declared=Constants(C=C, D=float(np.linalg.norm(b_mean)), mu=float(mu), p=2.0),
        family="finite_sum",
        params={"n": n, "m": m, "s": s},
    )
    op.params["components"] = (J_stack, b_stack)
    return op
