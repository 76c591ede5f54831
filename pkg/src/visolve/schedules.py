"""Stepsize rules, including the switching (constant-then-harmonic) family.

The switching rule keeps alpha_k = 1/d until the threshold k0 (default
ceil(K/2)) and then decays harmonically as 2/(a*(2d/a + k - k0)).  When the
horizon is short (K <= d/a) the rule stays constant at 1/d throughout.  The
two branches agree exactly at the switch: 2/(a*(2d/a)) = 1/d.

The Popov half-step at the final iteration needs alpha_{K+1}; the active
branch formula is extended past K for that purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .operators import UnavailableConstantError


@dataclass(frozen=True)
class Constant:
    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")

    def stepsize(self, k: int) -> float:
        if k < 0:
            raise ValueError("iteration index must be >= 0")
        return self.alpha


@dataclass(frozen=True)
class DiminishingHarmonic:
    """alpha_k = scale * 2 / (mu * (offset + k)).

    With offset >= 1 the sequence is non-summable but square-summable, as the
    almost-sure convergence analysis requires.
    """

    mu: float
    offset: int = 3
    scale: float = 1.0

    def __post_init__(self):
        if self.mu <= 0 or self.scale <= 0 or self.offset < 0:
            raise ValueError("need mu > 0, scale > 0, offset >= 0")

    def stepsize(self, k: int) -> float:
        if k < 0:
            raise ValueError("iteration index must be >= 0")
        return self.scale * 2.0 / (self.mu * (self.offset + k))


@dataclass(frozen=True)
class Switching:
    a: float
    d: float
    K: int
    k0: int = -1  # sentinel: default to ceil(K/2)

    def __post_init__(self):
        if self.a <= 0 or self.d <= 0:
            raise ValueError("need a > 0 and d > 0")
        if self.K < 1:
            raise ValueError("horizon K must be >= 1")
        if self.k0 < 0:
            object.__setattr__(self, "k0", math.ceil(self.K / 2))

    def stepsize(self, k: int) -> float:
        if k < 0:
            raise ValueError("iteration index must be >= 0")
        if self.K <= self.d / self.a or k < self.k0:
            return 1.0 / self.d
        return 2.0 / (self.a * (2.0 * self.d / self.a + k - self.k0))


def stepsize(sched, k: int) -> float:
    return sched.stepsize(k)


THEOREM_PRESETS = ("thm2", "thm3", "thm4", "thm5a", "thm5b", "proj-baseline")


def preset(theorem: str, constants, K: int, k0: int = -1):
    """Schedule prescribed by the named convergence theorem.

    ``constants`` is an operators.Constants (or any object with the same
    attributes) carrying the values the theorem references.  ``k0``
    overrides the switching threshold (default ceil(K/2)).

    "proj-baseline" is the projection-method baseline: constant cap
    alpha_k <= mu / C^2 realized as a switching rule with a = mu and
    d = C^2 / mu.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if theorem == "thm2":
        (mu,) = constants.require("mu")
        return DiminishingHarmonic(mu=mu, offset=3)
    if theorem == "thm3":
        mu, C = constants.require("mu", "C")
        d = 1.0 / min(mu / (288.0 * C * C), 4.0 / (9.0 * mu))
        return Switching(a=mu / 2.0, d=d, K=K, k0=k0)
    if theorem == "thm4":
        (mu,) = constants.require("mu")
        # Lipschitz constant; the growth slope C is the natural surrogate for
        # the piecewise-linear operators when L is not declared.
        L = constants.L if constants.L is not None else constants.C
        if L is None:
            raise UnavailableConstantError("constant 'L' (or 'C') not declared")
        return Switching(a=mu, d=max(2.0 * math.sqrt(3.0) * L, mu), K=K, k0=k0)
    if theorem == "thm5a":
        mu, M_U, p = constants.require("mu", "M_U", "p")
        return DiminishingHarmonic(mu=mu, offset=3, scale=M_U ** (2.0 - p))
    if theorem == "thm5b":
        mu, M_U, p = constants.require("mu", "M_U", "p")
        scale = M_U ** (2.0 - p)
        return Switching(a=mu / scale, d=2.0 * mu / scale, K=K, k0=k0)
    if theorem == "proj-baseline":
        mu, C = constants.require("mu", "C")
        return Switching(a=mu, d=C * C / mu, K=K, k0=k0)
    raise ValueError(f"unknown theorem preset {theorem!r}")
