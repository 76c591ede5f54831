"""Convex closed constraint sets with exact Euclidean projection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import DimensionMismatchError, as_vector

UNBOUNDED = math.inf


@dataclass(frozen=True)
class WholeSpace:
    dim: int

    def project(self, v):
        return as_vector(v, self.dim)

    def diameter(self):
        return UNBOUNDED

    def config_name(self):
        return "whole_space"


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", as_vector(self.lo))
        object.__setattr__(self, "hi", as_vector(self.hi, self.lo.size))
        if np.any(self.lo > self.hi):
            raise ValueError("box needs lo <= hi componentwise")

    @property
    def dim(self):
        return self.lo.size

    def project(self, v):
        return np.clip(as_vector(v, self.dim), self.lo, self.hi)

    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def config_name(self):
        return "box"


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if self.radius <= 0:
            raise ValueError("ball radius must be > 0")

    @property
    def dim(self):
        return self.center.size

    def project(self, v):
        v = as_vector(v, self.dim)
        d = v - self.center
        norm = np.linalg.norm(d)
        if norm <= self.radius:
            return v
        return self.center + (self.radius / norm) * d

    def diameter(self):
        return 2.0 * self.radius

    def config_name(self):
        return "ball"


def project(feasible_set, v):
    """Euclidean projection of v onto the set."""
    return feasible_set.project(v)


def diameter(feasible_set):
    """Exact diameter, or the unbounded marker (inf) for the whole space."""
    return feasible_set.diameter()


def from_config(spec: dict, dim: int):
    """Build a set from its config-schema description."""
    kind = spec.get("kind", "whole_space")
    if kind == "whole_space":
        return WholeSpace(dim)
    if kind == "box":
        return Box(np.asarray(spec["lo"], float), np.asarray(spec["hi"], float))
    if kind == "ball":
        center = spec.get("center", np.zeros(dim))
        return Ball(np.asarray(center, float), float(spec["radius"]))
    raise ValueError(f"unknown feasible set kind {kind!r}")


__all__ = [
    "WholeSpace",
    "Box",
    "Ball",
    "project",
    "diameter",
    "from_config",
    "UNBOUNDED",
    "DimensionMismatchError",
]
