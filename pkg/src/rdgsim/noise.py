"""Gaussian angle distributions, discrimination-game instances, and seeded RNG.

The two hypotheses of a rotation discrimination game are Normal(mu_b,
sigma^2) distributions sharing one sigma. Closed-form error expressions
rely on the exact Gaussian trigonometric moments provided here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for a (seed, key...) stream.

    Identical arguments reproduce the stream bit-exactly on any platform;
    distinct keys (e.g. grid cell indices) give independent streams, so
    parallel schedules cannot change results.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class AngleDistribution:
    """Normal(mu, sigma^2) over rotation angles, in radians."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError("mu and sigma must be finite")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


@dataclass(frozen=True)
class RdgInstance:
    """Two angle distributions sharing sigma; the discrimination game."""

    dist0: AngleDistribution
    dist1: AngleDistribution

    def __post_init__(self):
        if self.dist0.sigma != self.dist1.sigma:
            raise ValueError("both hypotheses must share sigma")

    @classmethod
    def from_delta_sigma(cls, delta: float, sigma: float) -> "RdgInstance":
        """Canonical parameterization: mu_0 = 0, mu_1 = delta."""
        return cls(AngleDistribution(0.0, sigma), AngleDistribution(delta, sigma))

    @property
    def delta(self) -> float:
        return abs(self.dist0.mu - self.dist1.mu)

    @property
    def sigma(self) -> float:
        return self.dist0.sigma

    def swapped(self) -> "RdgInstance":
        return RdgInstance(self.dist1, self.dist0)


def sample_angle(d: AngleDistribution, rng: np.random.Generator, size=None):
    """Draw from Normal(mu, sigma^2); returns mu exactly when sigma == 0."""
    if size is None:
        return d.mu + d.sigma * rng.standard_normal()
    return d.mu + d.sigma * rng.standard_normal(size)


def cos2_moment(d: AngleDistribution) -> float:
    """E[cos 2*theta] = cos(2 mu) * exp(-2 sigma^2)."""
    return math.cos(2 * d.mu) * math.exp(-2 * d.sigma**2)


def sin2_moment(d: AngleDistribution) -> float:
    """E[sin 2*theta] = sin(2 mu) * exp(-2 sigma^2)."""
    return math.sin(2 * d.mu) * math.exp(-2 * d.sigma**2)
