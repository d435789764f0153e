"""Infinite-frame density-evolution baseline for IRSA.

This is the classical fixed-point analysis for k, t -> infinity at fixed
load G; it serves as a comparison curve only.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import ConfigError
from .model import DegreeDistribution

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeConfig:
    G: float
    max_iters: int = 10_000
    tolerance: float = 1e-12

    def __post_init__(self):
        if not self.G > 0:
            raise ConfigError(f"G must be positive, got {self.G}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")


@dataclass(frozen=True)
class DeResult:
    plr: float
    x: float
    y: float
    iterations: int
    converged: bool


def _poly(coeffs, x):
    return sum(c * x**d for d, c in coeffs)


def density_evolution(dist: DegreeDistribution, de: DeConfig) -> DeResult:
    """Iterate x <- lambda(1 - exp(-G Lambda'(1) x)) from x = 1.

    ``x`` is the probability that a user-to-slot edge is still unknown,
    ``y`` the slot-to-user one; the unresolved-user probability is Lambda(y).
    """
    mean = float(dist.mean())
    if mean <= 0:
        raise ConfigError("Lambda'(1) must be positive")
    node = [(d, float(p)) for d, p in dist.probs.items() if p > 0]
    edge = [(d - 1, d * p / mean) for d, p in node]
    load = de.G * mean
    x = 1.0
    y = 1.0 - math.exp(-load * x)
    converged = False
    it = 0
    for it in range(1, de.max_iters + 1):
        y = 1.0 - math.exp(-load * x)
        x_new = min(1.0, max(0.0, _poly(edge, y)))
        delta = abs(x_new - x)
        x = x_new
        if delta < de.tolerance:
            converged = True
            break
    # x = 0 is a fixed point when no edge has degree 1; it is attracting when
    # lambda_2 * G * Lambda'(1) < 1, so an iterate below tolerance belongs to it
    lam1 = sum(c for d, c in edge if d == 0)
    lam2 = sum(c for d, c in edge if d == 1)
    if converged and x < de.tolerance and lam1 == 0 and lam2 * load < 1:
        x = 0.0
    y = 1.0 - math.exp(-load * x)
    if not converged:
        log.warning("density evolution did not converge in %d iterations (G=%s)", de.max_iters, de.G)
    return DeResult(_poly(node, y), x, y, it, converged)


def asymptotic_plr(dist: DegreeDistribution, de: DeConfig) -> float:
    """Asymptotic packet-loss rate Lambda(y) at the density-evolution fixed point."""
    return density_evolution(dist, de).plr
