"""Triangular distribution: density, inverse-CDF sampling, and moments.

This is the sole stochastic primitive of the model. Every behavioral draw
(daily shirking and cooperation time) comes from a triangular distribution
whose bounds and mode are set by the agent's value type and the current
social norms. Sampling uses the closed-form inverse CDF so that exactly one
uniform draw maps to one behavioral decision; that keeps replicate streams
reproducible and makes the draw count per step deterministic.

Degenerate distributions (a = c = b) are permitted and return the point mass
from sample(); they arise naturally when a norm collapses to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Triangular",
    "make_triangular",
    "pdf",
    "sample",
    "mean",
    "sample_array",
]


@dataclass(frozen=True)
class Triangular:
    """Validated triangular distribution on [a, b] with mode c (all in hours)."""

    a: float
    c: float
    b: float

    def __post_init__(self) -> None:
        if self.a < 0:
            raise ValueError(f"lower bound a={self.a} must be >= 0 (time cannot be negative)")
        if not self.a <= self.c:
            raise ValueError(f"mode c={self.c} must be >= lower bound a={self.a}")
        if not self.c <= self.b:
            raise ValueError(f"upper bound b={self.b} must be >= mode c={self.c}")

    @property
    def degenerate(self) -> bool:
        return self.a == self.b


def make_triangular(a: float, c: float, b: float) -> Triangular:
    """Build a validated distribution; raises ValueError naming the offending parameter."""
    return Triangular(float(a), float(c), float(b))


def pdf(d: Triangular, x: float) -> float:
    """Piecewise triangular density; 0 outside [a, b].

    For a degenerate distribution the density is 0 for x != a; the point mass
    is the sampler's job, not the pdf's.
    """
    if d.degenerate:
        return math.inf if x == d.a else 0.0
    if x < d.a or x > d.b:
        return 0.0
    if x == d.c:
        return 2.0 / (d.b - d.a)
    if x < d.c:
        # a <= x < c implies c > a, so the denominator is nonzero
        return 2.0 * (x - d.a) / ((d.b - d.a) * (d.c - d.a))
    # c < x <= b implies b > c
    return 2.0 * (d.b - x) / ((d.b - d.a) * (d.b - d.c))


def sample(d: Triangular, u: float) -> float:
    """Inverse-CDF transform of one uniform draw u in [0, 1]; result in [a, b].

    The branch results are clamped to the support: when the mode sits on a
    bound, sqrt(span * span) can overshoot span by one ulp.
    """
    if d.degenerate:
        return d.a
    span = d.b - d.a
    threshold = (d.c - d.a) / span
    if u < threshold:
        return min(d.b, d.a + math.sqrt(u * span * (d.c - d.a)))
    return max(d.a, d.b - math.sqrt((1.0 - u) * span * (d.b - d.c)))


def mean(d: Triangular) -> float:
    """E[x] = (a + b + c) / 3."""
    return (d.a + d.b + d.c) / 3.0


def sample_array(
    u: np.ndarray, a: np.ndarray, c: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """Vectorized inverse-CDF sampling, element-wise over aligned arrays.

    Mirrors sample() exactly (same operations, same float semantics) so the
    engine's vectorized path and the scalar contract agree bit-for-bit.
    Degenerate entries (a == b) return a.
    """
    span = b - a
    left = c - a
    right = b - c
    safe_span = np.where(span > 0.0, span, 1.0)  # avoids 0/0; masked out below
    threshold = left / safe_span
    low = np.minimum(b, a + np.sqrt(u * span * left))
    high = np.maximum(a, b - np.sqrt((1.0 - u) * span * right))
    out = np.where(u < threshold, low, high)
    return np.where(span > 0.0, out, a)
