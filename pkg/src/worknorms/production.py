"""Cobb-Douglas output from time allocations and the group's cooperation.

An agent's output combines its own individual work time with the mean
cooperation time of everyone else: O_i = t_ip^(1-kappa) * mean_coop_i^kappa.
kappa is task interdependence; 0 makes output purely individual, 1 makes it
purely a function of co-workers' cooperation. The power conventions
0^0 = 1 and 0^positive = 0 keep the kappa in {0, 1} sweeps well-defined
without special-casing callers (numpy already follows both).

The optimal group output (OGO) is the per-agent output a group would reach
with zero shirking and the kappa-optimal split of the day; the %OGO metric
is the group mean output expressed as a percentage of it.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from .behavior import TimeAllocation

__all__ = [
    "mean_coop_others",
    "mean_coop_others_array",
    "output",
    "optimal_group_output",
    "pct_ogo",
]

ArrayOrFloat = Union[float, np.ndarray]


def mean_coop_others(allocations: Sequence[TimeAllocation], i: int) -> float:
    """Mean cooperation time of all agents except i."""
    n = len(allocations)
    if n < 2:
        raise ValueError("mean cooperation of others needs at least 2 agents")
    total = sum(a.t_c for a in allocations)
    return (total - allocations[i].t_c) / (n - 1)


def mean_coop_others_array(coop: np.ndarray) -> np.ndarray:
    """Vectorized self-excluded mean: (sum - t_c_i) / (N - 1), one shared sum."""
    n = coop.shape[0]
    if n < 2:
        raise ValueError("mean cooperation of others needs at least 2 agents")
    return (coop.sum() - coop) / (n - 1)


def output(t_p: ArrayOrFloat, mean_coop: ArrayOrFloat, kappa: float) -> ArrayOrFloat:
    """O = t_p^(1-kappa) * mean_coop^kappa with the 0^0 = 1 convention."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa={kappa} outside [0, 1]")
    return t_p ** (1.0 - kappa) * mean_coop**kappa


def optimal_group_output(tau: float, kappa: float) -> float:
    """(tau*(1-kappa))^(1-kappa) * (tau*kappa)^kappa, same power conventions."""
    if tau <= 0:
        raise ValueError(f"tau={tau} must be positive")
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa={kappa} outside [0, 1]")
    return (tau * (1.0 - kappa)) ** (1.0 - kappa) * (tau * kappa) ** kappa


def pct_ogo(mean_output: ArrayOrFloat, tau: float, kappa: float) -> ArrayOrFloat:
    """Group mean output as a percentage of the optimal group output."""
    return mean_output / optimal_group_output(tau, kappa) * 100.0
