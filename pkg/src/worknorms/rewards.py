"""Bonuses, rewards, and cumulative labor cost under the remuneration regimes.

Every agent earns a base wage omega_b = w * tau per day. With an active
pay-for-performance scheme (mu=1) a bonus is added on top: lambda=0 pays the
agent's own output (competitive), lambda=1 pays the group's mean output
(cooperative); intermediate lambda is out of scope. Output units map 1:1 to
currency in bonuses; there is no conversion coefficient, which is what sets
the scale of the cost comparisons between scenarios.

Rewards are computed and logged every step even in mu=0 runs so that cost
comparisons need no special-casing: a flat-wage run of 100 agents over 500
steps costs exactly 500_000.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "RewardParams",
    "bonus",
    "bonus_array",
    "reward",
    "cumulative_labor_cost",
]


@dataclass(frozen=True)
class RewardParams:
    """Wage and scheme switches; omega_b is the daily base wage w * tau."""

    w: float = 1.0
    tau: float = 10.0
    mu: int = 0
    lam: int = 0

    def __post_init__(self) -> None:
        if self.mu not in (0, 1):
            raise ValueError(f"mu={self.mu} must be 0 or 1")
        if self.lam not in (0, 1):
            raise ValueError(f"lam={self.lam} must be 0 or 1")

    @property
    def omega_b(self) -> float:
        return self.w * self.tau


def bonus(outputs: Sequence[float], i: int, lam: int) -> float:
    """B_i = (1 - lam) * O_i + lam * mean(O); the mean includes agent i."""
    arr = np.asarray(outputs, dtype=float)
    if arr.size == 0:
        raise ValueError("bonus needs a non-empty output vector")
    return float((1.0 - lam) * arr[i] + lam * arr.mean())


def bonus_array(outputs: np.ndarray, lam: int) -> np.ndarray:
    """Vectorized bonuses for the whole population."""
    return (1.0 - lam) * outputs + lam * outputs.mean()


def reward(params: RewardParams, bonus_i: Union[float, np.ndarray]):
    """R_i = omega_b + mu * B_i."""
    return params.omega_b + params.mu * bonus_i


def cumulative_labor_cost(per_step_rewards: Union[np.ndarray, Sequence[float]]) -> float:
    """Total rewards over a complete run: sum over steps of summed agent rewards.

    Accepts either a (steps,) series of per-step totals or a (steps, N)
    matrix of individual rewards.
    """
    return float(np.asarray(per_step_rewards, dtype=float).sum())
