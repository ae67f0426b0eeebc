"""Value-type behavior: deviation distributions and daily time allocation.

Each agent carries one of four value types (C, O, SE, ST). The type sets how
far the agent may stray from the social norms (delta), and how the mode of
its deviation distribution shifts: gamma skews cooperation by disposition,
phi skews shirking under a trusting or controlling management stance, and
rho skews cooperation in response to an active pay-for-performance scheme
(individual or group). Offsets combine additively and the mode is clamped
into the support.

The daily budget t_p + t_c + t_s = tau is enforced at allocation time.
Shirking and cooperation are drawn first; when the two draws overflow the
budget they are settled in random order: one claim is realized in full
(capped at tau), the other is cut to the remaining time, and individual
work gets nothing. Which claim settles first is a fair coin per agent-day
(an extra uniform draw). This "random_order" policy is the default; it is
what lets heavy shirkers squeeze out cooperation under monitoring and
eager cooperators squeeze out shirking under group bonuses, in the
observed proportions. Two alternatives are kept for comparison runs:
"shirk_first" (shirking always settles first) and "rescale" (both claims
shrink proportionally onto the budget).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .distributions import Triangular, make_triangular, sample

__all__ = [
    "ValueType",
    "ManagementStance",
    "BehaviorProfile",
    "TimeAllocation",
    "OVERFLOW_POLICIES",
    "profile_for",
    "deviation_bounds",
    "shirking_distribution",
    "cooperation_distribution",
    "allocate_time",
]


class ValueType(enum.IntEnum):
    """Four value types; integer values double as array indices."""

    C = 0   # conservation
    O = 1   # openness to change
    SE = 2  # self-enhancement
    ST = 3  # self-transcendence


class ManagementStance(enum.Enum):
    TRUSTING = "trusting"
    NEUTRAL = "neutral"
    CONTROLLING = "controlling"

    @property
    def sigma(self) -> float:
        return {"trusting": 0.0, "neutral": 0.5, "controlling": 1.0}[self.value]


# Per-type parameters, indexed by ValueType.
DELTA = np.array([1.0 / 3.0, 1.0, 2.0 / 3.0, 2.0 / 3.0])
GAMMA = np.array([0.0, 0.0, -0.5, 0.5])  # cooperativeness mode coefficient
# Autonomy coefficient: C-types slack off when trusted and comply when
# monitored; O-types do the reverse. SE/ST do not react to the stance.
PHI = {
    ManagementStance.TRUSTING: np.array([0.5, -0.5, 0.0, 0.0]),
    ManagementStance.NEUTRAL: np.zeros(4),
    ManagementStance.CONTROLLING: np.array([-0.5, 0.5, 0.0, 0.0]),
}
# Reward responsiveness, active only when a PFP scheme is on (mu=1); applied
# as rho * t_c* with no delta factor, unlike gamma and phi.
RHO_INDIVIDUAL = np.array([0.0, 0.0, -0.5, -0.1])  # lambda = 0
RHO_GROUP = np.array([0.0, 0.0, 0.1, 0.5])         # lambda = 1

OVERFLOW_POLICIES = ("random_order", "rescale", "shirk_first")


@dataclass(frozen=True)
class BehaviorProfile:
    """Per-type deviation parameters (one row of the agent-parameter table)."""

    value_type: ValueType
    delta: float
    gamma_coeff: float

    def phi_coeff(self, stance: ManagementStance) -> float:
        return float(PHI[stance][self.value_type])

    def rho_coeff(self, lam: int) -> float:
        table = RHO_GROUP if lam == 1 else RHO_INDIVIDUAL
        return float(table[self.value_type])


_PROFILES = {
    vt: BehaviorProfile(vt, float(DELTA[vt]), float(GAMMA[vt])) for vt in ValueType
}


def profile_for(value_type: ValueType) -> BehaviorProfile:
    return _PROFILES[ValueType(value_type)]


@dataclass(frozen=True)
class TimeAllocation:
    """One agent-day split of the budget: individual work, cooperation, shirking."""

    t_p: float
    t_c: float
    t_s: float


def deviation_bounds(norm: float, delta: float) -> Tuple[float, float]:
    """Support of the deviation distribution: [norm(1-delta), norm(1+delta)].

    delta=1 recovers the generic [0, 2*norm] support; a collapsed norm gives
    the degenerate point (0, 0).
    """
    return norm * (1.0 - delta), norm * (1.0 + delta)


def _clamp(x: float, lower: float, upper: float) -> float:
    return min(max(x, lower), upper)


def shirking_distribution(
    profile: BehaviorProfile, t_s_star: float, stance: ManagementStance
) -> Triangular:
    """Deviation distribution around the shirking norm under a management stance."""
    lower, upper = deviation_bounds(t_s_star, profile.delta)
    mode = t_s_star + profile.phi_coeff(stance) * t_s_star * profile.delta
    return make_triangular(lower, _clamp(mode, lower, upper), upper)


def cooperation_distribution(
    profile: BehaviorProfile, t_c_star: float, mu: int, lam: int
) -> Triangular:
    """Deviation distribution around the cooperation norm.

    Mode offset = gamma * t_c_star * delta (disposition) plus
    mu * rho * t_c_star (reward response), additive, then clamped into
    the support.
    """
    lower, upper = deviation_bounds(t_c_star, profile.delta)
    offset = profile.gamma_coeff * t_c_star * profile.delta
    if mu == 1:
        offset += profile.rho_coeff(lam) * t_c_star
    return make_triangular(lower, _clamp(t_c_star + offset, lower, upper), upper)


def allocate_time(
    profile: BehaviorProfile,
    norms: Tuple[float, float],
    stance: ManagementStance,
    mu: int,
    lam: int,
    draws: Tuple[float, float],
    tau: float = 10.0,
    overflow: str = "random_order",
) -> TimeAllocation:
    """One agent-day: sample shirking and cooperation, settle the budget.

    norms = (t_c_star, t_s_star); draws = (u_shirk, u_coop) or
    (u_shirk, u_coop, u_order), uniforms from the engine's seeded streams.
    Under the random_order policy the third uniform decides which claim
    settles first on overflow (< 0.5 means shirking); when it is absent the
    tie goes to shirking, which makes two-draw calls identical to the
    shirk_first policy. The result always satisfies t_p + t_c + t_s = tau
    with every component >= 0.
    """
    if overflow not in OVERFLOW_POLICIES:
        raise ValueError(f"unknown overflow policy {overflow!r}")
    t_c_star, t_s_star = norms
    u_shirk, u_coop = draws[0], draws[1]
    t_s = sample(shirking_distribution(profile, t_s_star, stance), u_shirk)
    t_c = sample(cooperation_distribution(profile, t_c_star, mu, lam), u_coop)
    total = t_s + t_c
    if total > tau:
        if overflow == "random_order":
            shirk_first = len(draws) < 3 or draws[2] < 0.5
        else:
            shirk_first = overflow == "shirk_first"
        if overflow == "rescale":
            scale = tau / total
            t_s = t_s * scale
            t_c = t_c * scale
        elif shirk_first:
            t_s = min(t_s, tau)
            t_c = tau - t_s
        else:
            t_c = min(t_c, tau)
            t_s = tau - t_c
        t_p = 0.0
    else:
        t_p = tau - total
    return TimeAllocation(t_p=t_p, t_c=t_c, t_s=t_s)
