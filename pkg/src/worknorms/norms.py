"""Descriptive norms for cooperation and shirking, under three environments.

A norm pair (t_c_star, t_s_star) is a belief about typical behavior, updated
once per step as a weighted average of the previous norm and the observed
mean behavior: new = (1 - h) * prev + h * mean. h=0 freezes norms, h=1 makes
them fully adaptive. Three observation scopes:

  Global:     one shared pair, updated from the whole population's mean.
  Neighbours: a pair per agent, updated from its 8 Moore neighbours on a
              toroidal grid.
  Random:     a pair per agent, updated from n freshly sampled peers
              (without replacement, self excluded) each step.

The budget t_c_star + t_s_star <= tau is deliberately NOT enforced here:
norms are beliefs, and the budget is settled at allocation time.

The source appendix prints the local updates as
t* = (sum_j h * t_j - t*_prev) / M, which drives norms negative for small h
and contradicts the claim that local environments converge to the global
outcome; it is treated as a typo. The weighted-average form is the default;
formula="literal" exposes the printed form for inspection only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from .behavior import TimeAllocation

__all__ = [
    "NormState",
    "GridTopology",
    "make_grid",
    "blend",
    "peer_mean",
    "update_global",
    "update_neighbours",
    "update_random",
    "sample_peer_matrix",
]

NormValue = Union[float, np.ndarray]


@dataclass
class NormState:
    """A cooperation/shirking norm pair; floats (global) or per-agent arrays."""

    t_c_star: NormValue
    t_s_star: NormValue


@dataclass
class GridTopology:
    """Toroidal grid with precomputed Moore-range-1 neighbour indices."""

    width: int
    height: int
    wrap: bool = True
    neighbours: np.ndarray = field(init=False)  # (n_agents, 8) int indices

    def __post_init__(self) -> None:
        if not self.wrap:
            raise ValueError("only toroidal grids are supported (wrap=True)")
        if self.width < 3 or self.height < 3:
            raise ValueError(
                f"grid {self.width}x{self.height} too small: Moore-8 needs both sides >= 3"
            )
        rows, cols = np.divmod(np.arange(self.width * self.height), self.width)
        offsets = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]
        stacked = [
            ((rows + dr) % self.height) * self.width + ((cols + dc) % self.width)
            for dr, dc in offsets
        ]
        self.neighbours = np.stack(stacked, axis=1)

    @property
    def n_agents(self) -> int:
        return self.width * self.height


def make_grid(n_agents: int) -> GridTopology:
    """Most-square torus factorization of n_agents; errors if none has sides >= 3."""
    for height in range(int(np.sqrt(n_agents)), 0, -1):
        if n_agents % height == 0:
            width = n_agents // height
            if height >= 3 and width >= 3:
                return GridTopology(width=width, height=height)
            break
    raise ValueError(f"no {n_agents}-agent grid with both sides >= 3 exists")


def blend(prev: NormValue, observed: NormValue, h: float) -> NormValue:
    """Weighted-average norm update; the single formula all environments share."""
    return (1.0 - h) * prev + h * observed


def peer_mean(values: np.ndarray, peers: np.ndarray) -> np.ndarray:
    """Per-agent mean of values over each row's peer indices."""
    return values[peers].mean(axis=1)


def _as_arrays(behaviors: Sequence[TimeAllocation]) -> Tuple[np.ndarray, np.ndarray]:
    if len(behaviors) == 0:
        raise ValueError("cannot update norms from an empty population")
    coop = np.array([b.t_c for b in behaviors])
    shirk = np.array([b.t_s for b in behaviors])
    return coop, shirk


def _local_update(
    prev: NormState,
    coop: np.ndarray,
    shirk: np.ndarray,
    peers: np.ndarray,
    h: float,
    formula: str,
) -> NormState:
    coop_seen = peer_mean(coop, peers)
    shirk_seen = peer_mean(shirk, peers)
    if formula == "weighted":
        return NormState(
            t_c_star=blend(prev.t_c_star, coop_seen, h),
            t_s_star=blend(prev.t_s_star, shirk_seen, h),
        )
    if formula == "literal":
        # Printed appendix form, kept only for inspection; see module docstring.
        m = peers.shape[1]
        return NormState(
            t_c_star=(h * coop[peers].sum(axis=1) - prev.t_c_star) / m,
            t_s_star=(h * shirk[peers].sum(axis=1) - prev.t_s_star) / m,
        )
    raise ValueError(f"unknown norm formula {formula!r}")


def update_global(
    prev: NormState, behaviors: Sequence[TimeAllocation], h: float
) -> NormState:
    """Shared-pair update from the whole population's mean behavior."""
    coop, shirk = _as_arrays(behaviors)
    return NormState(
        t_c_star=blend(prev.t_c_star, float(coop.mean()), h),
        t_s_star=blend(prev.t_s_star, float(shirk.mean()), h),
    )


def update_neighbours(
    prev: NormState,
    behaviors: Sequence[TimeAllocation],
    topology: GridTopology,
    h: float,
    formula: str = "weighted",
) -> NormState:
    """Per-agent update from the 8 Moore neighbours' previous-step behaviors."""
    coop, shirk = _as_arrays(behaviors)
    if len(behaviors) != topology.n_agents:
        raise ValueError(
            f"{len(behaviors)} behaviors for a {topology.width}x{topology.height} grid"
        )
    return _local_update(prev, coop, shirk, topology.neighbours, h, formula)


def update_random(
    prev: NormState,
    behaviors: Sequence[TimeAllocation],
    peer_draws: np.ndarray,
    h: float,
    formula: str = "weighted",
) -> NormState:
    """Per-agent update from sampled peers (indices in peer_draws, one row per agent)."""
    coop, shirk = _as_arrays(behaviors)
    if peer_draws.shape[1] >= len(behaviors):
        raise ValueError(
            f"{peer_draws.shape[1]} peers requested from a population of {len(behaviors)}"
        )
    return _local_update(prev, coop, shirk, peer_draws, h, formula)


def sample_peer_matrix(rng: np.random.Generator, n_agents: int, n_peers: int) -> np.ndarray:
    """Fresh peer sample: n_peers distinct non-self indices per agent.

    Ranks one uniform score per (agent, candidate) pair, so any subset is
    equally likely; consumes exactly n_agents*n_agents draws from rng.
    """
    if n_peers >= n_agents:
        raise ValueError(f"cannot sample {n_peers} distinct peers from {n_agents} agents")
    scores = rng.random((n_agents, n_agents))
    np.fill_diagonal(scores, 2.0)  # self is never the smallest score
    return np.argpartition(scores, n_peers, axis=1)[:, :n_peers]
