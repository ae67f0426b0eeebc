"""Discrete-time simulation engine: step loop, scenario matrix, replicates.

One step is one working day. In order: (1) every agent samples a time
allocation from its deviation distributions around the current norms,
(2) outputs are computed, (3) bonuses and rewards are paid, (4) norms are
updated from this step's realized behaviors (they take effect next step,
matching the previous-day indexing of the norm equations), (5) a metrics
row is recorded. The feedback loop that drives every scenario is
behavior -> norm -> next day's distributions.

Randomness is split into four spawned streams per run: type placement,
behavior draws, budget-settlement order, and peer sampling. The behavior
stream consumes exactly two uniforms per agent per step in agent-id order,
and the order stream exactly one, in every environment; the Random
environment's peer draws come from their own stream. Runs that differ only
in the norm environment therefore see identical behavior and order draws
for the same seed (a common-random-numbers design, which is what makes the
environment comparison sharp).

Replicate seeds are base_seed + replicate index (additive, not hashed), and
the scenario matrix reuses the same replicate seeds for every cell; both
choices are recorded in run manifests for reproducibility audits.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .behavior import (
    DELTA,
    GAMMA,
    OVERFLOW_POLICIES,
    PHI,
    RHO_GROUP,
    RHO_INDIVIDUAL,
    ManagementStance,
)
from .distributions import sample_array
from .norms import GridTopology, blend, make_grid, peer_mean, sample_peer_matrix
from .production import mean_coop_others_array, optimal_group_output
from .rewards import RewardParams, bonus_array, reward

__all__ = [
    "ENVIRONMENTS",
    "SCENARIOS",
    "TYPE_NAMES",
    "DiagnosticError",
    "ScenarioConfig",
    "ModelParams",
    "MetricsSeries",
    "ModelState",
    "ReplicateResult",
    "scenario",
    "type_quotas",
    "init_model",
    "step",
    "run_single",
    "run_replicates",
    "run_matrix",
    "average_series",
]

ENVIRONMENTS = ("global", "neighbours", "random")

TYPE_NAMES = ("C", "O", "SE", "ST")


class DiagnosticError(RuntimeError):
    """A per-step sanity invariant (budget conservation, output bound) failed."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One cell of the stance x reward-scheme grid, plus the norm environment."""

    name: str
    stance: ManagementStance
    mu: int
    lam: int
    environment: str = "global"

    def __post_init__(self) -> None:
        if self.mu not in (0, 1):
            raise ValueError(f"mu={self.mu} must be 0 or 1")
        if self.lam not in (0, 1):
            raise ValueError(f"lam={self.lam} must be 0 or 1")
        if self.mu == 0 and self.lam != 0:
            # lam is irrelevant without a PFP scheme; normalize for hashing
            object.__setattr__(self, "lam", 0)
        if self.environment not in ENVIRONMENTS:
            raise ValueError(
                f"unknown environment {self.environment!r}; expected one of {ENVIRONMENTS}"
            )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "stance": self.stance.value,
            "mu": self.mu,
            "lambda": self.lam,
            "environment": self.environment,
        }


def _grid() -> Dict[str, ScenarioConfig]:
    t, n, c = ManagementStance.TRUSTING, ManagementStance.NEUTRAL, ManagementStance.CONTROLLING
    rows = [
        ("base", n, 0, 0),
        ("trusting", t, 0, 0),
        ("controlling", c, 0, 0),
        ("cooperative", n, 1, 1),
        ("trustcoop", t, 1, 1),
        ("contrcoop", c, 1, 1),
        ("competitive", n, 1, 0),
        ("trustcomp", t, 1, 0),
        ("contrcomp", c, 1, 0),
    ]
    return {name: ScenarioConfig(name, stance, mu, lam) for name, stance, mu, lam in rows}


SCENARIOS: Dict[str, ScenarioConfig] = _grid()


def scenario(name: str, environment: str = "global") -> ScenarioConfig:
    """Look up one of the nine named scenarios, bound to a norm environment."""
    key = name.lower()
    if key not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; expected one of {tuple(SCENARIOS)}")
    return dataclasses.replace(SCENARIOS[key], environment=environment.lower())


@dataclass(frozen=True)
class ModelParams:
    """Model-level parameters; defaults are the reference configuration."""

    numagents: int = 100
    steps: int = 500
    numpeers: int = 8
    dist: Tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    kappa: float = 0.5
    tau: float = 10.0
    w: float = 1.0
    h: float = 0.1
    seed: int = 42
    overflow: str = "random_order"
    norm_formula: str = "weighted"
    zero_offsets: bool = False  # diagnostic: force gamma = phi = rho = 0

    def __post_init__(self) -> None:
        if self.numagents < 2:
            raise ValueError("numagents must be >= 2")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 1 <= self.numpeers < self.numagents:
            raise ValueError("numpeers must be in [1, numagents)")
        if len(self.dist) != 4 or any(p < 0 for p in self.dist):
            raise ValueError("dist must be four non-negative shares")
        if abs(sum(self.dist) - 1.0) > 1e-9:
            raise ValueError(f"dist must sum to 1 (got {sum(self.dist)})")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must be in [0, 1]")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.w < 0:
            raise ValueError("w must be non-negative")
        if not 0.0 <= self.h <= 1.0:
            raise ValueError("h must be in [0, 1]")
        if self.overflow not in OVERFLOW_POLICIES:
            raise ValueError(f"overflow must be one of {OVERFLOW_POLICIES}")
        if self.norm_formula not in ("weighted", "literal"):
            raise ValueError("norm_formula must be 'weighted' or 'literal'")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["dist"] = list(self.dist)
        return d


@dataclass
class MetricsSeries:
    """One row per step; per-type columns are indexed C, O, SE, ST.

    Per-type means are nan for types with no members under the configured
    dist. Norm columns record the norms agents acted on (the pre-update
    values; population means in the local environments), and the deviation
    variances are population variances of behavior minus the agent's own
    applicable norm.
    """

    steps: int
    mean_t_p: np.ndarray = field(init=False)        # (steps, 4)
    mean_t_c: np.ndarray = field(init=False)        # (steps, 4)
    mean_t_s: np.ndarray = field(init=False)        # (steps, 4)
    mean_output_type: np.ndarray = field(init=False)  # (steps, 4)
    mean_output: np.ndarray = field(init=False)     # (steps,)
    pct_ogo: np.ndarray = field(init=False)         # (steps,)
    norm_coop: np.ndarray = field(init=False)       # (steps,)
    norm_shirk: np.ndarray = field(init=False)      # (steps,)
    dev_var_coop: np.ndarray = field(init=False)    # (steps,)
    dev_var_shirk: np.ndarray = field(init=False)   # (steps,)
    total_reward: np.ndarray = field(init=False)    # (steps,)
    clamp_count: np.ndarray = field(init=False)     # (steps,) mode-clamp events
    scenario: Optional[ScenarioConfig] = None
    params: Optional[ModelParams] = None
    seed: Optional[int] = None
    n_replicates: int = 1

    _ARRAY_FIELDS = (
        "mean_t_p",
        "mean_t_c",
        "mean_t_s",
        "mean_output_type",
        "mean_output",
        "pct_ogo",
        "norm_coop",
        "norm_shirk",
        "dev_var_coop",
        "dev_var_shirk",
        "total_reward",
        "clamp_count",
    )

    def __post_init__(self) -> None:
        s = self.steps
        for name in ("mean_t_p", "mean_t_c", "mean_t_s", "mean_output_type"):
            setattr(self, name, np.empty((s, 4)))
        for name in self._ARRAY_FIELDS[4:]:
            setattr(self, name, np.empty(s))

    @property
    def aggregate_output(self) -> float:
        """Y: sum over steps of the group's mean output."""
        return float(self.mean_output.sum())


def average_series(series: Sequence[MetricsSeries]) -> MetricsSeries:
    """Element-wise mean of replicate series (nan columns stay nan)."""
    if not series:
        raise ValueError("nothing to average")
    out = MetricsSeries(series[0].steps)
    for name in MetricsSeries._ARRAY_FIELDS:
        setattr(out, name, np.mean([getattr(s, name) for s in series], axis=0))
    out.scenario = series[0].scenario
    out.params = series[0].params
    out.seed = None
    out.n_replicates = sum(s.n_replicates for s in series)
    return out


def type_quotas(dist: Sequence[float], n: int) -> np.ndarray:
    """Largest-remainder rounding of dist * n; ties go to the lower type index."""
    quotas = np.asarray(dist, dtype=float) * n
    counts = np.floor(quotas).astype(int)
    remainder = quotas - counts
    missing = n - counts.sum()
    # stable sort: equal remainders keep ascending type order
    order = np.argsort(-remainder, kind="stable")
    counts[order[:missing]] += 1
    return counts


@dataclass
class ModelState:
    """Everything one run owns: agents, norms, RNG streams, metrics buffer."""

    config: ScenarioConfig
    params: ModelParams
    seed: int
    types: np.ndarray                 # (N,) ValueType codes
    type_counts: np.ndarray           # (4,)
    delta: np.ndarray                 # (N,)
    shirk_coeff: np.ndarray           # (N,) phi * delta
    coop_coeff: np.ndarray            # (N,) gamma * delta + mu * rho
    norm_coop: object                 # float (global) or (N,) array (local)
    norm_shirk: object
    topology: Optional[GridTopology]
    rng_behavior: np.random.Generator
    rng_order: np.random.Generator
    rng_peers: np.random.Generator
    metrics: MetricsSeries
    reward_params: RewardParams = field(default_factory=RewardParams)
    ogo: float = 0.0                  # optimal group output, cached
    step_index: int = 0
    # last-step realized behavior, for inspection and tests
    t_p: Optional[np.ndarray] = None
    t_c: Optional[np.ndarray] = None
    t_s: Optional[np.ndarray] = None
    outputs: Optional[np.ndarray] = None
    rewards: Optional[np.ndarray] = None


def init_model(
    config: ScenarioConfig, params: ModelParams, replicate_seed: Optional[int] = None
) -> ModelState:
    """Build a run: typed agents (largest-remainder quotas, seeded shuffle),
    norms at tau/3, grid layout for the Neighbours environment."""
    seed = params.seed if replicate_seed is None else replicate_seed
    ss = np.random.SeedSequence(seed)
    types_ss, behavior_ss, order_ss, peers_ss = ss.spawn(4)

    n = params.numagents
    counts = type_quotas(params.dist, n)
    ordered = np.repeat(np.arange(4), counts)
    rng_types = np.random.default_rng(types_ss)
    types = ordered[rng_types.permutation(n)]

    delta = DELTA[types]
    if params.zero_offsets:
        shirk_coeff = np.zeros(n)
        coop_coeff = np.zeros(n)
    else:
        shirk_coeff = PHI[config.stance][types] * delta
        rho = (RHO_GROUP if config.lam == 1 else RHO_INDIVIDUAL)[types]
        coop_coeff = GAMMA[types] * delta + config.mu * rho

    init = params.tau / 3.0
    if config.environment == "global":
        norm_coop: object = init
        norm_shirk: object = init
        topology = None
    else:
        norm_coop = np.full(n, init)
        norm_shirk = np.full(n, init)
        topology = make_grid(n) if config.environment == "neighbours" else None

    metrics = MetricsSeries(params.steps)
    metrics.scenario = config
    metrics.params = params
    metrics.seed = seed

    return ModelState(
        config=config,
        params=params,
        seed=seed,
        types=types,
        type_counts=counts,
        delta=delta,
        shirk_coeff=shirk_coeff,
        coop_coeff=coop_coeff,
        norm_coop=norm_coop,
        norm_shirk=norm_shirk,
        topology=topology,
        rng_behavior=np.random.default_rng(behavior_ss),
        rng_order=np.random.default_rng(order_ss),
        rng_peers=np.random.default_rng(peers_ss),
        metrics=metrics,
        reward_params=RewardParams(w=params.w, tau=params.tau, mu=config.mu, lam=config.lam),
        ogo=optimal_group_output(params.tau, params.kappa),
    )


def _type_means(values: np.ndarray, types: np.ndarray, counts: np.ndarray) -> np.ndarray:
    sums = np.bincount(types, weights=values, minlength=4)
    with np.errstate(invalid="ignore"):
        means = sums / counts
    return np.where(counts > 0, means, np.nan)


def step(state: ModelState) -> ModelState:
    """Advance one working day; appends one metrics row."""
    p = state.params
    cfg = state.config
    n = p.numagents
    tau = p.tau

    # === 1. behavior: two uniforms per agent in id order, then allocate ===
    u = state.rng_behavior.random((n, 2))
    norm_s = state.norm_shirk
    norm_c = state.norm_coop

    lo_s = norm_s * (1.0 - state.delta)
    hi_s = norm_s * (1.0 + state.delta)
    mode_s_raw = norm_s * (1.0 + state.shirk_coeff)
    mode_s = np.clip(mode_s_raw, lo_s, hi_s)

    lo_c = norm_c * (1.0 - state.delta)
    hi_c = norm_c * (1.0 + state.delta)
    mode_c_raw = norm_c * (1.0 + state.coop_coeff)
    mode_c = np.clip(mode_c_raw, lo_c, hi_c)

    clamps = int(
        np.count_nonzero((mode_s_raw < lo_s) | (mode_s_raw > hi_s))
        + np.count_nonzero((mode_c_raw < lo_c) | (mode_c_raw > hi_c))
    )

    shape = (n,)
    t_s = sample_array(
        u[:, 0],
        np.broadcast_to(np.asarray(lo_s, dtype=float), shape),
        np.broadcast_to(np.asarray(mode_s, dtype=float), shape),
        np.broadcast_to(np.asarray(hi_s, dtype=float), shape),
    )
    t_c = sample_array(
        u[:, 1],
        np.broadcast_to(np.asarray(lo_c, dtype=float), shape),
        np.broadcast_to(np.asarray(mode_c, dtype=float), shape),
        np.broadcast_to(np.asarray(hi_c, dtype=float), shape),
    )

    # settlement-order coin, one per agent, consumed every step so the
    # stream layout is identical across environments and scenarios
    u_order = state.rng_order.random(n)

    total = t_s + t_c
    over = total > tau
    if over.any():
        if p.overflow == "random_order":  # first-settled claim realized in full
            s_first = u_order[over] < 0.5
            s_o, c_o = t_s[over], t_c[over]
            winner = np.minimum(np.where(s_first, s_o, c_o), tau)
            loser = tau - winner
            t_s[over] = np.where(s_first, winner, loser)
            t_c[over] = np.where(s_first, loser, winner)
        elif p.overflow == "rescale":
            scale = tau / total[over]
            t_s[over] = t_s[over] * scale
            t_c[over] = t_c[over] * scale
        else:  # shirk_first: realize shirking, truncate cooperation
            t_s[over] = np.minimum(t_s[over], tau)
            t_c[over] = np.minimum(t_c[over], tau - t_s[over])
    t_p = tau - t_s - t_c
    t_p[over] = 0.0

    # budget conservation diagnostic
    if abs(float((t_p + t_c + t_s).sum()) - n * tau) > 1e-9 * n:
        raise DiagnosticError(f"budget violated at step {state.step_index}")

    # === 2. production ===
    mean_coop = mean_coop_others_array(t_c)
    outputs = t_p ** (1.0 - p.kappa) * mean_coop**p.kappa
    group_mean = float(outputs.mean())
    ogo = state.ogo
    if group_mean > ogo + 1e-9:
        raise DiagnosticError(f"group mean output {group_mean} exceeds optimum {ogo}")

    # === 3. rewards ===
    rewards = np.asarray(reward(state.reward_params, bonus_array(outputs, cfg.lam)))
    if rewards.ndim == 0:
        rewards = np.full(n, float(rewards))

    # === 4. metrics row (norms as acted upon, i.e. pre-update) ===
    m = state.metrics
    i = state.step_index
    m.mean_t_p[i] = _type_means(t_p, state.types, state.type_counts)
    m.mean_t_c[i] = _type_means(t_c, state.types, state.type_counts)
    m.mean_t_s[i] = _type_means(t_s, state.types, state.type_counts)
    m.mean_output_type[i] = _type_means(outputs, state.types, state.type_counts)
    m.mean_output[i] = group_mean
    m.pct_ogo[i] = group_mean / ogo * 100.0
    m.norm_coop[i] = float(np.mean(norm_c))
    m.norm_shirk[i] = float(np.mean(norm_s))
    m.dev_var_coop[i] = float(np.var(t_c - norm_c))
    m.dev_var_shirk[i] = float(np.var(t_s - norm_s))
    m.total_reward[i] = float(rewards.sum())
    m.clamp_count[i] = clamps

    # === 5. norm update from this step's behaviors (effective next step) ===
    if cfg.environment == "global":
        state.norm_coop = blend(state.norm_coop, float(t_c.mean()), p.h)
        state.norm_shirk = blend(state.norm_shirk, float(t_s.mean()), p.h)
    else:
        if cfg.environment == "neighbours":
            peers = state.topology.neighbours
        else:
            peers = sample_peer_matrix(state.rng_peers, n, p.numpeers)
        if p.norm_formula == "weighted":
            state.norm_coop = blend(state.norm_coop, peer_mean(t_c, peers), p.h)
            state.norm_shirk = blend(state.norm_shirk, peer_mean(t_s, peers), p.h)
        else:  # literal printed form, diagnostics only
            k = peers.shape[1]
            state.norm_coop = (p.h * t_c[peers].sum(axis=1) - state.norm_coop) / k
            state.norm_shirk = (p.h * t_s[peers].sum(axis=1) - state.norm_shirk) / k
            # beliefs can go negative under the literal form; floor at zero so
            # the next step's bounds stay valid
            state.norm_coop = np.maximum(state.norm_coop, 0.0)
            state.norm_shirk = np.maximum(state.norm_shirk, 0.0)

    state.t_p, state.t_c, state.t_s = t_p, t_c, t_s
    state.outputs = outputs
    state.rewards = rewards
    state.step_index += 1
    return state


def run_single(
    config: ScenarioConfig, params: ModelParams, seed: Optional[int] = None
) -> MetricsSeries:
    """One full run; returns the per-step metrics."""
    state = init_model(config, params, replicate_seed=seed)
    for _ in range(params.steps):
        step(state)
    return state.metrics


@dataclass
class ReplicateResult:
    """Replicate-averaged series plus the per-replicate pieces kept for stats."""

    mean: MetricsSeries
    replicates: List[MetricsSeries]
    per_replicate_y: np.ndarray  # aggregate output Y per replicate

    @property
    def aggregate_output(self) -> float:
        return self.mean.aggregate_output


def run_replicates(
    config: ScenarioConfig,
    params: ModelParams,
    n_replicates: int = 50,
    base_seed: Optional[int] = None,
) -> ReplicateResult:
    """n runs with seeds base_seed + 0..n-1, averaged per step."""
    if n_replicates < 1:
        raise ValueError("n_replicates must be >= 1")
    base = params.seed if base_seed is None else base_seed
    series = [run_single(config, params, seed=base + i) for i in range(n_replicates)]
    return ReplicateResult(
        mean=average_series(series),
        replicates=series,
        per_replicate_y=np.array([s.aggregate_output for s in series]),
    )


def run_matrix(
    params: ModelParams,
    environments: Sequence[str] = ("global",),
    n_replicates: int = 50,
    base_seed: Optional[int] = None,
) -> Dict[Tuple[str, str], ReplicateResult]:
    """All nine scenarios for each requested environment.

    Every cell uses the same replicate seed sequence, so cells differ only
    in scenario mechanics and norm scope.
    """
    results: Dict[Tuple[str, str], ReplicateResult] = {}
    for env in environments:
        for name in SCENARIOS:
            cfg = scenario(name, environment=env)
            results[(name, env.lower())] = run_replicates(
                cfg, params, n_replicates=n_replicates, base_seed=base_seed
            )
    return results
