"""Sensitivity harness: parameter sweeps, environment similarity, contrasts.

Three stock analyses around the scenario matrix: (1) sweeps over the type
distribution, the norm adjustment rate h, the task-interdependence exponent
kappa, or the norm environment, condensing each constellation into per-type
whole-run statistics; (2) an environment-similarity table comparing
aggregate output across the Global/Neighbours/Random norm scopes; (3) a
report of deviation variance against h and output contrasts across extreme
kappa regimes.

Statistics follow a two-stage scheme: every per-step per-type series is
first averaged across replicates, then summarized over the steps of the
run (mean, sample std, median). Sweeps reuse the same base seed for every
constellation, so runs that differ only in kappa share identical behavior
draws (kappa enters production, not behavior) and differ only in output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .engine import (
    ENVIRONMENTS,
    SCENARIOS,
    TYPE_NAMES,
    MetricsSeries,
    ModelParams,
    ReplicateResult,
    average_series,
    run_matrix,
    run_replicates,
    scenario,
)

__all__ = [
    "DIST_SETTINGS",
    "SWEEP_DIMENSIONS",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "EnvSimilarityRow",
    "EnvSimilarityResult",
    "environment_similarity",
    "similarity_from_matrix",
    "HVarianceReport",
    "h_variance_report",
    "KappaContrast",
    "kappa_output_contrast",
    "dist_label",
]

# named type-share settings: uniform plus one dominant type at 70%
DIST_SETTINGS: Dict[str, Tuple[float, float, float, float]] = {
    "uniform": (0.25, 0.25, 0.25, 0.25),
    "c_heavy": (0.70, 0.10, 0.10, 0.10),
    "o_heavy": (0.10, 0.70, 0.10, 0.10),
    "se_heavy": (0.10, 0.10, 0.70, 0.10),
    "st_heavy": (0.10, 0.10, 0.10, 0.70),
}

SWEEP_DIMENSIONS = ("dist", "h", "kappa", "environment")


def dist_label(dist: Union[str, Sequence[float]]) -> str:
    """Stable name for a type-share setting (known name or joined shares)."""
    if isinstance(dist, str):
        return dist
    shares = tuple(float(x) for x in dist)
    for name, setting in DIST_SETTINGS.items():
        if shares == setting:
            return name
    return "-".join(f"{x:g}" for x in shares)


def _resolve_dist(value: Union[str, Sequence[float]]) -> Tuple[float, float, float, float]:
    if isinstance(value, str):
        if value not in DIST_SETTINGS:
            raise ValueError(
                f"unknown dist setting {value!r}; expected one of {tuple(DIST_SETTINGS)}"
            )
        return DIST_SETTINGS[value]
    shares = tuple(float(x) for x in value)
    if len(shares) != 4:
        raise ValueError("a dist setting needs four shares")
    return shares  # share validity is checked by ModelParams


@dataclass(frozen=True)
class SweepSpec:
    """What to vary: one dimension's values, or several dimensions crossed.

    dimension may be a single name ("kappa") with a flat list of values, or
    a tuple of names with a matching tuple of value lists; constellations
    are the cross product of scenarios and all dimension values. replicates
    defaults to the sensitivity-run count (15), lighter than the 50 used
    for the headline matrix.
    """

    dimension: Union[str, Tuple[str, ...]]
    values: tuple
    replicates: int = 15
    scenarios: Tuple[str, ...] = tuple(SCENARIOS)

    def __post_init__(self) -> None:
        dims = (self.dimension,) if isinstance(self.dimension, str) else tuple(self.dimension)
        vals = (tuple(self.values),) if isinstance(self.dimension, str) else tuple(
            tuple(v) for v in self.values
        )
        if len(dims) != len(vals):
            raise ValueError("one value list per dimension required")
        if not dims:
            raise ValueError("at least one dimension required")
        for d in dims:
            if d not in SWEEP_DIMENSIONS:
                raise ValueError(f"unknown dimension {d!r}; expected one of {SWEEP_DIMENSIONS}")
        if len(set(dims)) != len(dims):
            raise ValueError("duplicate dimensions")
        for d, v in zip(dims, vals):
            if not v:
                raise ValueError(f"dimension {d!r} has no values")
            if d == "environment":
                for e in v:
                    if e not in ENVIRONMENTS:
                        raise ValueError(f"unknown environment {e!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        for s in self.scenarios:
            if s not in SCENARIOS:
                raise ValueError(f"unknown scenario {s!r}")
        if not self.scenarios:
            raise ValueError("at least one scenario required")
        object.__setattr__(self, "dimension", dims if len(dims) > 1 else dims[0])
        object.__setattr__(self, "values", vals if len(dims) > 1 else vals[0])

    @property
    def dimensions(self) -> Tuple[str, ...]:
        return (self.dimension,) if isinstance(self.dimension, str) else self.dimension

    @property
    def value_lists(self) -> Tuple[tuple, ...]:
        return (self.values,) if isinstance(self.dimension, str) else self.values

    def constellations(self) -> List[Tuple[str, Dict[str, object]]]:
        """(scenario, {dimension: value}) for every combination."""
        combos = itertools.product(*self.value_lists)
        return [
            (name, dict(zip(self.dimensions, combo)))
            for combo in combos
            for name in self.scenarios
        ]

    @property
    def constellation_count(self) -> int:
        n = len(self.scenarios)
        for v in self.value_lists:
            n *= len(v)
        return n

    @property
    def run_count(self) -> int:
        return self.constellation_count * self.replicates

    @classmethod
    def full_cross(cls, replicates: int = 15) -> "SweepSpec":
        """The complete sensitivity grid: dist x h x kappa over all scenarios."""
        return cls(
            dimension=("dist", "h", "kappa"),
            values=(tuple(DIST_SETTINGS), (0.1, 0.5, 1.0), (0.0, 0.5, 1.0)),
            replicates=replicates,
        )


@dataclass(frozen=True)
class SweepRow:
    """One (constellation, scenario, type) cell of a sweep table."""

    scenario: str
    environment: str
    type_name: str
    settings: Tuple[Tuple[str, object], ...]  # (dimension, value) pairs, labeled
    output_mean: float
    output_std: float
    output_median: float
    t_p_mean: float
    t_c_mean: float
    t_s_mean: float

    @property
    def settings_dict(self) -> Dict[str, object]:
        return dict(self.settings)


@dataclass
class SweepResult:
    """All rows of one sweep plus enough context to rerun it."""

    spec: SweepSpec
    params: ModelParams
    base_seed: int
    rows: List[SweepRow] = field(default_factory=list)
    series: Dict[Tuple[str, Tuple[Tuple[str, object], ...]], MetricsSeries] = field(
        default_factory=dict
    )  # replicate-averaged series per (scenario, settings)

    def select(self, scenario: Optional[str] = None, type_name: Optional[str] = None,
               **settings: object) -> List[SweepRow]:
        out = []
        for row in self.rows:
            if scenario is not None and row.scenario != scenario:
                continue
            if type_name is not None and row.type_name != type_name:
                continue
            d = row.settings_dict
            if any(d.get(k) != v for k, v in settings.items()):
                continue
            out.append(row)
        return out


def _labeled_settings(settings: Dict[str, object]) -> Tuple[Tuple[str, object], ...]:
    out = []
    for dim in SWEEP_DIMENSIONS:  # fixed order for stable keys and CSV columns
        if dim in settings:
            v = settings[dim]
            out.append((dim, dist_label(v) if dim == "dist" else v))
    return tuple(out)


def run_sweep(
    spec: SweepSpec, params: Optional[ModelParams] = None, base_seed: Optional[int] = None
) -> SweepResult:
    """Run every constellation and condense it into per-type statistics.

    Output gets mean, sample std, and median over the run's steps (after
    replicate averaging); the three time uses get their run means. Types
    absent from a constellation's dist produce nan statistics.
    """
    params = ModelParams() if params is None else params
    base = params.seed if base_seed is None else base_seed
    result = SweepResult(spec=spec, params=params, base_seed=base)

    for name, settings in spec.constellations():
        env = str(settings.get("environment", "global"))
        overrides: Dict[str, object] = {}
        if "dist" in settings:
            overrides["dist"] = _resolve_dist(settings["dist"])
        if "h" in settings:
            overrides["h"] = float(settings["h"])
        if "kappa" in settings:
            overrides["kappa"] = float(settings["kappa"])
        run_params = replace(params, **overrides) if overrides else params

        rep = run_replicates(
            scenario(name, environment=env), run_params, n_replicates=spec.replicates,
            base_seed=base,
        )
        m = rep.mean
        key_settings = _labeled_settings(settings)
        result.series[(name, key_settings)] = m
        for k, type_name in enumerate(TYPE_NAMES):
            out_series = m.mean_output_type[:, k]
            result.rows.append(
                SweepRow(
                    scenario=name,
                    environment=env,
                    type_name=type_name,
                    settings=key_settings,
                    output_mean=float(np.mean(out_series)),
                    output_std=float(np.std(out_series, ddof=1)),
                    output_median=float(np.median(out_series)),
                    t_p_mean=float(np.mean(m.mean_t_p[:, k])),
                    t_c_mean=float(np.mean(m.mean_t_c[:, k])),
                    t_s_mean=float(np.mean(m.mean_t_s[:, k])),
                )
            )
    return result


@dataclass(frozen=True)
class EnvSimilarityRow:
    """One scenario's aggregate output compared across norm environments."""

    scenario: str
    y: Tuple[Tuple[str, float], ...]        # (environment, Y)
    y_bar: float                            # mean Y across environments
    rel_dev: Tuple[Tuple[str, float], ...]  # (environment, (Y - Ybar)/Ybar)
    std: float                              # sample std of the env Ys
    pct_std: float                          # std / Ybar

    @property
    def max_abs_rel_dev(self) -> float:
        return max(abs(v) for _, v in self.rel_dev)


@dataclass
class EnvSimilarityResult:
    rows: List[EnvSimilarityRow]
    n_replicates: int
    base_seed: int

    @property
    def max_abs_rel_dev(self) -> float:
        return max(row.max_abs_rel_dev for row in self.rows)

    def row(self, scenario_name: str) -> EnvSimilarityRow:
        for r in self.rows:
            if r.scenario == scenario_name:
                return r
        raise KeyError(scenario_name)


def similarity_from_matrix(
    matrix: Dict[Tuple[str, str], ReplicateResult],
    environments: Sequence[str],
    n_replicates: int,
    base_seed: int,
) -> EnvSimilarityResult:
    """Build the similarity table from an already-computed scenario matrix."""
    if len(environments) < 2:
        raise ValueError("need at least two environments to compare")
    rows = []
    for name in SCENARIOS:
        ys = {env: matrix[(name, env)].mean.aggregate_output for env in environments}
        vals = np.array([ys[e] for e in environments])
        y_bar = float(vals.mean())
        rows.append(
            EnvSimilarityRow(
                scenario=name,
                y=tuple((e, ys[e]) for e in environments),
                y_bar=y_bar,
                rel_dev=tuple((e, (ys[e] - y_bar) / y_bar) for e in environments),
                std=float(vals.std(ddof=1)),
                pct_std=float(vals.std(ddof=1) / y_bar),
            )
        )
    return EnvSimilarityResult(rows=rows, n_replicates=n_replicates, base_seed=base_seed)


def environment_similarity(
    params: Optional[ModelParams] = None,
    n_replicates: int = 50,
    base_seed: Optional[int] = None,
    environments: Sequence[str] = ENVIRONMENTS,
) -> EnvSimilarityResult:
    """Aggregate output Y per scenario and environment, with spread measures.

    Relative deviations use the across-environment mean as base; std is the
    sample standard deviation of the per-environment Y values.
    """
    params = ModelParams() if params is None else params
    base = params.seed if base_seed is None else base_seed
    if len(environments) < 2:
        raise ValueError("need at least two environments to compare")
    matrix = run_matrix(params, environments=environments, n_replicates=n_replicates,
                        base_seed=base)
    return similarity_from_matrix(matrix, environments, n_replicates, base)


@dataclass
class HVarianceReport:
    """Deviation-variance series per norm adjustment rate.

    Each series is the replicate-averaged per-step population variance of
    behavior minus the applicable norm, pooled (averaged) across the swept
    scenario x type-distribution cells. Keys of the series dicts are the h
    values. The default cells are the no-incentive neutral scenario under
    every stock type distribution: scenarios where a norm keeps growing
    until the budget binds have an h-insensitive variance plateau, so
    pooling them in would wash out the h effect the report exists to show.
    """

    h_values: Tuple[float, ...]
    dev_var_coop: Dict[float, np.ndarray]
    dev_var_shirk: Dict[float, np.ndarray]
    scenarios: Tuple[str, ...]
    dists: Tuple[str, ...]
    n_replicates: int
    base_seed: int

    def terminal_means(self, window: int = 100) -> Dict[float, Tuple[float, float]]:
        """h -> (cooperation, shirking) deviation variance, last `window` steps."""
        return {
            h: (
                float(self.dev_var_coop[h][-window:].mean()),
                float(self.dev_var_shirk[h][-window:].mean()),
            )
            for h in self.h_values
        }

    def decreasing_in_h(self, window: int = 100) -> bool:
        """True when terminal variance strictly falls as h rises, both norms."""
        terms = self.terminal_means(window)
        ordered = sorted(self.h_values)
        coop = [terms[h][0] for h in ordered]
        shirk = [terms[h][1] for h in ordered]
        return all(a > b for a, b in zip(coop, coop[1:])) and all(
            a > b for a, b in zip(shirk, shirk[1:])
        )


def h_variance_report(
    params: Optional[ModelParams] = None,
    h_values: Sequence[float] = (0.1, 0.5, 1.0),
    scenarios: Sequence[str] = ("base",),
    dists: Sequence[Union[str, Sequence[float]]] = tuple(DIST_SETTINGS),
    n_replicates: int = 15,
    base_seed: Optional[int] = None,
    environment: str = "global",
) -> HVarianceReport:
    """Deviation variance as a function of the norm adjustment rate."""
    params = ModelParams() if params is None else params
    base = params.seed if base_seed is None else base_seed
    if not h_values:
        raise ValueError("need at least one h value")
    if not dists:
        raise ValueError("need at least one type distribution")
    coop: Dict[float, np.ndarray] = {}
    shirk: Dict[float, np.ndarray] = {}
    for h in h_values:
        means = []
        for dist in dists:
            run_params = replace(params, h=float(h), dist=_resolve_dist(dist))
            means.extend(
                run_replicates(
                    scenario(name, environment=environment), run_params,
                    n_replicates=n_replicates, base_seed=base,
                ).mean
                for name in scenarios
            )
        pooled = average_series(means)
        coop[float(h)] = pooled.dev_var_coop
        shirk[float(h)] = pooled.dev_var_shirk
    return HVarianceReport(
        h_values=tuple(float(h) for h in h_values),
        dev_var_coop=coop,
        dev_var_shirk=shirk,
        scenarios=tuple(scenarios),
        dists=tuple(dist_label(d) for d in dists),
        n_replicates=n_replicates,
        base_seed=base,
    )


@dataclass(frozen=True)
class KappaContrast:
    """Output contrasts between task-interdependence regimes.

    overall_pct_low_vs_high compares grand-mean output (over scenarios and
    types) at the lowest kappa against the highest. overall_pct_low_vs_mid
    is the same against the middle value when three were swept. The
    per-type contrasts report, in hundredths of output units, how much the
    type's average output change between the extreme regimes differs from
    the average change of the remaining types.
    """

    kappa_low: float
    kappa_high: float
    overall_pct_low_vs_high: float
    overall_pct_low_vs_mid: Optional[float]
    st_vs_rest: float
    se_vs_rest: float


def kappa_output_contrast(sweep: SweepResult) -> KappaContrast:
    """Condense a kappa sweep into the headline contrasts."""
    kappas = sorted({row.settings_dict["kappa"] for row in sweep.rows
                     if "kappa" in row.settings_dict})
    if len(kappas) < 2:
        raise ValueError("kappa contrast needs at least two kappa values in the sweep")
    low, high = float(kappas[0]), float(kappas[-1])
    mid = float(kappas[len(kappas) // 2]) if len(kappas) >= 3 else None

    def grand_mean(kappa: float) -> float:
        vals = [row.output_mean for row in sweep.select(kappa=kappa)
                if not np.isnan(row.output_mean)]
        return float(np.mean(vals))

    g_low, g_high = grand_mean(low), grand_mean(high)
    overall = (g_low / g_high - 1.0) * 100.0
    overall_mid = (g_low / grand_mean(mid) - 1.0) * 100.0 if mid is not None else None

    scenarios = sorted({row.scenario for row in sweep.rows})

    def delta(scenario_name: str, type_name: str) -> float:
        lo = sweep.select(scenario=scenario_name, type_name=type_name, kappa=low)
        hi = sweep.select(scenario=scenario_name, type_name=type_name, kappa=high)
        return float(
            np.mean([r.output_mean for r in hi]) - np.mean([r.output_mean for r in lo])
        )

    def type_vs_rest(type_name: str) -> float:
        rest = [t for t in TYPE_NAMES if t != type_name]
        diffs = []
        for s in scenarios:
            own = delta(s, type_name)
            others = np.mean([delta(s, t) for t in rest])
            diffs.append(own - others)
        return float(np.mean(diffs)) * 100.0

    return KappaContrast(
        kappa_low=low,
        kappa_high=high,
        overall_pct_low_vs_high=overall,
        overall_pct_low_vs_mid=overall_mid,
        st_vs_rest=type_vs_rest("ST"),
        se_vs_rest=type_vs_rest("SE"),
    )
