"""Figure rendering for runs, the scenario matrix, and sensitivity reports.

All functions draw with the non-interactive Agg backend and write PNG files;
nothing here opens a window. Scenario colors are fixed so the same scenario
looks the same across every figure.
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .engine import SCENARIOS, TYPE_NAMES, MetricsSeries, ReplicateResult
from .sweeps import EnvSimilarityResult, HVarianceReport, SweepResult

__all__ = [
    "SCENARIO_COLORS",
    "plot_run",
    "plot_matrix",
    "plot_similarity",
    "plot_h_variance",
    "plot_sweep",
]

_TAB = plt.get_cmap("tab10")
SCENARIO_COLORS: Dict[str, tuple] = {name: _TAB(i) for i, name in enumerate(SCENARIOS)}

_DPI = 150


def _new(ncols: int = 1, width: float = 6.4, height: float = 4.2):
    fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, height))
    return fig, axes


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_run(series: MetricsSeries, path: str, title: Optional[str] = None) -> str:
    """One scenario run: time uses, output share, and norm trajectories."""
    fig, (ax_t, ax_o, ax_n) = _new(3)
    steps = np.arange(1, series.steps + 1)

    with np.errstate(invalid="ignore"):
        mean_p = np.nanmean(series.mean_t_p, axis=1)
        mean_c = np.nanmean(series.mean_t_c, axis=1)
        mean_s = np.nanmean(series.mean_t_s, axis=1)
    ax_t.plot(steps, mean_p, label="production")
    ax_t.plot(steps, mean_c, label="cooperation")
    ax_t.plot(steps, mean_s, label="shirking")
    ax_t.set_xlabel("step")
    ax_t.set_ylabel("hours (mean over types)")
    ax_t.set_title("time allocation")
    ax_t.legend()

    ax_o.plot(steps, series.pct_ogo, color="black")
    ax_o.set_xlabel("step")
    ax_o.set_ylabel("% of optimal group output")
    ax_o.set_title("output")

    ax_n.plot(steps, series.norm_coop, label="cooperation norm")
    ax_n.plot(steps, series.norm_shirk, label="shirking norm")
    ax_n.set_xlabel("step")
    ax_n.set_ylabel("hours")
    ax_n.set_title("norms")
    ax_n.legend()

    if title:
        fig.suptitle(title)
    return _save(fig, path)


def plot_matrix(
    results: Dict[Tuple[str, str], ReplicateResult],
    path: str,
    environment: str = "global",
) -> str:
    """Output share trajectories of every scenario in one panel."""
    fig, ax = _new(1, width=7.5, height=5.0)
    for name in SCENARIOS:
        key = (name, environment)
        if key not in results:
            continue
        m = results[key].mean
        ax.plot(
            np.arange(1, m.steps + 1),
            m.pct_ogo,
            label=name,
            color=SCENARIO_COLORS[name],
        )
    ax.set_xlabel("step")
    ax.set_ylabel("% of optimal group output")
    ax.set_title(f"scenario comparison ({environment} norms)")
    ax.legend(ncol=3, fontsize=8)
    return _save(fig, path)


def plot_similarity(result: EnvSimilarityResult, path: str) -> str:
    """Aggregate output per scenario, one marker per norm environment."""
    fig, ax = _new(1, width=7.5, height=4.5)
    scenarios = [row.scenario for row in result.rows]
    x = np.arange(len(scenarios))
    envs = [env for env, _ in result.rows[0].y]
    markers = ("o", "s", "^")
    for j, env in enumerate(envs):
        ys = [dict(row.y)[env] for row in result.rows]
        ax.scatter(x, ys, marker=markers[j % len(markers)], label=env, alpha=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels(scenarios, rotation=30, ha="right")
    ax.set_ylabel("aggregate output Y")
    ax.set_title("environment similarity")
    ax.legend()
    return _save(fig, path)


def plot_h_variance(report: HVarianceReport, path: str) -> str:
    """Deviation variance over time, one line per adjustment rate h."""
    fig, (ax_c, ax_s) = _new(2)
    for h in report.h_values:
        steps = np.arange(1, len(report.dev_var_coop[h]) + 1)
        ax_c.plot(steps, report.dev_var_coop[h], label=f"h={h:g}")
        ax_s.plot(steps, report.dev_var_shirk[h], label=f"h={h:g}")
    ax_c.set_title("cooperation norm")
    ax_s.set_title("shirking norm")
    for ax in (ax_c, ax_s):
        ax.set_xlabel("step")
        ax.set_ylabel("deviation variance")
        ax.legend()
    fig.suptitle("deviation variance by norm adjustment rate")
    return _save(fig, path)


def plot_sweep(sweep: SweepResult, path: str, scenarios: Optional[Sequence[str]] = None) -> str:
    """Whole-run mean output against the swept values, one line per scenario.

    Draws single-dimension sweeps; output is averaged over the four types
    (ignoring types absent from the distribution).
    """
    dims = sweep.spec.dimensions
    if len(dims) != 1:
        raise ValueError("plot_sweep draws single-dimension sweeps only")
    dim = dims[0]
    names = list(scenarios) if scenarios is not None else list(sweep.spec.scenarios)

    fig, ax = _new(1, width=7.0, height=4.5)
    labels = [lv for lv in dict.fromkeys(row.settings_dict[dim] for row in sweep.rows)]
    positions = np.arange(len(labels))
    numeric = dim in ("h", "kappa")
    xs = np.array([float(v) for v in labels]) if numeric else positions
    for name in names:
        means = []
        for label in labels:
            rows = sweep.select(scenario=name, **{dim: label})
            vals = [r.output_mean for r in rows if not np.isnan(r.output_mean)]
            means.append(np.mean(vals))
        ax.plot(xs, means, marker="o", label=name,
                color=SCENARIO_COLORS.get(name))
    if not numeric:
        ax.set_xticks(positions)
        ax.set_xticklabels([str(v) for v in labels], rotation=20, ha="right")
    ax.set_xlabel(dim)
    ax.set_ylabel("whole-run mean output")
    ax.set_title(f"{dim} sweep")
    ax.legend(ncol=3, fontsize=8)
    return _save(fig, path)
