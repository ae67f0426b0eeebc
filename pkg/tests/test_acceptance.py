"""Acceptance suite: sixteen go/no-go checks on the reference configuration.

Each criterion is one test named test_criterion_NN_*, so `pytest -v` prints
one pass/fail line per criterion. The expensive inputs are module-scoped
fixtures shared across criteria: the nine-scenario matrix in all three norm
environments at 50 replicates (about two minutes), the kappa sensitivity
sweep, and the norm-adjustment-rate variance report. Criteria that the
model misses under the reference settings are marked xfail(strict) with the
measured value in the reason, so a silent recovery shows up as a failure.
"""

import filecmp
import math
import os

import numpy as np
import pytest

from worknorms.cli import main
from worknorms.distributions import Triangular, pdf, sample, sample_array
from worknorms.engine import (
    ENVIRONMENTS,
    ModelParams,
    init_model,
    run_matrix,
    run_replicates,
    run_single,
    scenario,
    step,
    type_quotas,
)
from worknorms.norms import blend
from worknorms.rewards import RewardParams, bonus_array, cumulative_labor_cost, reward
from worknorms.sweeps import (
    SweepSpec,
    h_variance_report,
    kappa_output_contrast,
    run_sweep,
    similarity_from_matrix,
)

DEFAULTS = ModelParams()

REPLICATES = 50


@pytest.fixture(scope="module")
def full_matrix():
    """Nine scenarios x three environments x 50 replicates."""
    return run_matrix(DEFAULTS, environments=ENVIRONMENTS, n_replicates=REPLICATES)


@pytest.fixture(scope="module")
def base_series(full_matrix):
    return full_matrix[("base", "global")].mean


@pytest.fixture(scope="module")
def kappa_sweep():
    spec = SweepSpec(dimension="kappa", values=(0.0, 0.5, 1.0), replicates=15)
    return run_sweep(spec, DEFAULTS)


@pytest.fixture(scope="module")
def h_report():
    return h_variance_report(DEFAULTS, h_values=(0.1, 0.5, 1.0))


def terminal(full_matrix, name, env="global", window=100):
    """Terminal efficiency: mean %OGO over the last `window` steps."""
    return float(full_matrix[(name, env)].mean.pct_ogo[-window:].mean())


def y_of(full_matrix, name, env="global"):
    return full_matrix[(name, env)].aggregate_output


# --- criterion 1: baseline efficiency level, start and end ----------------

def test_criterion_01_base_pct_ogo_start_and_terminal(base_series):
    assert base_series.pct_ogo[0] == pytest.approx(64.5, abs=2.0)
    assert float(base_series.pct_ogo[-100:].mean()) == pytest.approx(66.0, abs=3.0)


# --- criterion 2: terminal efficiency bands and scenario ordering ---------

def test_criterion_02_terminal_pct_ogo_bands_and_ordering(full_matrix):
    t = {name: terminal(full_matrix, name) for name, _ in
         ((n, None) for n in ("base", "trusting", "controlling", "cooperative",
                              "competitive", "trustcoop", "contrcoop",
                              "trustcomp", "contrcomp"))}
    assert t["trusting"] == pytest.approx(87.0, abs=4.0)
    assert t["controlling"] == pytest.approx(22.0, abs=4.0)
    assert t["cooperative"] == pytest.approx(71.0, abs=4.0)
    assert t["competitive"] == pytest.approx(40.0, abs=5.0)
    assert t["trustcoop"] >= 70.0
    assert t["contrcomp"] == pytest.approx(10.0, abs=4.0)
    # terminal ordering: trusting on top, then the cooperative cluster, then
    # contrcoop, competitive, controlling, contrcomp at the bottom; trustcomp
    # is only pinned above competitive
    top_cluster = (t["trustcoop"], t["cooperative"], t["base"])
    assert all(t["trusting"] > v for v in top_cluster)
    assert all(v > t["contrcoop"] for v in top_cluster)
    assert t["contrcoop"] > t["competitive"]
    assert t["competitive"] > t["controlling"]
    assert t["controlling"] > t["contrcomp"]
    assert t["trustcomp"] > t["competitive"]


# --- criterion 3: aggregate output reference points ------------------------

def test_criterion_03_aggregate_output_reference_points(full_matrix):
    assert y_of(full_matrix, "base") == pytest.approx(1642.99, rel=0.05)
    assert y_of(full_matrix, "trusting") == pytest.approx(1998.27, rel=0.05)
    assert y_of(full_matrix, "controlling") == pytest.approx(1031.38, rel=0.07)
    assert y_of(full_matrix, "contrcomp") == pytest.approx(836.95, rel=0.07)


# --- criterion 4: norm environments are interchangeable --------------------

def test_criterion_04_environment_similarity(full_matrix):
    sim = similarity_from_matrix(full_matrix, ENVIRONMENTS, REPLICATES, DEFAULTS.seed)
    assert sim.max_abs_rel_dev <= 0.05


# --- criterion 5: per-type time use in the uniform baseline ----------------

def test_criterion_05_per_type_time_means(base_series):
    def over_steps(arr, type_index):
        return float(np.mean(arr[:, type_index]))

    assert over_steps(base_series.mean_t_p, 0) == pytest.approx(3.4379, abs=0.15)
    assert over_steps(base_series.mean_t_s, 0) == pytest.approx(3.2757, abs=0.15)
    assert over_steps(base_series.mean_t_c, 0) == pytest.approx(3.2863, abs=0.15)
    coop = [over_steps(base_series.mean_t_c, k) for k in range(4)]
    assert coop[3] > coop[0] > coop[2]  # ST cooperate most, SE least


# --- criterion 6: labor cost of the group-bonus scenarios ------------------

def test_criterion_06_cost_ratios(full_matrix):
    def cost(name):
        return cumulative_labor_cost(full_matrix[(name, "global")].mean.total_reward)

    base = cost("base")
    assert base == pytest.approx(500_000.0, abs=1e-6)  # flat wage, no bonuses
    assert cost("cooperative") / base == pytest.approx(1.31, abs=0.05)
    assert cost("trustcoop") / base == pytest.approx(1.35, abs=0.05)


# --- criterion 7: output gain from trusting management ---------------------

@pytest.mark.xfail(
    strict=True,
    reason="trusting raises aggregate output by about +22% over base under the "
           "reference settings, short of the +38 +/- 5pp acceptance band",
)
def test_criterion_07_trusting_output_uplift(full_matrix):
    uplift = (y_of(full_matrix, "trusting") / y_of(full_matrix, "base") - 1.0) * 100.0
    assert uplift == pytest.approx(38.0, abs=5.0)


# --- criterion 8: kappa sensitivity of aggregate output --------------------

@pytest.mark.xfail(
    strict=True,
    reason="the kappa=0 vs kappa=1 overall output contrast measures about +7%, "
           "below the +26 +/- 6pp acceptance band; the kappa=0 vs kappa=0.5 "
           "contrast does land in that band (next criterion line)",
)
def test_criterion_08a_kappa_overall_contrast_low_vs_high(kappa_sweep):
    contrast = kappa_output_contrast(kappa_sweep)
    assert contrast.overall_pct_low_vs_high == pytest.approx(26.0, abs=6.0)


def test_criterion_08b_kappa_overall_contrast_low_vs_mid(kappa_sweep):
    contrast = kappa_output_contrast(kappa_sweep)
    assert contrast.overall_pct_low_vs_mid == pytest.approx(26.0, abs=6.0)


def test_criterion_08c_kappa_st_gain(kappa_sweep):
    contrast = kappa_output_contrast(kappa_sweep)
    assert contrast.st_vs_rest == pytest.approx(58.0, abs=10.0)


def test_criterion_08d_kappa_se_loss(kappa_sweep):
    contrast = kappa_output_contrast(kappa_sweep)
    assert contrast.se_vs_rest == pytest.approx(-52.0, abs=10.0)


# --- criterion 9: faster norm adjustment shrinks deviation variance --------

def test_criterion_09_deviation_variance_decreases_in_h(h_report):
    assert h_report.h_values == (0.1, 0.5, 1.0)
    assert h_report.decreasing_in_h(window=100) is True


# --- criterion 10: the time budget is conserved exactly --------------------

def test_criterion_10_budget_identity():
    series = run_single(scenario("base"), DEFAULTS)
    counts = type_quotas(DEFAULTS.dist, DEFAULTS.numagents)
    per_type_total = series.mean_t_p + series.mean_t_c + series.mean_t_s
    population_total = per_type_total @ counts
    target = DEFAULTS.numagents * DEFAULTS.tau
    assert np.max(np.abs(population_total - target)) <= 1e-9 * DEFAULTS.numagents
    # and per agent, at the state level
    state = init_model(scenario("base"), DEFAULTS)
    for _ in range(50):
        step(state)
        assert np.max(np.abs(state.t_p + state.t_c + state.t_s - DEFAULTS.tau)) <= 1e-9
        assert state.t_p.min() >= 0 and state.t_c.min() >= 0 and state.t_s.min() >= 0


# --- criterion 11: the deviation distribution is sound ---------------------

def test_criterion_11_triangular_distribution_soundness():
    d = Triangular(1.0, 4.0, 9.0)

    # density integrates to one (the mode lies on the grid, so trapezoid is exact)
    xs = np.linspace(d.a, d.b, 20_001)
    ys = np.array([pdf(d, float(x)) for x in xs])
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    assert trapezoid(ys, xs) == pytest.approx(1.0, abs=1e-6)

    # a million inverse-CDF draws stay in the support, mean within 3 SE
    u = np.random.default_rng(7).random(1_000_000)
    draws = sample_array(u, np.full_like(u, d.a), np.full_like(u, d.c),
                         np.full_like(u, d.b))
    assert draws.min() >= d.a and draws.max() <= d.b
    mean = (d.a + d.b + d.c) / 3.0
    var = (d.a**2 + d.b**2 + d.c**2 - d.a * d.b - d.a * d.c - d.b * d.c) / 18.0
    assert abs(draws.mean() - mean) <= 3.0 * math.sqrt(var / draws.size)

    # inverse CDF agrees with a from-scratch rejection sampler at 20 quantiles
    rng = np.random.default_rng(11)
    x = rng.uniform(d.a, d.b, 2_000_000)
    y = rng.uniform(0.0, 2.0 / (d.b - d.a), 2_000_000)
    density = np.where(
        x < d.c,
        2.0 * (x - d.a) / ((d.b - d.a) * (d.c - d.a)),
        2.0 * (d.b - x) / ((d.b - d.a) * (d.b - d.c)),
    )
    accepted = x[y <= density]
    levels = (np.arange(20) + 0.5) / 20.0
    empirical = np.quantile(accepted, levels)
    closed_form = np.array([sample(d, float(q)) for q in levels])
    np.testing.assert_allclose(closed_form, empirical, atol=1e-2)


# --- criterion 12: adjustment-rate limit behavior ---------------------------

def test_criterion_12_adjustment_rate_limits():
    prev = np.array([2.0, 5.0, 8.0])
    observed = np.array([4.0, 4.0, 4.0])
    np.testing.assert_array_equal(blend(prev, observed, 0.0), prev)
    np.testing.assert_array_equal(blend(prev, observed, 1.0), observed)
    mixed = blend(prev, observed, 0.3)
    assert np.all(mixed >= np.minimum(prev, observed))
    assert np.all(mixed <= np.maximum(prev, observed))
    np.testing.assert_allclose(mixed, 0.7 * prev + 0.3 * observed, atol=1e-15)

    # integrated: h=0 freezes the starting norms for a whole run
    frozen = run_single(scenario("base"), ModelParams(steps=50, h=0.0))
    np.testing.assert_array_equal(frozen.norm_coop, np.full(50, DEFAULTS.tau / 3.0))
    np.testing.assert_array_equal(frozen.norm_shirk, np.full(50, DEFAULTS.tau / 3.0))

    # integrated: h=1 adopts the previous step's population mean behavior
    adopted = run_single(scenario("base"), ModelParams(steps=50, h=1.0))
    counts = type_quotas(DEFAULTS.dist, DEFAULTS.numagents)
    pop_mean_coop = adopted.mean_t_c @ counts / DEFAULTS.numagents
    np.testing.assert_allclose(adopted.norm_coop[1:], pop_mean_coop[:-1], atol=1e-12)


# --- criterion 13: seeded runs reproduce byte for byte ----------------------

def test_criterion_13_seed_reproducibility(tmp_path):
    outs = [str(tmp_path / name) for name in ("first", "second", "reseeded")]
    for out, seed in zip(outs, ("42", "42", "43")):
        args = ["run", "--scenario", "base", "--steps", "50", "--replicates", "2",
                "--seed", seed, "--no-plots", "--out-dir", out]
        assert main(args) == 0
    paths = [os.path.join(out, "base.csv") for out in outs]
    assert filecmp.cmp(paths[0], paths[1], shallow=False)
    assert not filecmp.cmp(paths[0], paths[2], shallow=False)


# --- criterion 14: bonus mass conservation and the flat-wage floor ----------

def test_criterion_14_bonus_mass_and_flat_wage():
    outputs = np.random.default_rng(3).random(1000) * 5.0
    total_individual = bonus_array(outputs, lam=0).sum()
    total_group = bonus_array(outputs, lam=1).sum()
    assert abs(total_individual - total_group) <= 1e-9
    assert abs(total_individual - outputs.sum()) <= 1e-9

    flat = reward(RewardParams(mu=0), bonus_array(outputs, lam=0))
    assert np.all(flat == RewardParams().omega_b)

    series = run_single(scenario("base"), ModelParams(steps=50))
    expected = DEFAULTS.numagents * DEFAULTS.w * DEFAULTS.tau
    assert np.all(series.total_reward == expected)


# --- criterion 15: no drift without behavioral offsets ----------------------

def test_criterion_15_neutral_zero_offsets_flat_trend():
    params = ModelParams(zero_offsets=True)
    result = run_replicates(scenario("base"), params, n_replicates=30)
    slope = np.polyfit(np.arange(params.steps), result.mean.pct_ogo, 1)[0]
    assert abs(slope) <= 0.005  # percentage points per step


# --- criterion 16: a three-agent day recomputed by hand ---------------------

def test_criterion_16_three_agent_hand_oracle():
    params = ModelParams(numagents=3, steps=2, numpeers=1,
                         dist=(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0), seed=123)
    series = run_single(scenario("base"), params)

    # rebuild the four seeded streams from the published scheme
    types_ss, behavior_ss, order_ss, _ = np.random.SeedSequence(123).spawn(4)
    perm = np.random.default_rng(types_ss).permutation(3)
    types = np.array([0, 1, 2])[perm]  # one C, one O, one SE
    u = np.random.default_rng(behavior_ss).random((3, 2))
    u_order = np.random.default_rng(order_ss).random(3)

    tau, h, kappa = 10.0, 0.1, 0.5
    norm = tau / 3.0
    delta = np.array([1.0 / 3.0, 1.0, 2.0 / 3.0])[types]
    coop_shift = np.array([0.0, 0.0, -0.5])[types] * delta  # gamma * delta, mu = 0

    def inverse_cdf(uu, a, c, b):
        span = b - a
        if uu < (c - a) / span:
            return min(b, a + math.sqrt(uu * span * (c - a)))
        return max(a, b - math.sqrt((1.0 - uu) * span * (b - c)))

    t_s = np.empty(3)
    t_c = np.empty(3)
    t_p = np.empty(3)
    for i in range(3):
        low, high = norm * (1.0 - delta[i]), norm * (1.0 + delta[i])
        t_s[i] = inverse_cdf(u[i, 0], low, norm, high)  # neutral stance: mode = norm
        mode_c = min(max(norm * (1.0 + coop_shift[i]), low), high)
        t_c[i] = inverse_cdf(u[i, 1], low, mode_c, high)
        if t_s[i] + t_c[i] > tau:
            shirk_first = u_order[i] < 0.5
            winner = min(t_s[i] if shirk_first else t_c[i], tau)
            t_s[i], t_c[i] = ((winner, tau - winner) if shirk_first
                              else (tau - winner, winner))
            t_p[i] = 0.0
        else:
            t_p[i] = tau - t_s[i] - t_c[i]

    coop_of_others = (t_c.sum() - t_c) / 2.0
    outputs = t_p ** (1.0 - kappa) * coop_of_others**kappa
    group_mean = outputs.mean()
    ogo = (tau * (1.0 - kappa)) ** (1.0 - kappa) * (tau * kappa) ** kappa

    def by_type(values):
        row = np.full(4, np.nan)
        for i in range(3):
            row[types[i]] = values[i]
        return row

    tol = dict(atol=1e-12, rtol=0.0)
    np.testing.assert_allclose(series.mean_t_p[0], by_type(t_p), equal_nan=True, **tol)
    np.testing.assert_allclose(series.mean_t_c[0], by_type(t_c), equal_nan=True, **tol)
    np.testing.assert_allclose(series.mean_t_s[0], by_type(t_s), equal_nan=True, **tol)
    np.testing.assert_allclose(series.mean_output_type[0], by_type(outputs),
                               equal_nan=True, **tol)
    assert series.mean_output[0] == pytest.approx(group_mean, abs=1e-12)
    assert series.pct_ogo[0] == pytest.approx(group_mean / ogo * 100.0, abs=1e-12)
    assert series.norm_coop[0] == pytest.approx(norm, abs=1e-12)
    assert series.norm_shirk[0] == pytest.approx(norm, abs=1e-12)
    assert series.dev_var_coop[0] == pytest.approx(np.var(t_c - norm), abs=1e-12)
    assert series.dev_var_shirk[0] == pytest.approx(np.var(t_s - norm), abs=1e-12)
    assert series.total_reward[0] == pytest.approx(3 * 10.0, abs=1e-12)
    # the norms the second step acts on are the blended first-step behaviors
    assert series.norm_coop[1] == pytest.approx(
        (1.0 - h) * norm + h * t_c.mean(), abs=1e-12
    )
    assert series.norm_shirk[1] == pytest.approx(
        (1.0 - h) * norm + h * t_s.mean(), abs=1e-12
    )
