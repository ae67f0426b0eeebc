"""Reward tests: bonus composition, the base-wage floor, and the algebraic
identities the cost comparisons rest on."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from worknorms.rewards import (
    RewardParams,
    bonus,
    bonus_array,
    cumulative_labor_cost,
    reward,
)


class TestBonus:
    def test_individual_scheme_pays_own_output(self):
        assert bonus([1.0, 4.2, 2.0], 1, lam=0) == pytest.approx(4.2)

    def test_group_scheme_pays_the_mean(self):
        for i in range(3):
            assert bonus([2.0, 4.0, 6.0], i, lam=1) == pytest.approx(4.0)

    def test_uniform_outputs_make_schemes_agree(self):
        for lam in (0, 1):
            assert bonus([3.3] * 5, 2, lam) == pytest.approx(3.3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bonus([], 0, lam=0)

    def test_array_matches_scalar(self):
        outputs = np.array([0.5, 2.0, 3.75, 1.0])
        for lam in (0, 1):
            vec = bonus_array(outputs, lam)
            scalar = [bonus(outputs, i, lam) for i in range(4)]
            np.testing.assert_allclose(vec, scalar, atol=1e-12)


class TestReward:
    def test_flat_wage_without_pfp(self):
        params = RewardParams(w=1.0, tau=10.0, mu=0, lam=0)
        for b in (0.0, 3.3, 99.0):
            assert reward(params, b) == 10.0

    def test_additive_bonus_with_pfp(self):
        params = RewardParams(w=1.0, tau=10.0, mu=1, lam=0)
        assert reward(params, 3.3) == pytest.approx(13.3)
        assert reward(params, 0.0) == 10.0

    def test_omega_b_is_wage_times_budget(self):
        assert RewardParams(w=2.0, tau=8.0).omega_b == 16.0

    def test_binary_switch_validation(self):
        with pytest.raises(ValueError):
            RewardParams(mu=2)
        with pytest.raises(ValueError):
            RewardParams(lam=-1)

    def test_reward_never_below_base_wage(self):
        params = RewardParams(mu=1, lam=1)
        outputs = np.array([0.0, 1.0, 5.0])
        rewards = reward(params, bonus_array(outputs, 1))
        assert np.all(rewards >= params.omega_b)


class TestCost:
    def test_flat_wage_run_total(self):
        # 100 agents x 500 steps x 10 per day
        per_step_totals = np.full(500, 100 * 10.0)
        assert cumulative_labor_cost(per_step_totals) == 500_000.0

    def test_accepts_per_agent_matrix(self):
        rewards = np.full((500, 100), 10.0)
        assert cumulative_labor_cost(rewards) == 500_000.0


class TestAlgebraicIdentities:
    @given(outputs=st.lists(st.floats(min_value=0.0, max_value=10.0),
                            min_size=1, max_size=50))
    @settings(max_examples=200)
    def test_total_bonus_mass_identical_across_schemes(self, outputs):
        arr = np.array(outputs)
        total_individual = bonus_array(arr, 0).sum()
        total_group = bonus_array(arr, 1).sum()
        assert total_individual == pytest.approx(total_group, abs=1e-9)
        assert total_individual == pytest.approx(arr.sum(), abs=1e-9)

    @given(outputs=st.lists(st.floats(min_value=0.0, max_value=10.0),
                            min_size=2, max_size=50))
    @settings(max_examples=200)
    def test_group_scheme_pays_everyone_identically(self, outputs):
        b = bonus_array(np.array(outputs), 1)
        assert np.ptp(b) <= 1e-12

    @given(
        outputs=st.lists(st.floats(min_value=0.0, max_value=10.0),
                         min_size=1, max_size=50),
        lam=st.integers(min_value=0, max_value=1),
    )
    @settings(max_examples=200)
    def test_mu_zero_pays_base_wage_exactly(self, outputs, lam):
        params = RewardParams(mu=0, lam=lam)
        rewards = reward(params, bonus_array(np.array(outputs), lam))
        assert np.all(rewards == params.omega_b)
