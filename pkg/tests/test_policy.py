"""Policy instrument tests: levy, fiduciary blend, adaptive rule, robust choice."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infomarket.config import SimParams
from infomarket.errors import ConfigError
from infomarket.policy import (
    SCENARIOS,
    PolicyConfig,
    adaptive_tax,
    fiduciary_objective,
    first_best_policy,
    pigouvian_tax,
    robust_select,
    scenario_config,
)


class TestPigouvianTax:
    def test_no_externality_no_tax(self):
        assert pigouvian_tax(0.0, 0.5, 0.0, -0.1) == 0.0

    def test_full_moderation_absorbs_direct_harm(self):
        assert pigouvian_tax(0.8, 1.0, 0.0, -0.1) == 0.0

    def test_direct_evaluation(self):
        # 0.8 * (1 - 0.2) + 10 * |−0.01| = 0.74
        assert pigouvian_tax(0.8, 0.2, 10.0, -0.01) == pytest.approx(0.74, rel=1e-12)

    def test_positive_trust_sensitivity_rejected(self):
        with pytest.raises(ValueError):
            pigouvian_tax(0.8, 0.2, 10.0, 0.01)

    def test_nonnegative(self):
        assert pigouvian_tax(0.0, 0.0, 5.0, 0.0) == 0.0


class TestFiduciaryObjective:
    def test_pure_profit_at_zero(self):
        assert fiduciary_objective(10.0, 6.0, 2.0, 0.0) == 10.0

    def test_pure_welfare_fragment_at_one(self):
        assert fiduciary_objective(10.0, 6.0, 2.0, 1.0) == 4.0

    def test_midpoint(self):
        assert fiduciary_objective(10.0, 6.0, 2.0, 0.5) == pytest.approx(7.0)

    @given(
        profit=st.floats(-100, 100), value=st.floats(0, 100),
        harm=st.floats(0, 100), alpha=st.floats(0, 1),
    )
    @settings(max_examples=200, deadline=None)
    def test_affine_in_alpha(self, profit, value, harm, alpha):
        f0 = fiduciary_objective(profit, value, harm, 0.0)
        f1 = fiduciary_objective(profit, value, harm, 1.0)
        expected = f0 + alpha * (f1 - f0)
        assert fiduciary_objective(profit, value, harm, alpha) == pytest.approx(
            expected, abs=1e-9
        )


class TestAdaptiveTax:
    def test_on_target_unchanged(self):
        assert adaptive_tax(0.7, 0.4, 0.4, 0.1) == pytest.approx(0.7)

    def test_frozen_controller(self):
        assert adaptive_tax(0.7, 0.9, 0.4, 0.0) == pytest.approx(0.7)

    def test_direct_evaluation(self):
        # 0.5 + 0.1 * (0.8 - 0.4) / 0.4 = 0.6
        assert adaptive_tax(0.5, 0.8, 0.4, 0.1) == pytest.approx(0.6, rel=1e-12)

    def test_floor_at_zero(self):
        assert adaptive_tax(0.01, 0.1, 0.5, 0.5) == 0.0

    @given(tax=st.floats(0, 5), ipi=st.floats(0, 1), target=st.floats(0.05, 0.95))
    @settings(max_examples=300, deadline=None)
    def test_moves_up_iff_above_target(self, tax, ipi, target):
        new = adaptive_tax(tax, ipi, target, 0.05)
        if ipi > target:
            assert new > tax
        elif new > 0.0:  # before the zero clamp binds
            assert new <= tax


class TestScenarioConfig:
    def test_baseline_is_zero_instrument(self):
        spec = scenario_config("baseline")
        assert spec.policy.tax_l == 0.0
        assert spec.policy.fiduciary == 0.0
        assert spec.policy.provenance_boost == 0.0
        assert not spec.policy.adaptive
        assert spec.overrides == {}

    def test_joint_contains_both_single_instruments(self):
        joint = scenario_config("joint").overrides
        pig = scenario_config("pigouvian").overrides
        sub = scenario_config("subsidy").overrides
        for key, value in {**pig, **sub}.items():
            assert joint[key] == value

    def test_all_six_plus_first_best_resolve(self):
        for scenario in SCENARIOS + ("first_best",):
            spec = scenario_config(scenario)
            assert spec.policy.scenario == scenario

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError):
            scenario_config("laissez_faire")

    def test_first_best_assembly(self):
        policy = first_best_policy(0.8, 0.2, 10.0, -0.01)
        assert policy.tax_l == pytest.approx(0.74)
        assert policy.fiduciary == 1.0
        assert policy.provenance_boost > 0


class TestPolicyConfigValidation:
    def test_bounds(self):
        with pytest.raises(ValueError):
            PolicyConfig(tax_l=-0.1)
        with pytest.raises(ValueError):
            PolicyConfig(fiduciary=1.5)
        with pytest.raises(ValueError):
            PolicyConfig(adaptive_eta=0.0, ipi_target=0.5)
        with pytest.raises(ValueError):
            PolicyConfig(adaptive_eta=0.1, ipi_target=1.0)

    def test_adaptive_requires_both_fields(self):
        assert not PolicyConfig(adaptive_eta=0.1).adaptive
        assert PolicyConfig(adaptive_eta=0.1, ipi_target=0.5).adaptive


SMALL = {
    "agents.n_producers": 30,
    "agents.n_consumers": 60,
    "ipi.anchor_m_points": 3,
    "ipi.anchor_gamma_points": 3,
    "ipi.anchor_tax_points": 2,
}


class TestRobustSelect:
    def test_singleton_case(self):
        policy = PolicyConfig(scenario="baseline")
        selection = robust_select(
            [policy], [{"econ.ai_rental": 1.0}], horizon=10,
            base_params=SimParams().with_overrides(SMALL), master_seed=1,
        )
        assert selection.selected_index == 0
        assert selection.selected is policy

    def test_two_by_two_matches_brute_force(self):
        policies = [PolicyConfig(scenario="baseline"),
                    PolicyConfig(scenario="levy", tax_l=0.8)]
        worlds = [{"econ.ai_rental": 0.8}, {"econ.ai_rental": 1.2}]
        selection = robust_select(
            policies, worlds, horizon=30,
            base_params=SimParams().with_overrides(SMALL), master_seed=42,
        )
        worst = [min(row) for row in selection.welfare_matrix]
        brute = max(range(len(policies)), key=lambda i: worst[i])
        assert selection.selected_index == brute

    def test_world_permutation_invariance(self):
        policies = [PolicyConfig(scenario="baseline"),
                    PolicyConfig(scenario="levy", tax_l=0.8)]
        worlds = [{"econ.ai_rental": 0.8}, {"econ.ai_rental": 1.2}]
        base = SimParams().with_overrides(SMALL)
        fwd = robust_select(policies, worlds, 20, base_params=base, master_seed=7)
        rev = robust_select(policies, worlds[::-1], 20, base_params=base, master_seed=7)
        assert fwd.selected_index == rev.selected_index
        assert fwd.welfare_matrix[0][0] == rev.welfare_matrix[0][1]

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            robust_select([], [{}], 10)
        with pytest.raises(ValueError):
            robust_select([PolicyConfig()], [], 10)
