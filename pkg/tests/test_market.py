"""Market-clearing tests: pollution, the verification fixed point, trust, welfare."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infomarket.agents import PlatformState, consumer_posterior, verification_threshold
from infomarket.config import SimParams
from infomarket.errors import NoConvergence
from infomarket.market import (
    ConsumerPool,
    MarketState,
    TrustParams,
    harmful_exposure,
    pollution_density,
    signal_precision,
    solve_verification_fixed_point,
    static_equilibrium_welfare,
    trust_update,
    welfare_anchors,
    welfare_value,
)


def make_platform(**kwargs) -> PlatformState:
    defaults = dict(
        gamma_h=1.0, gamma_l=1.0, moderation=0.0, revenue_share=0.25,
        ad_rate=4.0, lr_gamma=0.05, lr_mod=0.05, trust_price=50.0,
    )
    defaults.update(kwargs)
    return PlatformState(**defaults)


class TestPollutionDensity:
    def test_no_low_quality_means_clean(self):
        assert pollution_density(5.0, 0.0, make_platform()) == 0.0

    def test_full_moderation_means_clean(self):
        assert pollution_density(1.0, 50.0, make_platform(moderation=1.0)) == 0.0

    def test_symmetric_case(self):
        assert pollution_density(3.0, 3.0, make_platform()) == pytest.approx(0.5)

    def test_empty_market_convention(self):
        assert pollution_density(0.0, 0.0, make_platform()) == 0.0

    @given(
        q_h=st.floats(0, 1e4), q_l=st.floats(0, 1e4),
        gamma_h=st.floats(0, 2), gamma_l=st.floats(0, 2), m=st.floats(0, 1),
    )
    @settings(max_examples=300, deadline=None)
    def test_bounds_and_zero_iff(self, q_h, q_l, gamma_h, gamma_l, m):
        platform = make_platform(gamma_h=gamma_h, gamma_l=gamma_l, moderation=m)
        rho = pollution_density(q_h, q_l, platform)
        assert 0.0 <= rho <= 1.0
        effective_low = gamma_l * (1 - m) * q_l
        if effective_low == 0.0:
            assert rho == 0.0
        elif effective_low > 1e-12:  # above float underflow scales
            assert rho > 0.0


class TestSignalPrecision:
    def test_clean_baseline(self):
        assert signal_precision(0.0, 0.0, 0.0) == pytest.approx(0.85)

    def test_floor_clamp(self):
        assert signal_precision(1.0, 0.0, 0.0, kappa_pollution=5.0) == 0.5

    def test_ceiling_clamp(self):
        assert signal_precision(0.0, 1.0, 0.5) == 1.0

    def test_default_affine_form(self):
        # 0.85 - 0.3 * 0.5 + 0.1 * 0.4 = 0.74
        assert signal_precision(0.5, 0.4, 0.0) == pytest.approx(0.74, rel=1e-12)

    def test_interior_monotonicity(self):
        assert signal_precision(0.6, 0.2, 0.0) < signal_precision(0.4, 0.2, 0.0)
        assert signal_precision(0.4, 0.4, 0.0) > signal_precision(0.4, 0.1, 0.0)


class TestConsumerPool:
    def test_cdf_matches_step_ecdf_at_knots(self):
        pool = ConsumerPool([1.0, 2.0, 2.0, 4.0])
        assert pool.cdf(1.0) == pytest.approx(0.25)
        assert pool.cdf(2.0) == pytest.approx(0.75)
        assert pool.cdf(4.0) == 1.0
        assert pool.cdf(5.0) == 1.0
        assert pool.cdf(0.0) == 0.0

    def test_cdf_is_continuous_between_knots(self):
        pool = ConsumerPool([1.0, 3.0])
        assert pool.cdf(2.0) == pytest.approx(0.75)  # linear between (1, .5) and (3, 1)

    def test_spend_accumulates_covered_costs(self):
        pool = ConsumerPool([0.5, 1.0, 2.0])
        assert pool.spend(1.0) == pytest.approx(1.5)
        assert pool.spend(10.0) == pytest.approx(3.5)
        assert pool.spend(0.0) == 0.0

    def test_empty_population_rejected(self):
        with pytest.raises(ValueError):
            ConsumerPool([])


class TestVerificationFixedPoint:
    def test_free_verification_saturates(self, params):
        pool = ConsumerPool([0.0] * 10)
        v, _ = solve_verification_fixed_point(0.5, pool, 0.0, params=params)
        assert v == pytest.approx(1.0)

    def test_no_benefit_means_zero_cost_verifiers_only(self, params):
        pool = ConsumerPool([0.0, 0.0, 1.0, 2.0])
        v, _ = solve_verification_fixed_point(0.5, pool, 0.0, params=params,
                                              du_h=0.0, du_l=0.0)
        assert v == pytest.approx(0.5)  # the two zero-cost consumers

    def test_residual_meets_tolerance(self, params, populations):
        pool = populations.consumers
        v, precision = solve_verification_fixed_point(0.6, pool, 0.0, params=params)
        pi = signal_precision(0.6, v, 0.0)
        post = consumer_posterior(1.0 - 0.6, "H", pi)
        mapped = pool.cdf(verification_threshold(post, 0.5, 2.0))
        assert abs(mapped - v) < 1e-8
        assert precision == pytest.approx(pi)

    def test_grid_scan_oracle_agreement(self, params, populations):
        pool = populations.consumers

        def mapping(v: float) -> float:
            pi = signal_precision(0.6, v, 0.0)
            post = consumer_posterior(0.4, "H", pi)
            return pool.cdf(verification_threshold(post, 0.5, 2.0))

        grid = np.linspace(0.0, 1.0, 100_001)
        residual = np.array([mapping(x) for x in grid]) - grid
        idx = int(np.argmax(residual < 0))
        # linear interpolation of the sign crossing
        x0, x1 = grid[idx - 1], grid[idx]
        y0, y1 = residual[idx - 1], residual[idx]
        crossing = x0 + (x1 - x0) * y0 / (y0 - y1)
        v, _ = solve_verification_fixed_point(0.6, pool, 0.0, params=params)
        assert v == pytest.approx(crossing, abs=1e-4)

    def test_damped_iterates_stay_bounded(self, params, populations):
        for rho in np.linspace(0.0, 1.0, 21):
            v, _ = solve_verification_fixed_point(float(rho), populations.consumers,
                                                  0.0, params=params)
            assert 0.0 <= v <= 1.0

    def test_exhausted_budget_raises(self, populations):
        strict = SimParams().with_overrides({"market.fp_tol": 0.0, "market.fp_max_iter": 50})
        with pytest.raises(NoConvergence):
            solve_verification_fixed_point(0.6, populations.consumers, 0.0, params=strict)


class TestTrustUpdate:
    CFG = TrustParams(decay=0.05, pollution_hit=0.2, repair_gain=1.0,
                      repair_flow=0.0, t_max=1.0)

    def test_pure_decay(self):
        assert trust_update(0.8, 0.0, 0.0, self.CFG) == pytest.approx(0.8 * 0.95)

    def test_lower_clamp(self):
        assert trust_update(0.0, 1.0, 10.0, self.CFG) == 0.0

    def test_single_euler_step(self):
        cfg = TrustParams(decay=0.05, pollution_hit=0.2, repair_gain=1.0,
                          repair_flow=0.01, t_max=1.0)
        got = trust_update(0.5, 0.5, 1.0, cfg)
        assert got == pytest.approx(0.385, rel=1e-12)

    @given(
        trust=st.floats(0, 1), i1=st.floats(0, 1), flow=st.floats(0, 100),
        decay=st.floats(0.01, 0.99), hit=st.floats(0.001, 5.0),
        gain=st.floats(0, 5), flow_r=st.floats(0, 1),
    )
    @settings(max_examples=300, deadline=None)
    def test_confinement(self, trust, i1, flow, decay, hit, gain, flow_r):
        cfg = TrustParams(decay=decay, pollution_hit=hit, repair_gain=gain,
                          repair_flow=flow_r, t_max=1.0)
        assert 0.0 <= trust_update(trust, i1, flow, cfg) <= 1.0


class TestWelfare:
    def test_empty_market_is_zero(self, params):
        w = welfare_value(
            q_h=0.0, q_l=0.0, verify_rate=0.0, precision=0.85, trust=0.0,
            platform=make_platform(), producer_profit=0.0, platform_profit=0.0,
            verification_spend=0.0, params=params,
        )
        assert w == 0.0

    def test_exactly_linear_in_trust_price(self, params):
        kwargs = dict(
            q_h=10.0, q_l=20.0, verify_rate=0.3, precision=0.7, trust=0.4,
            platform=make_platform(), producer_profit=15.0, platform_profit=12.0,
            verification_spend=3.0,
        )
        doubled = params.with_overrides({"welfare.lambda_trust": 20.0})
        base = welfare_value(params=params, **kwargs)
        more = welfare_value(params=doubled, **kwargs)
        assert more - base == pytest.approx(10.0 * 0.4, rel=1e-12)

    def test_exactly_linear_in_value_coefficient(self, params):
        kwargs = dict(
            q_h=10.0, q_l=20.0, verify_rate=0.3, precision=0.7, trust=0.4,
            platform=make_platform(), producer_profit=15.0, platform_profit=12.0,
            verification_spend=3.0,
        )
        doubled = params.with_overrides({"welfare.value_h": 2.0})
        base = welfare_value(params=params, **kwargs)
        more = welfare_value(params=doubled, **kwargs)
        assert more - base == pytest.approx(1.0 * 1.0 * 10.0, rel=1e-12)

    def test_harmful_exposure_components(self):
        platform = make_platform(gamma_l=2.0, moderation=0.25)
        x = harmful_exposure(10.0, platform, verify_rate=0.5, precision=0.8)
        assert x == pytest.approx(2.0 * 0.75 * 10.0 * 0.5 * 0.2, rel=1e-12)


class TestMarketStateInvariants:
    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            MarketState(tick=0, q_h=0, q_l=0, pollution=1.2, verify_rate=0,
                        precision=0.85, trust=0.5, welfare=0)
        with pytest.raises(ValueError):
            MarketState(tick=0, q_h=0, q_l=0, pollution=0, verify_rate=0,
                        precision=0.4, trust=0.5, welfare=0)


class TestAnchors:
    def test_planner_beats_worst_corner(self, populations, params):
        w_so, w_min = welfare_anchors(populations, params)
        assert w_so > w_min

    def test_static_corner_is_reproducible(self, populations, params):
        platform = make_platform(gamma_l=2.0, gamma_h=1.0, moderation=0.0)
        a = static_equilibrium_welfare(populations, platform, params)
        b = static_equilibrium_welfare(populations, platform, params)
        assert a == b
