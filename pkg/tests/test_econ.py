"""CES kernel tests: closed forms against high-precision and brute-force oracles."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infomarket.econ import (
    AssumptionViolated,
    CesTechnology,
    FactorPrices,
    cost_asymmetry_report,
    cost_share_ai,
    factor_ratio,
    log_cost_elasticity_fd,
    unit_cost,
)

mp.mp.dps = 50

TECH_H = CesTechnology(tfp=1.0, share=0.35, elasticity=0.75)
TECH_L = CesTechnology(tfp=1.0, share=0.65, elasticity=1.5)
BASE_PRICES = FactorPrices(ai_rental=1.0, wage=8.0)

# Frozen 50-digit oracle values (recomputed below to keep the oracle honest).
FACTOR_RATIO_L = 57.266804350046216833
UNIT_COST_L = 2.803374574213722369
SHARE_H = 0.27207113122645575509
SHARE_L = 0.87742620341738341863


def mp_factor_ratio(share, sigma, r, w):
    share, sigma, r, w = map(mp.mpf, (str(share), str(sigma), str(r), str(w)))
    return (share / (1 - share)) ** sigma * (w / r) ** sigma


def mp_unit_cost(tfp, share, sigma, r, w):
    tfp, share, sigma, r, w = map(mp.mpf, (str(tfp), str(share), str(sigma), str(r), str(w)))
    bracket = share**sigma * r ** (1 - sigma) + (1 - share) ** sigma * w ** (1 - sigma)
    return bracket ** (1 / (1 - sigma)) / tfp


def mp_cost_share(share, sigma, r, w):
    share, sigma, r, w = map(mp.mpf, (str(share), str(sigma), str(r), str(w)))
    num = share**sigma * r ** (1 - sigma)
    return num / (num + (1 - share) ** sigma * w ** (1 - sigma))


class TestFactorRatio:
    def test_symmetric_inputs_give_unit_ratio(self):
        tech = CesTechnology(tfp=1.0, share=0.5, elasticity=1.5)
        assert factor_ratio(tech, FactorPrices(1.0, 1.0)) == pytest.approx(1.0)

    def test_against_high_precision_oracle(self):
        got = factor_ratio(TECH_L, BASE_PRICES)
        assert got == pytest.approx(FACTOR_RATIO_L, rel=1e-12)
        assert float(mp_factor_ratio(0.65, 1.5, 1, 8)) == pytest.approx(
            FACTOR_RATIO_L, rel=1e-15
        )

    def test_price_homogeneity_degree_zero(self):
        base = factor_ratio(TECH_L, BASE_PRICES)
        scaled = factor_ratio(TECH_L, FactorPrices(2.0, 16.0))
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_decreasing_in_rental(self):
        lo = factor_ratio(TECH_L, FactorPrices(0.5, 8.0))
        hi = factor_ratio(TECH_L, FactorPrices(2.0, 8.0))
        assert lo > hi


class TestUnitCost:
    def test_tfp_doubles_cost_halves(self):
        doubled = CesTechnology(tfp=2.0, share=0.65, elasticity=1.5)
        assert unit_cost(doubled, BASE_PRICES) == pytest.approx(
            unit_cost(TECH_L, BASE_PRICES) / 2.0, rel=1e-12
        )

    def test_against_high_precision_oracle(self):
        got = unit_cost(TECH_L, BASE_PRICES)
        assert got == pytest.approx(UNIT_COST_L, rel=1e-12)
        assert float(mp_unit_cost(1, 0.65, 1.5, 1, 8)) == pytest.approx(UNIT_COST_L, rel=1e-15)

    @given(
        k=st.floats(0.01, 100),
        share=st.floats(0.05, 0.95),
        sigma=st.floats(0.2, 3.0).filter(lambda s: abs(s - 1) > 1e-3),
        r=st.floats(0.1, 10),
        w=st.floats(0.1, 10),
    )
    @settings(max_examples=200, deadline=None)
    def test_price_homogeneity_degree_one(self, k, share, sigma, r, w):
        tech = CesTechnology(tfp=1.0, share=share, elasticity=sigma)
        base = unit_cost(tech, FactorPrices(r, w))
        scaled = unit_cost(tech, FactorPrices(k * r, k * w))
        assert scaled == pytest.approx(k * base, rel=1e-12)

    def test_monotone_in_each_price(self):
        for tech in (TECH_H, TECH_L):
            c = unit_cost(tech, BASE_PRICES)
            assert unit_cost(tech, FactorPrices(1.2, 8.0)) > c
            assert unit_cost(tech, FactorPrices(1.0, 9.0)) > c

    def test_cobb_douglas_limit_is_continuous(self):
        tech_exact = CesTechnology(tfp=1.3, share=0.4, elasticity=1.0)
        cd = (1.0 / 0.4) ** 0.4 * (8.0 / 0.6) ** 0.6 / 1.3
        assert unit_cost(tech_exact, BASE_PRICES) == pytest.approx(cd, rel=1e-12)
        near = CesTechnology(tfp=1.3, share=0.4, elasticity=1.0 + 5e-5)
        assert unit_cost(near, BASE_PRICES) == pytest.approx(cd, rel=1e-3)

    def test_brute_force_grid_minimization(self):
        # Independent oracle: derivative-free cost minimization over the
        # feasible input set producing one output unit.
        rng = np.random.default_rng(7)
        for _ in range(5):
            sigma = float(rng.uniform(0.3, 2.5))
            if abs(sigma - 1.0) < 1e-3:
                sigma += 0.01
            tech = CesTechnology(
                tfp=float(rng.uniform(0.5, 2.0)),
                share=float(rng.uniform(0.15, 0.85)),
                elasticity=sigma,
            )
            prices = FactorPrices(float(rng.uniform(0.3, 4.0)), float(rng.uniform(0.3, 8.0)))
            best = _grid_min_cost(tech, prices)
            assert unit_cost(tech, prices) == pytest.approx(best, rel=1e-6)

    def test_shephard_consistency_via_factor_ratio(self):
        # Inputs built from the optimal ratio, scaled to one output unit,
        # must cost exactly the unit cost.
        rng = np.random.default_rng(13)
        for _ in range(5):
            sigma = float(rng.uniform(0.3, 2.5))
            if abs(sigma - 1.0) < 1e-3:
                sigma += 0.01
            tech = CesTechnology(
                tfp=float(rng.uniform(0.5, 2.0)),
                share=float(rng.uniform(0.15, 0.85)),
                elasticity=sigma,
            )
            prices = FactorPrices(float(rng.uniform(0.3, 4.0)), float(rng.uniform(0.3, 8.0)))
            k = factor_ratio(tech, prices)
            rho = tech.rho
            labor = 1.0 / (tech.tfp * (tech.share * k**rho + (1.0 - tech.share)) ** (1.0 / rho))
            cost = prices.ai_rental * k * labor + prices.wage * labor
            assert cost == pytest.approx(unit_cost(tech, prices), rel=1e-9)


def _grid_min_cost(tech: CesTechnology, prices: FactorPrices, points: int = 4000) -> float:
    rho = tech.rho
    target = 1.0 / tech.tfp  # aggregator value producing one unit

    def cost_over(k_grid: np.ndarray) -> tuple[float, float]:
        inner = (target**rho - tech.share * k_grid**rho) / (1.0 - tech.share)
        with np.errstate(invalid="ignore"):
            labor = np.where(inner > 0, inner ** (1.0 / rho), np.nan)
        total = prices.ai_rental * k_grid + prices.wage * labor
        idx = int(np.nanargmin(total))
        return float(total[idx]), float(k_grid[idx])

    coarse = np.logspace(-8, 8, points)
    best, k_at = cost_over(coarse)
    step = 16.0 / points
    fine = np.logspace(math.log10(k_at) - 2 * step, math.log10(k_at) + 2 * step, points)
    refined, k_at = cost_over(fine)
    step = 4 * step / points
    finer = np.logspace(math.log10(k_at) - 2 * step, math.log10(k_at) + 2 * step, points)
    return min(best, refined, cost_over(finer)[0])


class TestCostShare:
    def test_symmetric_share_at_equal_prices(self):
        for sigma in (0.6, 1.5, 2.2):
            tech = CesTechnology(tfp=1.0, share=0.5, elasticity=sigma)
            assert cost_share_ai(tech, FactorPrices(1.0, 1.0)) == pytest.approx(0.5)

    def test_table_parameters_against_oracle(self):
        s_h = cost_share_ai(TECH_H, BASE_PRICES)
        s_l = cost_share_ai(TECH_L, BASE_PRICES)
        assert s_h == pytest.approx(SHARE_H, rel=1e-12)
        assert s_l == pytest.approx(SHARE_L, rel=1e-12)
        assert s_l > s_h
        assert float(mp_cost_share(0.35, 0.75, 1, 8)) == pytest.approx(SHARE_H, rel=1e-15)
        assert float(mp_cost_share(0.65, 1.5, 1, 8)) == pytest.approx(SHARE_L, rel=1e-15)

    def test_matches_log_elasticity_finite_difference(self):
        for tech in (TECH_H, TECH_L):
            for r in (0.6, 1.0, 1.4):
                prices = FactorPrices(r, 8.0)
                fd = log_cost_elasticity_fd(tech, prices, step=1e-6)
                assert fd == pytest.approx(cost_share_ai(tech, prices), abs=1e-5)

    def test_increasing_in_share_parameter(self):
        shares = [cost_share_ai(CesTechnology(1.0, d, 1.5), BASE_PRICES)
                  for d in (0.2, 0.4, 0.6, 0.8)]
        assert all(a < b for a, b in zip(shares, shares[1:]))

    @given(
        delta_h=st.floats(0.15, 0.7),
        delta_gap=st.floats(0, 0.25),
        sigma_h=st.floats(0.2, 0.95),
        sigma_l=st.floats(1.05, 2.5),
        r=st.floats(0.3, 2.0),
        w=st.floats(2.0, 10.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_ordering_in_calibration_region(
        self, delta_h, delta_gap, sigma_h, sigma_l, r, w
    ):
        # Substitutable low-quality technology carries the larger AI cost
        # share whenever labor is dear relative to the high-quality input mix.
        delta_l = min(delta_h + delta_gap, 0.9)
        if w / r < (1.0 - delta_h) / delta_h:
            return  # outside the calibration region the ordering can flip
        prices = FactorPrices(r, w)
        s_l = cost_share_ai(CesTechnology(1.0, delta_l, sigma_l), prices)
        s_h = cost_share_ai(CesTechnology(1.0, delta_h, sigma_h), prices)
        assert s_l >= s_h - 1e-12


class TestCostAsymmetryReport:
    def test_table_grid_all_pass(self):
        grid = [FactorPrices(r, 8.0) for r in (0.6, 0.8, 1.0, 1.2, 1.4)]
        rows = cost_asymmetry_report(TECH_H, TECH_L, grid)
        assert len(rows) == 5
        assert all(row.asymmetry_holds for row in rows)
        assert all(row.share_l > row.share_h for row in rows)

    def test_degenerate_pair_rejected(self):
        same = CesTechnology(tfp=1.0, share=0.5, elasticity=1.2)
        with pytest.raises(AssumptionViolated):
            cost_asymmetry_report(same, same, [BASE_PRICES])

    def test_boundary_failure_reported_not_hidden(self):
        tech_h = CesTechnology(tfp=1.0, share=0.5, elasticity=0.75)
        tech_l = CesTechnology(tfp=1.0, share=0.5, elasticity=1.5)
        (row,) = cost_asymmetry_report(tech_h, tech_l, [FactorPrices(1.0, 1.0)])
        assert row.share_h == pytest.approx(0.5)
        assert row.share_l == pytest.approx(0.5)
        assert not row.asymmetry_holds


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"tfp": 0.0, "share": 0.5, "elasticity": 1.5},
            {"tfp": 1.0, "share": 0.0, "elasticity": 1.5},
            {"tfp": 1.0, "share": 1.0, "elasticity": 1.5},
            {"tfp": 1.0, "share": 0.5, "elasticity": 0.0},
        ],
    )
    def test_technology_bounds(self, kwargs):
        with pytest.raises(ValueError):
            CesTechnology(**kwargs)

    def test_prices_positive(self):
        with pytest.raises(ValueError):
            FactorPrices(0.0, 1.0)
        with pytest.raises(ValueError):
            FactorPrices(1.0, -1.0)
