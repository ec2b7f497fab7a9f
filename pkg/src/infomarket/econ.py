"""Closed-form CES production kernels.

Content of type j is produced from AI capital and skilled labor with a
constant elasticity of substitution sigma_j.  Everything here is a pure
function of value types: cost minimization has a closed form, so the module
exposes the optimal factor-demand ratio, the unit cost function, and the
cost share of AI capital (the log-elasticity of unit cost with respect to
the AI rental rate).

The simulator relies on one ordering between the two technologies: AI and
labor are substitutes for low-quality content (sigma_L > 1) and complements
for high-quality content (sigma_H < 1).  `cost_asymmetry_report` checks the
observable consequence of that ordering -- the AI cost share of low-quality
production exceeds the high-quality share -- over a grid of rental rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import AssumptionViolated

# Below this distance from sigma = 1 the CES cost form is numerically
# degenerate and the exact Cobb-Douglas limit is used instead.
COBB_DOUGLAS_EPS = 1e-6


@dataclass(frozen=True)
class CesTechnology:
    """Productivity, input share, and substitution elasticity for one content type.

    ``rho`` (the exponent in the CES aggregator) is derived from the
    elasticity and never stored separately.
    """

    tfp: float
    share: float
    elasticity: float

    def __post_init__(self) -> None:
        if not self.tfp > 0:
            raise ValueError(f"tfp must be positive, got {self.tfp}")
        if not 0 < self.share < 1:
            raise ValueError(f"share must lie in (0, 1), got {self.share}")
        if not self.elasticity > 0:
            raise ValueError(f"elasticity must be positive, got {self.elasticity}")

    @property
    def rho(self) -> float:
        """CES aggregator exponent implied by the elasticity."""
        return (self.elasticity - 1.0) / self.elasticity


@dataclass(frozen=True)
class FactorPrices:
    """Rental rate of AI capital and the skilled-labor wage, both strictly positive."""

    ai_rental: float
    wage: float

    def __post_init__(self) -> None:
        if not self.ai_rental > 0:
            raise ValueError(f"ai_rental must be positive, got {self.ai_rental}")
        if not self.wage > 0:
            raise ValueError(f"wage must be positive, got {self.wage}")


def factor_ratio(tech: CesTechnology, prices: FactorPrices) -> float:
    """Cost-minimizing AI-capital-to-labor ratio.

    K_AI / L = (share / (1 - share))^sigma * (wage / rental)^sigma.
    Homogeneous of degree zero in prices and strictly decreasing in the
    rental rate.
    """
    s = tech.elasticity
    return (tech.share / (1.0 - tech.share)) ** s * (prices.wage / prices.ai_rental) ** s


def unit_cost(tech: CesTechnology, prices: FactorPrices) -> float:
    """Minimum cost of producing one unit of output.

    c = (1/A) * [d^s r^(1-s) + (1-d)^s w^(1-s)]^(1/(1-s)), with the exact
    Cobb-Douglas limit c = (1/A) (r/d)^d (w/(1-d))^(1-d) substituted when
    sigma is within COBB_DOUGLAS_EPS of one.
    """
    d, s = tech.share, tech.elasticity
    r, w = prices.ai_rental, prices.wage
    if abs(s - 1.0) < COBB_DOUGLAS_EPS:
        return (r / d) ** d * (w / (1.0 - d)) ** (1.0 - d) / tech.tfp
    bracket = d**s * r ** (1.0 - s) + (1.0 - d) ** s * w ** (1.0 - s)
    return bracket ** (1.0 / (1.0 - s)) / tech.tfp


def cost_share_ai(tech: CesTechnology, prices: FactorPrices) -> float:
    """Cost share of AI capital, equal to d(log c)/d(log r).

    For sigma near one the shares reduce to the Cobb-Douglas weights.
    """
    d, s = tech.share, tech.elasticity
    r, w = prices.ai_rental, prices.wage
    if abs(s - 1.0) < COBB_DOUGLAS_EPS:
        return d
    num = d**s * r ** (1.0 - s)
    return num / (num + (1.0 - d) ** s * w ** (1.0 - s))


@dataclass(frozen=True)
class CostShareRow:
    """One grid point of the asymmetry check: shares for both types and the verdict."""

    ai_rental: float
    share_h: float
    share_l: float
    asymmetry_holds: bool


def cost_asymmetry_report(
    tech_h: CesTechnology,
    tech_l: CesTechnology,
    price_grid: Iterable[FactorPrices],
) -> list[CostShareRow]:
    """Tabulate s_L vs s_H over a price grid.

    Requires the substitutability ordering sigma_L > 1 > sigma_H; every grid
    point is reported with its own pass flag, failures included.
    """
    if tech_l.elasticity <= 1.0 or tech_h.elasticity >= 1.0:
        raise AssumptionViolated(
            "need sigma_L > 1 > sigma_H, got "
            f"sigma_L={tech_l.elasticity}, sigma_H={tech_h.elasticity}"
        )
    rows = []
    for prices in price_grid:
        s_h = cost_share_ai(tech_h, prices)
        s_l = cost_share_ai(tech_l, prices)
        rows.append(CostShareRow(prices.ai_rental, s_h, s_l, s_l > s_h))
    return rows


def log_cost_elasticity_fd(
    tech: CesTechnology, prices: FactorPrices, step: float = 1e-6
) -> float:
    """Central-difference d(log c)/d(log r); the numerical check on cost_share_ai."""
    r = prices.ai_rental
    up = unit_cost(tech, FactorPrices(r * math.exp(step), prices.wage))
    dn = unit_cost(tech, FactorPrices(r * math.exp(-step), prices.wage))
    return (math.log(up) - math.log(dn)) / (2.0 * step)
