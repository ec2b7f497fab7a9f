"""Behavioral rules for producers, consumers, and the platform.

Producers pick a content type through a logit choice over expected unit
profits; consumers update beliefs from a noisy binary quality signal and
verify when the expected value of resolving uncertainty covers their cost;
the platform nudges its amplification weights and moderation intensity by
projected gradient ascent on profit net of a trust penalty.

All decision rules are pure functions.  Population containers are plain
lists of frozen agents; the simulation loop owns all mutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import numpy as np

from .errors import TaxOnHighQuality

ContentType = Literal["H", "L"]


@dataclass(frozen=True)
class ProducerAgent:
    """A producer with type-specific productivities and a rationality parameter."""

    id: int
    prod_h: float
    prod_l: float
    rationality: float

    def __post_init__(self) -> None:
        if not (self.prod_h > 0 and self.prod_l > 0):
            raise ValueError("productivities must be positive")
        if self.rationality < 0:
            raise ValueError("rationality must be nonnegative")


@dataclass(frozen=True)
class ConsumerAgent:
    """A consumer with a verification cost in [0, k_max] and a risk-aversion draw."""

    id: int
    verify_cost: float
    risk_aversion: float

    def __post_init__(self) -> None:
        if self.verify_cost < 0:
            raise ValueError("verify_cost must be nonnegative")


@dataclass(frozen=True)
class PlatformState:
    """Platform levers and learning parameters.

    ``gamma_h`` / ``gamma_l`` are amplification weights in [0, gamma_max],
    ``moderation`` removes that fraction of amplified low-quality exposure,
    ``revenue_share`` is the platform's cut of ad revenue, ``ad_rate`` the
    revenue per amplified unit.  ``lr_gamma`` / ``lr_mod`` are the gradient
    step sizes and ``trust_price`` the shadow price attached to trust
    erosion in the update rule.
    """

    gamma_h: float
    gamma_l: float
    moderation: float
    revenue_share: float
    ad_rate: float
    lr_gamma: float
    lr_mod: float
    trust_price: float
    gamma_max: float = 2.0

    def __post_init__(self) -> None:
        if not 0 <= self.gamma_h <= self.gamma_max:
            raise ValueError(f"gamma_h out of [0, {self.gamma_max}]: {self.gamma_h}")
        if not 0 <= self.gamma_l <= self.gamma_max:
            raise ValueError(f"gamma_l out of [0, {self.gamma_max}]: {self.gamma_l}")
        if not 0 <= self.moderation <= 1:
            raise ValueError(f"moderation out of [0, 1]: {self.moderation}")
        if not 0 < self.revenue_share < 1:
            raise ValueError(f"revenue_share out of (0, 1): {self.revenue_share}")
        if not self.ad_rate > 0:
            raise ValueError("ad_rate must be positive")
        if self.lr_gamma < 0 or self.lr_mod < 0:
            raise ValueError("learning rates must be nonnegative")
        if self.trust_price < 0:
            raise ValueError("trust_price must be nonnegative")


def producer_choice_prob(profit_h: float, profit_l: float, rationality: float) -> float:
    """Logit probability of choosing high-quality production.

    exp(beta*pi_H) / (exp(beta*pi_H) + exp(beta*pi_L)), evaluated after
    subtracting the larger scaled payoff so neither exponential overflows.
    beta = 0 collapses to a fair coin; beta -> inf approaches the indicator
    of the larger profit.
    """
    a = rationality * profit_h
    b = rationality * profit_l
    m = max(a, b)
    ea = math.exp(a - m)
    eb = math.exp(b - m)
    return ea / (ea + eb)


def unit_profit(
    content_type: ContentType,
    platform: PlatformState,
    cost: float,
    tax: float = 0.0,
) -> float:
    """Profit per unit of content: (1 - theta) * rho * gamma_j - cost - tax.

    The levy applies to low-quality output only; taxing high-quality output
    is rejected rather than silently ignored.
    """
    if content_type == "H":
        if tax > 0:
            raise TaxOnHighQuality("per-unit levy applies to low-quality output only")
        gamma = platform.gamma_h
        wedge = 0.0
    else:
        gamma = platform.gamma_l
        wedge = tax
    return (1.0 - platform.revenue_share) * platform.ad_rate * gamma - cost - wedge


def consumer_posterior(prior_h: float, signal: ContentType, precision: float) -> float:
    """Posterior probability of high quality after one noisy signal.

    The channel is symmetric: the stated precision is the probability the
    signal matches the true type in either direction.
    """
    if not 0 <= prior_h <= 1:
        raise ValueError("prior_h must lie in [0, 1]")
    if not 0.5 <= precision <= 1:
        raise ValueError("precision must lie in [0.5, 1]")
    like_h = precision if signal == "H" else 1.0 - precision
    like_l = 1.0 - precision if signal == "H" else precision
    num = prior_h * like_h
    den = num + (1.0 - prior_h) * like_l
    if den == 0.0:
        return prior_h
    return num / den


def verification_threshold(posterior_h: float, du_h: float, du_l: float) -> float:
    """Cost cutoff below which verification pays: k* = p*dU_H + (1-p)*dU_L."""
    if du_h < 0 or du_l < 0:
        raise ValueError("utility gaps must be nonnegative")
    return posterior_h * du_h + (1.0 - posterior_h) * du_l


def platform_update(
    state: PlatformState,
    grad_profit_gamma: float,
    grad_trust_gamma: float,
    grad_profit_mod: float,
    grad_trust_mod: float,
    grad_profit_gamma_h: float = 0.0,
    grad_trust_gamma_h: float = 0.0,
) -> PlatformState:
    """One projected gradient-ascent step on the platform levers.

    gamma_L <- clamp(gamma_L + eta*(dPi/dgamma_L - lambda*dErosion/dgamma_L)),
    and symmetrically for gamma_H with its own gradients; moderation moves by
    its own step size xi.  Trust gradients are passed as one-tick-ahead trust
    *erosion* per unit increase of the lever (a positive value means the
    lever destroys trust), so the lambda term brakes pollution-amplifying
    moves and rewards trust-protecting ones.
    """
    gl = state.gamma_l + state.lr_gamma * (
        grad_profit_gamma - state.trust_price * grad_trust_gamma
    )
    gh = state.gamma_h + state.lr_gamma * (
        grad_profit_gamma_h - state.trust_price * grad_trust_gamma_h
    )
    m = state.moderation + state.lr_mod * (
        grad_profit_mod - state.trust_price * grad_trust_mod
    )
    return replace(
        state,
        gamma_l=min(max(gl, 0.0), state.gamma_max),
        gamma_h=min(max(gh, 0.0), state.gamma_max),
        moderation=min(max(m, 0.0), 1.0),
    )


def draw_producers(
    n: int,
    rng: np.random.Generator,
    *,
    mean_prod_h: float,
    mean_prod_l: float,
    log_sd: float,
    rationality: float,
) -> list[ProducerAgent]:
    """Draw a producer population with lognormal productivities.

    Draws are lognormal(0, log_sd) rescaled by exp(-log_sd^2/2) so the
    population mean of each productivity equals its configured target.
    """
    correction = math.exp(-0.5 * log_sd**2)
    a_h = rng.lognormal(0.0, log_sd, size=n) * mean_prod_h * correction
    a_l = rng.lognormal(0.0, log_sd, size=n) * mean_prod_l * correction
    return [
        ProducerAgent(id=i, prod_h=float(a_h[i]), prod_l=float(a_l[i]), rationality=rationality)
        for i in range(n)
    ]


def draw_consumers(
    n: int,
    rng: np.random.Generator,
    *,
    k_max: float,
    risk_a: float = 2.0,
    risk_b: float = 3.0,
) -> list[ConsumerAgent]:
    """Draw consumers with uniform verification costs on [0, k_max] and Beta(2,3) risk aversion."""
    costs = rng.uniform(0.0, k_max, size=n)
    risk = rng.beta(risk_a, risk_b, size=n)
    return [
        ConsumerAgent(id=i, verify_cost=float(costs[i]), risk_aversion=float(risk[i]))
        for i in range(n)
    ]


def verification_costs(consumers: Sequence[ConsumerAgent]) -> np.ndarray:
    """Sorted verification-cost vector of a consumer population."""
    return np.sort(np.array([c.verify_cost for c in consumers], dtype=float))
