"""Policy instruments: the corrective levy, fiduciary blending, provenance,
the adaptive tax controller, robust max-min selection, and scenario presets.

Three instruments target the three failures: a per-unit levy on low-quality
output prices in its marginal social damage, provenance standards raise
public signal precision, and a fiduciary duty blends social value into the
platform's objective.  The adaptive rule retunes the levy each tick from
the index reading; robust selection picks the policy with the best worst
case across candidate worlds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import ConfigError

SCENARIOS = ("baseline", "pigouvian", "subsidy", "joint", "tech", "efficiency")


@dataclass(frozen=True)
class PolicyConfig:
    """Instrument settings for one run."""

    tax_l: float = 0.0
    fiduciary: float = 0.0
    provenance_boost: float = 0.0
    adaptive_eta: float | None = None
    ipi_target: float | None = None
    scenario: str = "baseline"

    def __post_init__(self) -> None:
        if self.tax_l < 0:
            raise ValueError("tax_l must be nonnegative")
        if not 0 <= self.fiduciary <= 1:
            raise ValueError("fiduciary must lie in [0, 1]")
        if self.provenance_boost < 0:
            raise ValueError("provenance_boost must be nonnegative")
        if self.adaptive_eta is not None and self.adaptive_eta <= 0:
            raise ValueError("adaptive_eta must be positive")
        if self.ipi_target is not None and not 0 < self.ipi_target < 1:
            raise ValueError("ipi_target must lie in (0, 1)")

    @property
    def adaptive(self) -> bool:
        return self.adaptive_eta is not None and self.ipi_target is not None


def pigouvian_tax(
    marginal_harm: float,
    moderation: float,
    trust_price: float,
    trust_sensitivity: float,
) -> float:
    """Per-unit levy equal to marginal social damage.

    tau = d'(Q_L) * (1 - m) + lambda * |dT/dQ_L|; the trust sensitivity is
    nonpositive (pollution erodes trust) and enters in magnitude.
    """
    if marginal_harm < 0:
        raise ValueError("marginal_harm must be nonnegative")
    if not 0 <= moderation <= 1:
        raise ValueError("moderation must lie in [0, 1]")
    if trust_sensitivity > 0:
        raise ValueError("trust_sensitivity must be nonpositive")
    return marginal_harm * (1.0 - moderation) + trust_price * abs(trust_sensitivity)


def fiduciary_objective(
    platform_profit: float, value_h: float, harm_l: float, alpha: float
) -> float:
    """Platform objective under a fiduciary duty of intensity alpha.

    (1 - alpha) * profit + alpha * (consumed value - harm); affine in alpha.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    return (1.0 - alpha) * platform_profit + alpha * (value_h - harm_l)


def adaptive_tax(tax_prev: float, ipi_prev: float, target: float, eta: float) -> float:
    """State-contingent levy update, floored at zero.

    tau_t = tau_{t-1} + eta * (IPI_{t-1} - target) / target.  The rule can
    drive the levy negative; subsidizing low-quality output contradicts its
    purpose, so the result is clamped at zero.
    """
    if tax_prev < 0:
        raise ValueError("tax_prev must be nonnegative")
    if not 0 <= ipi_prev <= 1:
        raise ValueError("ipi_prev must lie in [0, 1]")
    if not 0 < target < 1:
        raise ValueError("target must lie in (0, 1)")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    return max(0.0, tax_prev + eta * (ipi_prev - target) / target)


@dataclass(frozen=True)
class ScenarioSpec:
    """A policy preset plus the world-parameter overrides it rides on."""

    policy: PolicyConfig
    overrides: dict[str, Any] = field(default_factory=dict)
    note: str = ""


def scenario_config(scenario: str) -> ScenarioSpec:
    """Preset for one named intervention scenario.

    The six comparison scenarios implement the levy as a revenue-share
    increase (theta override), a verification subsidy (lower k_max), their
    union, a detection-capability growth boost, and a high-quality
    efficiency boost; override magnitudes are artifact defaults.  The extra
    "first_best" preset assembles the full instrument triple.
    """
    presets: dict[str, ScenarioSpec] = {
        "baseline": ScenarioSpec(PolicyConfig(scenario="baseline"), {}, "no intervention"),
        "pigouvian": ScenarioSpec(
            PolicyConfig(scenario="pigouvian"),
            {"platform.revenue_share": 0.35},
            "levy proxied by raised revenue share (theta 0.25 -> 0.35)",
        ),
        "subsidy": ScenarioSpec(
            PolicyConfig(scenario="subsidy"),
            {"agents.k_max": 2.0},
            "verification subsidy (k_max 4.0 -> 2.0)",
        ),
        "joint": ScenarioSpec(
            PolicyConfig(scenario="joint"),
            {"platform.revenue_share": 0.35, "agents.k_max": 2.0},
            "revenue-share levy plus verification subsidy",
        ),
        "tech": ScenarioSpec(
            PolicyConfig(scenario="tech"),
            {"ipi.cap_det_growth": 0.03},
            "detection-capability growth boost (1%/tick -> 3%/tick)",
        ),
        "efficiency": ScenarioSpec(
            PolicyConfig(scenario="efficiency"),
            {"agents.mean_prod_h": 2.6},
            "high-quality productivity boost (mean 2.0 -> 2.6)",
        ),
        "first_best": ScenarioSpec(
            PolicyConfig(scenario="first_best", tax_l=1.0, fiduciary=1.0, provenance_boost=0.05),
            {},
            "levy at planner-estimated marginal damage + provenance + full fiduciary duty",
        ),
    }
    try:
        return presets[scenario]
    except KeyError:
        raise ConfigError(
            f"unknown scenario {scenario!r}; expected one of {SCENARIOS + ('first_best',)}"
        ) from None


@dataclass(frozen=True)
class RobustSelection:
    """Outcome of max-min policy selection across candidate worlds."""

    selected: PolicyConfig
    selected_index: int
    welfare_matrix: tuple[tuple[float, ...], ...]  # [policy][world] final-window welfare
    ipi_matrix: tuple[tuple[float, ...], ...]
    failures: tuple[tuple[int, int], ...]  # (policy, world) cells that failed


def robust_select(
    policies: Sequence[PolicyConfig],
    worlds: Sequence[dict[str, Any]],
    horizon: int,
    *,
    base_params=None,
    master_seed: int = 42,
    jobs: int = 1,
) -> RobustSelection:
    """Pick the policy whose worst-case welfare across worlds is largest.

    Every (policy, world) cell is run deterministically for the given
    horizon; a policy with any failed cell is disqualified (its worst case
    is failure).  Ties break toward the lower mean final-window index across
    worlds, then toward list order.  Delegates cell execution to the harness.
    """
    from .harness import robust_cells

    if not policies or not worlds:
        raise ValueError("policies and worlds must be nonempty")
    welfare, ipi, failures = robust_cells(
        policies, worlds, horizon, base_params=base_params, master_seed=master_seed, jobs=jobs
    )
    failed_policies = {p for p, _ in failures}
    best_idx: int | None = None
    best_key: tuple[float, float] | None = None
    for i in range(len(policies)):
        if i in failed_policies:
            continue
        key = (min(welfare[i]), -sum(ipi[i]) / len(ipi[i]))
        if best_key is None or key > best_key:
            best_key = key
            best_idx = i
    if best_idx is None:
        raise RuntimeError("every candidate policy failed in at least one world")
    return RobustSelection(
        selected=policies[best_idx],
        selected_index=best_idx,
        welfare_matrix=tuple(tuple(row) for row in welfare),
        ipi_matrix=tuple(tuple(row) for row in ipi),
        failures=tuple(failures),
    )


def first_best_policy(marginal_harm: float, moderation: float, trust_price: float,
                      trust_sensitivity: float, provenance_boost: float = 0.05) -> PolicyConfig:
    """Assemble the instrument triple at planner-estimated magnitudes."""
    tax = pigouvian_tax(marginal_harm, moderation, trust_price, trust_sensitivity)
    return PolicyConfig(
        tax_l=tax,
        fiduciary=1.0,
        provenance_boost=provenance_boost,
        scenario="first_best",
    )
