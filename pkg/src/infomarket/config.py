"""Simulation parameters, the flat dotted-key config surface, and file parsing.

Every tunable lives in one of the section dataclasses below and is
addressable as ``section.field`` from config files and CLI flags alike.
Precedence is CLI > file > defaults.  Config files are flat text::

    # comment
    econ.ai_rental = 0.8
    platform.trust_price = 300

`SimParams.resolved_text` renders the fully-expanded configuration (the
form written next to every experiment's results) and `config_hash` derives
the run fingerprint from it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ConfigError


@dataclass(frozen=True)
class EconParams:
    sigma_h: float = 0.75
    sigma_l: float = 1.5
    delta_h: float = 0.35
    delta_l: float = 0.65
    tfp_h: float = 1.0
    tfp_l: float = 1.0
    ai_rental: float = 1.0
    wage: float = 8.0
    # Reference rental rate; generation capability compounds only below it.
    ai_rental_baseline: float = 1.0


@dataclass(frozen=True)
class AgentParams:
    n_producers: int = 80
    n_consumers: int = 200
    rationality: float = 1.0
    # At unit mean productivity, high-quality output never breaks even at
    # baseline prices (unit cost 7.8 vs max attainable revenue 6.0), so the
    # whole population floods low quality; 2.0 puts the margin inside the
    # productivity distribution.
    mean_prod_h: float = 2.0
    mean_prod_l: float = 1.2
    prod_log_sd: float = 0.5
    k_max: float = 4.0
    risk_a: float = 2.0
    risk_b: float = 3.0
    du_h: float = 0.5
    du_l: float = 2.0


@dataclass(frozen=True)
class PlatformParams:
    gamma_init: float = 1.0
    gamma_max: float = 2.0
    moderation_init: float = 0.0
    revenue_share: float = 0.25
    ad_rate: float = 4.0
    lr_gamma: float = 0.05
    lr_mod: float = 0.05
    trust_price: float = 50.0
    moderation_cost: float = 2.0
    fd_step: float = 1e-3
    # Platform-side monetization premium on amplified low-quality exposure:
    # clickbait engages better per amplified unit.  Producers' margins are
    # unaffected (they sell amplification, not engagement).
    engagement_bias: float = 1.3


@dataclass(frozen=True)
class MarketParams:
    pi_base: float = 0.85
    kappa_pollution: float = 0.3
    kappa_verify: float = 0.1
    fp_tol: float = 1e-8
    fp_damping: float = 0.5
    fp_max_iter: int = 10_000
    fp_start: float = 0.5


@dataclass(frozen=True)
class TrustParamsCfg:
    decay: float = 0.05
    pollution_hit: float = 0.02
    repair_gain: float = 3.0
    repair_flow: float = 0.01
    t_max: float = 1.0
    initial: float = 0.5


@dataclass(frozen=True)
class WelfareParams:
    value_h: float = 1.0
    harm_lin: float = 0.8
    harm_quad: float = 0.1
    lambda_trust: float = 10.0


@dataclass(frozen=True)
class IpiParams:
    w_pollution: float = 0.35
    w_deadweight: float = 0.25
    w_trust: float = 0.25
    w_tech: float = 0.15
    endogenous_weights: bool = False
    weight_perturbation: float = 0.01
    mu_tech: float = 0.0
    sigma_tech: float = 1.0
    cap_gen_growth: float = 0.02
    cap_det_growth: float = 0.01
    # Exponent linking generation capability to the effective low-quality cost.
    kappa_gen: float = 0.5
    anchor_m_points: int = 9
    anchor_gamma_points: int = 5
    anchor_tax_points: int = 5
    anchor_tax_max: float = 2.0


@dataclass(frozen=True)
class ProxyParams:
    items_per_type: int = 5
    impression_scale: float = 100.0
    harm_rate_clickbait: float = 0.05
    harm_rate_misinformation: float = 0.02
    harm_rate_fraud: float = 0.004
    sev_clickbait: float = 1.0
    sev_misinformation: float = 3.0
    sev_fraud: float = 10.0
    churn_base_floor: float = 0.02
    churn_trust_slope: float = 0.10
    churn_gap_coef: float = 1.0
    detector_acc_base: float = 0.95
    detector_exponent: float = 0.25


@dataclass(frozen=True)
class PolicyParams:
    tax_init: float = 0.0
    fiduciary: float = 0.0
    provenance_boost: float = 0.0
    adaptive_enabled: bool = False
    adaptive_eta: float = 0.05
    adaptive_target: float = 0.5


@dataclass(frozen=True)
class ShockParams:
    ticks: tuple[int, ...] = (40, 70, 100, 130)
    duration: int = 5
    cost_drop: float = 0.75
    capability_jump: float = 2.0
    fake_news_burst: float = 0.5
    trust_shock: float = 0.35


_SECTIONS = {
    "econ": EconParams,
    "agents": AgentParams,
    "platform": PlatformParams,
    "market": MarketParams,
    "trust": TrustParamsCfg,
    "welfare": WelfareParams,
    "ipi": IpiParams,
    "proxy": ProxyParams,
    "policy": PolicyParams,
    "shocks": ShockParams,
}


@dataclass(frozen=True)
class SimParams:
    """The full parameter set for one simulated world."""

    econ: EconParams = field(default_factory=EconParams)
    agents: AgentParams = field(default_factory=AgentParams)
    platform: PlatformParams = field(default_factory=PlatformParams)
    market: MarketParams = field(default_factory=MarketParams)
    trust: TrustParamsCfg = field(default_factory=TrustParamsCfg)
    welfare: WelfareParams = field(default_factory=WelfareParams)
    ipi: IpiParams = field(default_factory=IpiParams)
    proxy: ProxyParams = field(default_factory=ProxyParams)
    policy: PolicyParams = field(default_factory=PolicyParams)
    shocks: ShockParams = field(default_factory=ShockParams)

    def flatten(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for section, cls in _SECTIONS.items():
            sub = getattr(self, section)
            for f in fields(cls):
                out[f"{section}.{f.name}"] = getattr(sub, f.name)
        return out

    def with_overrides(self, overrides: dict[str, Any]) -> "SimParams":
        """Apply dotted-key overrides, coercing values to the field's type."""
        staged: dict[str, dict[str, Any]] = {}
        for key, value in overrides.items():
            section, _, name = key.partition(".")
            if section not in _SECTIONS or not name:
                raise ConfigError(f"unknown config key: {key!r}")
            cls = _SECTIONS[section]
            try:
                (fld,) = [f for f in fields(cls) if f.name == name]
            except ValueError:
                raise ConfigError(f"unknown config key: {key!r}") from None
            staged.setdefault(section, {})[name] = _coerce(value, getattr(self, section), fld.name)
        updated = {
            section: replace(getattr(self, section), **kwargs)
            for section, kwargs in staged.items()
        }
        return replace(self, **updated)

    def resolved_text(self) -> str:
        lines = [f"{key} = {_render(value)}" for key, value in sorted(self.flatten().items())]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.resolved_text().encode()).hexdigest()[:16]


def _coerce(value: Any, section_obj: Any, name: str) -> Any:
    current = getattr(section_obj, name)
    if isinstance(value, str):
        text = value.strip()
        if isinstance(current, bool):
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ConfigError(f"expected a boolean for {name!r}, got {value!r}")
        try:
            if isinstance(current, int):
                return int(text)
            if isinstance(current, float):
                return float(text)
            if isinstance(current, tuple):
                return tuple(int(x) if float(x) == int(float(x)) else float(x)
                             for x in text.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"cannot parse {value!r} for key {name!r}") from None
        return text
    if isinstance(current, bool) and not isinstance(value, bool):
        raise ConfigError(f"expected a boolean for {name!r}, got {value!r}")
    if isinstance(current, float) and isinstance(value, (int, float)):
        return float(value)
    if isinstance(current, int) and isinstance(value, int):
        return value
    if isinstance(current, tuple) and isinstance(value, (list, tuple)):
        return tuple(value)
    if type(value) is type(current):
        return value
    raise ConfigError(f"cannot coerce {value!r} for key {name!r}")


def _render(value: Any) -> str:
    if isinstance(value, tuple):
        return " ".join(str(v) for v in value)
    return str(value)


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat key = value config file into an override mapping."""
    overrides: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def validate_overrides(params: SimParams, overrides: dict[str, Any]) -> None:
    """Raise ConfigError on any unknown key or unparsable value."""
    params.with_overrides(overrides)
