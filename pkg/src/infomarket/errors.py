"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Bad configuration: unknown key, unparsable value, or invalid bound."""


class AssumptionViolated(ValueError):
    """A technology pair violates the substitutability ordering sigma_L > 1 > sigma_H."""


class TaxOnHighQuality(ValueError):
    """A per-unit levy was applied to high-quality output."""


class NoConvergence(RuntimeError):
    """The verification fixed point failed to reach tolerance within the iteration cap."""


class DegenerateAnchors(ValueError):
    """Deadweight-loss anchors collapse: the planner optimum does not exceed the worst case."""


class WeightSumViolation(ValueError):
    """Index weights are negative or do not sum to one."""


class ZeroBaseline(ValueError):
    """Churn-gap proxy evaluated against a zero baseline churn rate."""
