"""Intervention strategies as time- and state-dependent contact scaling.

Five strategies are shipped:

- ``unmitigated``: no change to contact rates.
- ``social_distancing``: a uniform 45% reduction in all contact rates from
  day 0 (multiplier 0.55).
- ``social_distancing_plus``: the uniform reduction, plus any contact pair
  involving a 70+ individual is cut to a 0.40 multiplier (60% below the
  pre-intervention baseline). Set ``compound_elderly`` to instead compound
  the two reductions (0.55 * 0.40 = 0.22) for elderly pairs.
- ``late_suppression`` / ``early_suppression``: nothing until the weekly
  death rate crosses the trigger threshold (1.6 / 0.2 deaths per 100k per
  week), then a 75% reduction (multiplier 0.25) for all pairs.

Once active, a measure persists for ``duration`` days (default: the rest of
the horizon). Triggers latch: they never un-fire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvariantViolation
from .trajectory import EpidemicTrajectory, weekly_death_rate_per_100k

#: Band index of the first 70+ band in the standard 16-band layout.
ELDERLY_SCALING_CUTOFF_BAND = 14


class ScenarioKind(str, Enum):
    UNMITIGATED = "unmitigated"
    SOCIAL_DISTANCING = "social_distancing"
    SOCIAL_DISTANCING_PLUS = "social_distancing_plus"
    LATE_SUPPRESSION = "late_suppression"
    EARLY_SUPPRESSION = "early_suppression"


#: Canonical ordering used for sweep output and report rows.
SCENARIO_ORDER = tuple(ScenarioKind)

SCENARIO_TITLES = {
    ScenarioKind.UNMITIGATED: "Unmitigated",
    ScenarioKind.SOCIAL_DISTANCING: "Social distancing",
    ScenarioKind.SOCIAL_DISTANCING_PLUS: "Social distancing+targeting",
    ScenarioKind.LATE_SUPPRESSION: "Late suppression",
    ScenarioKind.EARLY_SUPPRESSION: "Early suppression",
}

_SUPPRESSION_KINDS = frozenset({ScenarioKind.LATE_SUPPRESSION, ScenarioKind.EARLY_SUPPRESSION})
_DISTANCING_KINDS = frozenset(
    {ScenarioKind.SOCIAL_DISTANCING, ScenarioKind.SOCIAL_DISTANCING_PLUS}
)


@dataclass(frozen=True)
class PolicyScenario:
    """One intervention strategy with its contact-scaling and trigger parameters.

    Reductions are fractions removed from the pre-intervention contact rate:
    a ``uniform_reduction`` of 0.45 multiplies contacts by 0.55. The elderly
    reduction applies to any pair where either participant is in a band at or
    above ``elderly_cutoff_band``, and by default replaces (does not stack
    with) the uniform reduction.
    """

    kind: ScenarioKind
    uniform_reduction: float = 0.45
    elderly_reduction: float = 0.60
    elderly_cutoff_band: int = ELDERLY_SCALING_CUTOFF_BAND
    suppression_reduction: float = 0.75
    trigger_threshold: float | None = None
    duration: float | None = None
    compound_elderly: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        for fname in ("uniform_reduction", "elderly_reduction", "suppression_reduction"):
            v = getattr(self, fname)
            if not 0.0 <= v <= 1.0:
                raise InvariantViolation(f"{fname} must be in [0,1], got {v}")
        if self.trigger_threshold is not None and self.trigger_threshold < 0:
            raise InvariantViolation("trigger_threshold must be >= 0 when present")
        if self.kind in _SUPPRESSION_KINDS and self.trigger_threshold is None:
            raise InvariantViolation(f"{self.kind.value} requires a trigger_threshold")
        if self.duration is not None and self.duration <= 0:
            raise InvariantViolation("duration must be positive when present")

    @property
    def triggered(self) -> bool:
        """Whether this scenario activates via a death-rate trigger."""
        return self.kind in _SUPPRESSION_KINDS

    @property
    def active_from_start(self) -> bool:
        return self.kind in _DISTANCING_KINDS

    def pair_multiplier(self, active: bool, old_i: bool, old_j: bool) -> float:
        """Contact multiplier for one band pair given measure activity."""
        if not active or self.kind is ScenarioKind.UNMITIGATED:
            return 1.0
        if self.kind in _SUPPRESSION_KINDS:
            return 1.0 - self.suppression_reduction
        uniform = 1.0 - self.uniform_reduction
        if self.kind is ScenarioKind.SOCIAL_DISTANCING_PLUS and (old_i or old_j):
            elderly = 1.0 - self.elderly_reduction
            return uniform * elderly if self.compound_elderly else elderly
        return uniform

    def scaling_matrix(self, n_bands: int, active: bool) -> np.ndarray:
        """Pairwise multiplier matrix for an n-band model."""
        old = np.arange(n_bands) >= self.elderly_cutoff_band
        out = np.empty((n_bands, n_bands))
        for i in range(n_bands):
            for j in range(n_bands):
                out[i, j] = self.pair_multiplier(active, bool(old[i]), bool(old[j]))
        return out

    def to_config(self) -> dict:
        cfg = {"kind": self.kind.value}
        if self.kind in _DISTANCING_KINDS:
            cfg["uniform_reduction"] = self.uniform_reduction
        if self.kind is ScenarioKind.SOCIAL_DISTANCING_PLUS:
            cfg["elderly_reduction"] = self.elderly_reduction
            cfg["compound_elderly"] = self.compound_elderly
        if self.kind in _SUPPRESSION_KINDS:
            cfg["suppression_reduction"] = self.suppression_reduction
            cfg["trigger_threshold"] = self.trigger_threshold
        if self.duration is not None:
            cfg["duration"] = self.duration
        return cfg


#: Trigger thresholds in deaths per 100,000 per week.
LATE_TRIGGER_THRESHOLD = 1.6
EARLY_TRIGGER_THRESHOLD = 0.2


def make_scenario(kind: ScenarioKind | str, **overrides) -> PolicyScenario:
    """Build one of the five shipped strategies with its default parameters."""
    kind = ScenarioKind(kind)
    defaults: dict = {}
    if kind is ScenarioKind.LATE_SUPPRESSION:
        defaults["trigger_threshold"] = LATE_TRIGGER_THRESHOLD
    elif kind is ScenarioKind.EARLY_SUPPRESSION:
        defaults["trigger_threshold"] = EARLY_TRIGGER_THRESHOLD
    defaults.update(overrides)
    return PolicyScenario(kind=kind, **defaults)


def default_scenarios() -> tuple[PolicyScenario, ...]:
    """The five shipped strategies in canonical order."""
    return tuple(make_scenario(kind) for kind in SCENARIO_ORDER)


def scenario_from_config(obj) -> PolicyScenario:
    """Parse a scenario from its run-config JSON form (a kind string or an object)."""
    if isinstance(obj, str):
        return make_scenario(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvariantViolation(f"scenario config must be a kind string or an object with 'kind', got {obj!r}")
    params = dict(obj)
    kind = params.pop("kind")
    return make_scenario(kind, **params)


# ---------------------------------------------------------------------------
# Trigger and scaling evaluation against a trajectory


def trigger_time(traj: EpidemicTrajectory, threshold: float) -> float | None:
    """First integer day whose trailing-week death rate reaches ``threshold``.

    A threshold of 0 fires at the first death (the rate must be strictly
    positive), not at time 0. Returns None if the trajectory never crosses.
    """
    if threshold < 0:
        raise InvariantViolation("threshold must be >= 0")
    last_day = int(math.floor(traj.times[-1] + 1e-9))
    for d in range(1, last_day + 1):
        rate = weekly_death_rate_per_100k(traj, float(d))
        if rate >= threshold and rate > 0.0:
            return float(d)
    return None


def check_trigger(traj: EpidemicTrajectory, threshold: float, t: float) -> bool:
    """Whether the suppression trigger has fired by day ``t`` (latching).

    True from the first daily evaluation where the trailing-week death rate
    reaches the threshold, and for every later time.
    """
    fired_at = trigger_time(traj, threshold)
    return fired_at is not None and t >= fired_at


def contact_scaling(
    scenario: PolicyScenario,
    t: float,
    traj: EpidemicTrajectory | None,
    band_i: int,
    band_j: int,
) -> float:
    """Contact multiplier for the (band_i, band_j) pair at time t.

    For trigger-based scenarios the trajectory-so-far decides whether the
    measure is active: the recorded ``trigger_time`` is used when present,
    otherwise the trigger rule is evaluated on the trajectory's death series.
    With no trajectory, a trigger-based measure is inactive.
    """
    if scenario.active_from_start:
        start: float | None = 0.0
    elif scenario.triggered and traj is not None:
        if traj.trigger_time is not None:
            start = traj.trigger_time if t >= traj.trigger_time else None
        else:
            start = trigger_time(traj, scenario.trigger_threshold)
    else:
        start = None

    active = start is not None and t >= start
    if active and scenario.duration is not None:
        active = t < start + scenario.duration
    old = scenario.elderly_cutoff_band
    return scenario.pair_multiplier(active, band_i >= old, band_j >= old)
