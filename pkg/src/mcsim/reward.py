"""Multi-goal reward: five normalized objectives and their weighted sum.

Every objective is transformed so that larger is better; costs enter with
a minus sign. Per-interval values use only quantities realized during
that interval, except fairness, which is the (negated) change in a
dispersion statistic and therefore telescopes over an episode to the
final dispersion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .domain import (
    McsError,
    RewardBreakdown,
    RewardWeights,
    SimConfig,
    UnknownPresetError,
)

PRESETS = {
    "balanced": RewardWeights(1.0, 1.0, 1.0, 1.0, 1.0),
    "fairness_first": RewardWeights(1.0, 1.0, 1.0, 4.0, 1.0),
    "energy_first": RewardWeights(1.0, 1.0, 1.0, 1.0, 4.0),
    "profit_first": RewardWeights(2.0, 2.0, 1.0, 1.0, 1.0),
}


def preset_weights(name: str) -> RewardWeights:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None


def resolve_weights(config: SimConfig) -> RewardWeights:
    """Explicit weights win over the preset; default preset is balanced."""
    if config.weights is not None:
        return config.weights
    return preset_weights(config.preset or "balanced")


@dataclass(frozen=True)
class RewardScales:
    """Normalization constants; all positive.

    Defaults derive from the environment so that per-interval objective
    values stay O(1): dist_scale is the grid semiperimeter (the longest
    Manhattan path), time_scale the episode length, energy_scale the cost
    of crossing the grid at top effective speed.
    """

    dist_scale: float
    time_scale: float
    fare_scale: float
    energy_scale: float

    @property
    def fairness_scale(self) -> float:
        return self.dist_scale + self.time_scale

    @classmethod
    def from_config(cls, config: SimConfig) -> "RewardScales":
        dist = config.dist_scale
        if dist is None:
            dist = float(config.grid_width + config.grid_height)
        time = config.time_scale
        if time is None:
            time = float(config.intervals_per_episode)
        energy = config.energy_scale
        if energy is None:
            if config.base_speeds is not None:
                top = max(v for col in config.base_speeds for v in col)
            else:
                top = config.speed_max
            top *= 1.0 + config.weather_amplitude
            energy = dist * (config.energy_e0 + config.energy_e1 * top * top)
        return cls(dist, time, config.fare_scale, energy)


def stddev_from_moments(n: int, total: float, total_sq: float) -> float:
    """Population standard deviation from count / sum / sum of squares.

    Fewer than two points carry no dispersion, so the result is 0; tiny
    negative variances from rounding clamp to 0.
    """
    if n < 2:
        return 0.0
    variance = total_sq / n - (total / n) ** 2
    return math.sqrt(max(variance, 0.0))


def population_stddev(values: Sequence[float]) -> float:
    total = math.fsum(values)
    total_sq = math.fsum(v * v for v in values)
    return stddev_from_moments(len(values), total, total_sq)


def dispersion(
    lifetime_assign_distances: Sequence[float], completed_time_costs: Sequence[float]
) -> float:
    """Inequality statistic D_h: spread of workload plus spread of waiting.

    First term is the standard deviation over all participants of lifetime
    assignment distance; second is the standard deviation over all
    completed tasks of their time cost.
    """
    return population_stddev(lifetime_assign_distances) + population_stddev(
        completed_time_costs
    )


def compute_components(
    assignment_distances: Iterable[float],
    completed_trip_distances: Iterable[float],
    completed_time_costs: Iterable[float],
    dispersion_before: float,
    dispersion_after: float,
    completed_energy: float,
    scales: RewardScales,
) -> RewardBreakdown:
    """Unweighted objective values for one interval.

    Inputs are the quantities realized during the interval: distances of
    assignments made, origin->destination distances and time costs of
    tasks completed, the dispersion statistic before and after, and the
    energy consumed by the tasks completed this interval (charged per
    traversed cell at e0 + e1 * speed^2, settled at completion).
    """
    o_assign = -math.fsum(assignment_distances) / scales.dist_scale
    o_trip = math.fsum(completed_trip_distances) / scales.dist_scale
    o_time = -math.fsum(completed_time_costs) / scales.time_scale
    o_fair = -(dispersion_after - dispersion_before) / scales.fairness_scale
    o_energy = -completed_energy / scales.energy_scale
    return RewardBreakdown(o_assign, o_trip, o_time, o_fair, o_energy)


def combine(breakdown: RewardBreakdown, weights: RewardWeights) -> RewardBreakdown:
    """Attach the weighted total to an unweighted breakdown."""
    total = math.fsum(
        w * o for w, o in zip(weights.as_tuple(), breakdown.components())
    )
    return breakdown._replace(total=total)
