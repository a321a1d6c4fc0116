"""Episode execution, results persistence, and plain-text reporting.

Per-episode seeds are ``base_seed + index`` (documented, stable), so
results are reproducible row by row no matter how many episodes run or
in what grouping. A failed episode is recorded with NaN values and the
error code instead of aborting the batch.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .baselines import Policy, make_policy
from .domain import COMPONENT_NAMES, EmptyResultsError, McsError, SimConfig, derive_seed
from .reward import PRESETS
from .simulator import Simulator

RESULT_FIELDS = (
    "policy",
    "preset",
    "s",
    "t",
    "p",
    "seed",
    "episode",
    "return",
    "o_assign_dist",
    "o_trip_dist",
    "o_time",
    "o_fairness",
    "o_energy",
)
TIMING_FIELD = "wall_time_ms"

COUNT_KEYS = (
    "generated",
    "assigned",
    "completed",
    "cancelled",
    "expired",
    "pending",
    "in_flight",
)


def preset_label(config: SimConfig) -> str:
    """The reward column for results rows; explicit weights read custom."""
    if config.weights is not None:
        return "custom"
    return config.preset or "balanced"


@dataclass(frozen=True)
class EpisodeResult:
    policy: str
    preset: str
    s: int
    t: int
    p: int
    seed: int
    episode: int
    episode_return: float
    components: Sequence[float]
    counts: Dict[str, int]
    wall_time_ms: float
    error: str = ""

    def as_row(self, timings: bool = False) -> Dict[str, object]:
        row: Dict[str, object] = {
            "policy": self.policy,
            "preset": self.preset,
            "s": self.s,
            "t": self.t,
            "p": self.p,
            "seed": self.seed,
            "episode": self.episode,
            "return": self.episode_return,
            "o_assign_dist": self.components[0],
            "o_trip_dist": self.components[1],
            "o_time": self.components[2],
            "o_fairness": self.components[3],
            "o_energy": self.components[4],
        }
        if timings:
            row[TIMING_FIELD] = round(self.wall_time_ms, 3)
        return row


def episode_seed(base_seed: int, index: int) -> int:
    return base_seed + index


def play_episode(sim: Simulator, policy: Policy, seed: int, episode: int = 0) -> EpisodeResult:
    """Run one full episode of ``policy`` on ``sim`` under ``seed``."""
    policy.begin_episode(derive_seed(seed, "policy"))
    start = time.perf_counter()
    obs = sim.reset(seed)
    while not sim.done:
        action = policy.act(obs, sim)
        obs = sim.step(action).observation
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    cfg = sim.config
    return EpisodeResult(
        policy=policy.name,
        preset=preset_label(cfg),
        s=cfg.intervals_per_episode,
        t=cfg.max_tasks_per_interval,
        p=cfg.num_participants,
        seed=seed,
        episode=episode,
        episode_return=sim.episode_return,
        components=sim.component_totals,
        counts=sim.counts(),
        wall_time_ms=elapsed_ms,
    )


def run_episodes(
    config: SimConfig,
    policy: Policy,
    episodes: int,
    base_seed: Optional[int] = None,
    sim: Optional[Simulator] = None,
) -> List[EpisodeResult]:
    """``episodes`` rows under seeds base, base+1, ... Zero episodes is
    legal and yields an empty list."""
    if episodes < 0:
        raise EmptyResultsError("episodes must be >= 0")
    if sim is None:
        sim = Simulator(config)
    seed0 = config.seed if base_seed is None else base_seed
    results = []
    for index in range(episodes):
        seed = episode_seed(seed0, index)
        try:
            results.append(play_episode(sim, policy, seed, index))
        except McsError as err:
            nan = float("nan")
            results.append(
                EpisodeResult(
                    policy=policy.name,
                    preset=preset_label(config),
                    s=config.intervals_per_episode,
                    t=config.max_tasks_per_interval,
                    p=config.num_participants,
                    seed=seed,
                    episode=index,
                    episode_return=nan,
                    components=(nan,) * 5,
                    counts={key: 0 for key in COUNT_KEYS},
                    wall_time_ms=0.0,
                    error=err.code,
                )
            )
    return results


def run_grid(
    base_config: SimConfig,
    policy_name: str,
    settings: Sequence[Tuple[int, int, int]],
    presets: Sequence[Optional[str]],
    episodes: int,
    base_seed: Optional[int] = None,
    policy: Optional[Policy] = None,
) -> List[EpisodeResult]:
    """One results table over the cross product settings x presets.

    Each cell runs ``episodes`` episodes with seeds base, base+1, ...; a
    preset of None keeps the base config's reward weights. An explicit
    ``policy`` (an external agent, usually) overrides per-cell
    construction by name.
    """
    results: List[EpisodeResult] = []
    for s, t, p in settings:
        for preset in presets:
            updates: Dict[str, object] = {
                "intervals_per_episode": s,
                "max_tasks_per_interval": t,
                "num_participants": p,
            }
            if preset is not None:
                updates["preset"] = preset
                updates["weights"] = None
            config = dataclasses.replace(base_config, **updates)
            config.validate()
            chosen = policy if policy is not None else make_policy(policy_name, config)
            results.extend(run_episodes(config, chosen, episodes, base_seed))
    return results


def run_policy_by_name(
    config: SimConfig,
    policy_name: str,
    episodes: int,
    base_seed: Optional[int] = None,
) -> List[EpisodeResult]:
    policy = make_policy(policy_name, config)
    return run_episodes(config, policy, episodes, base_seed)


def write_results(path: str, results: Iterable[EpisodeResult], timings: bool = False) -> None:
    fields = RESULT_FIELDS + ((TIMING_FIELD,) if timings else ())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for result in results:
            writer.writerow(result.as_row(timings))


def load_results(path: str) -> List[Dict[str, object]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row: Dict[str, object] = {
                "policy": raw["policy"],
                "preset": raw["preset"],
                "s": int(raw["s"]),
                "t": int(raw["t"]),
                "p": int(raw["p"]),
                "seed": int(raw["seed"]),
                "episode": int(raw["episode"]),
            }
            for key in RESULT_FIELDS[7:]:
                row[key] = float(raw[key])
            if TIMING_FIELD in raw and raw[TIMING_FIELD] not in (None, ""):
                row[TIMING_FIELD] = float(raw[TIMING_FIELD])
            rows.append(row)
    if not rows:
        raise EmptyResultsError(f"no result rows in {path}")
    return rows


def mean_stderr(values: Sequence[float]) -> tuple:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def summarize(results: Sequence[EpisodeResult]) -> Dict[str, float]:
    """Whole-table aggregates over the episodes that finished."""
    ok = [r for r in results if not r.error]
    if not ok:
        raise EmptyResultsError("no completed episodes to summarize")
    returns = [r.episode_return for r in ok]
    mean, stderr = mean_stderr(returns)
    summary = {
        "episodes": float(len(ok)),
        "failed": float(len(results) - len(ok)),
        "mean_return": mean,
        "stderr_return": stderr,
    }
    for k, name in enumerate(COMPONENT_NAMES):
        summary[f"mean_{name}"] = math.fsum(r.components[k] for r in ok) / len(ok)
    for key in ("generated", "assigned", "completed", "cancelled", "expired"):
        summary[f"mean_{key}"] = math.fsum(r.counts[key] for r in ok) / len(ok)
    return summary


def reward_proportions(
    rows: Sequence[Dict[str, object]], weights
) -> Tuple[float, float, float, float, float]:
    """Share of total weighted-objective mass per component.

    Each episode contributes |w_k * o_k| to component k; shares are the
    masses divided by their grand total (all-zero mass yields all-zero
    shares).
    """
    w = weights.as_tuple()
    masses = [0.0] * 5
    for row in rows:
        for k, name in enumerate(COMPONENT_NAMES):
            masses[k] += abs(w[k] * float(row[name]))
    total = math.fsum(masses)
    if total == 0.0:
        return (0.0,) * 5
    return tuple(m / total for m in masses)


def format_report(rows: Sequence[Dict[str, object]]) -> str:
    """Per-preset grid of mean return over (setting x policy), plus the
    reward-proportion breakdown where the preset's weights are known."""
    clean = [r for r in rows if not math.isnan(float(r["return"]))]
    if not clean:
        raise EmptyResultsError("every result row failed")
    lines: List[str] = []
    for preset in sorted({str(r["preset"]) for r in clean}):
        group = [r for r in clean if r["preset"] == preset]
        policies = sorted({str(r["policy"]) for r in group})
        settings = sorted({(r["s"], r["t"], r["p"]) for r in group})
        lines.append(f"preset={preset}")
        header = f"{'s,t,p':<12}" + "".join(f"{name:>12}" for name in policies)
        lines.append(header)
        lines.append("-" * len(header))
        for setting in settings:
            cells = []
            for name in policies:
                values = [
                    float(r["return"])
                    for r in group
                    if r["policy"] == name and (r["s"], r["t"], r["p"]) == setting
                ]
                if values:
                    cells.append(f"{math.fsum(values) / len(values):>12.4f}")
                else:
                    cells.append(f"{'-':>12}")
            label = ",".join(str(v) for v in setting)
            lines.append(f"{label:<12}" + "".join(cells))
        if preset in PRESETS:
            shares = reward_proportions(group, PRESETS[preset])
            parts = " ".join(
                f"{name[2:]}={share:.3f}"
                for name, share in zip(COMPONENT_NAMES, shares)
            )
            lines.append(f"proportions  {parts}")
        lines.append("")
    return "\n".join(lines).rstrip()


def load_curves(path: str) -> List[Dict[str, float]]:
    """Read a learning-curve CSV: epoch, mean_cumulative_reward, stderr."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"epoch", "mean_cumulative_reward", "stderr"}
        if not needed.issubset(set(reader.fieldnames or ())):
            raise EmptyResultsError(f"curve file needs columns {sorted(needed)}")
        rows = [
            {
                "epoch": float(r["epoch"]),
                "mean_cumulative_reward": float(r["mean_cumulative_reward"]),
                "stderr": float(r["stderr"]),
            }
            for r in reader
        ]
    if not rows:
        raise EmptyResultsError(f"no curve rows in {path}")
    return rows


def format_curve_summary(curve: Sequence[Dict[str, float]]) -> str:
    values = [row["mean_cumulative_reward"] for row in curve]
    auc = math.fsum(values) / len(values)
    best = max(values)
    final = values[-1]
    return (
        f"epochs={len(values)} final={final:.4f} best={best:.4f} "
        f"mean_over_training={auc:.4f}"
    )
