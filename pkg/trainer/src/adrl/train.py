"""Training loops for the four reinforcement modes.

One epoch is one collected batch followed by one update (the clipped-
surrogate mode revisits the batch for a few inner passes). The exported
curve holds the per-epoch mean cumulative reward of the collection
rollouts, which is what the results reporter plots.
"""
import csv
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
import torch

from .client import EnvClient
from .errors import DivergenceError, TrainerError
from .losses import (
    RunningBaseline,
    clipped_surrogate,
    combined_loss,
    decision_log_probs,
)
from .model import PolicyNetwork
from .rollout import collect

MODES = ("adrl", "drl", "rwm", "ppowm")


@dataclass
class TrainingConfig:
    mode: str = "adrl"
    epochs: int = 10
    episodes_per_epoch: Optional[int] = None  # default: ceil(640 / s)
    lr: float = 0.1  # documented default; unusually large, override freely
    alpha: float = 0.1
    clip: float = 0.2
    ppo_epochs: int = 4
    baseline_beta: float = 0.1
    seed: int = 0
    fixed_episode_seed: Optional[int] = None  # train on one frozen draw

    def validate(self) -> None:
        if self.mode not in MODES:
            raise TrainerError(f"mode must be one of {MODES}")
        if self.alpha < 0:
            raise TrainerError("alpha must be >= 0")
        if self.epochs < 0:
            raise TrainerError("epochs must be >= 0")


class CurvePoint(NamedTuple):
    epoch: int
    mean_cumulative_reward: float
    stderr: float


@dataclass
class TrainResult:
    curve: List[CurvePoint] = field(default_factory=list)
    aux_curve: List[float] = field(default_factory=list)
    baseline: float = 0.0
    episodes_seen: int = 0

    @property
    def auc(self) -> float:
        return sum(point.mean_cumulative_reward for point in self.curve)


def default_batch_episodes(intervals_per_episode: int) -> int:
    """640 transitions expressed in whole episodes."""
    return max(1, math.ceil(640 / max(1, intervals_per_episode)))


def _alpha_for(tc: TrainingConfig) -> float:
    # the no-auxiliary ablation is the same network at alpha 0; the
    # feed-forward baselines carry no prediction head at all
    if tc.mode == "adrl":
        return tc.alpha
    return 0.0


def train(
    net: PolicyNetwork,
    client: EnvClient,
    overrides: dict,
    tc: TrainingConfig,
) -> TrainResult:
    tc.validate()
    batch = tc.episodes_per_epoch
    if batch is None:
        batch = default_batch_episodes(overrides.get("intervals_per_episode", 1))
    generator = torch.Generator().manual_seed(tc.seed)
    optimizer = torch.optim.Adam(net.parameters(), lr=tc.lr)
    torch.manual_seed(tc.seed)
    baseline = RunningBaseline(tc.baseline_beta)
    result = TrainResult()
    alpha = _alpha_for(tc)
    counter = tc.seed * 1_000_000

    for epoch in range(tc.epochs):
        if tc.fixed_episode_seed is not None:
            seeds = [tc.fixed_episode_seed] * batch
        else:
            seeds = list(range(counter, counter + batch))
            counter += batch
        episodes = collect(client, net, seeds, overrides, generator=generator)
        returns = [ep.episode_return for ep in episodes]
        result.episodes_seen += len(episodes)
        advantage_center = baseline.value if result.episodes_seen > batch else float(
            np.mean(returns)
        )

        net.train()
        aux_value = 0.0
        if tc.mode == "ppowm":
            with torch.no_grad():
                net.eval()
                old = [float(v) for v in decision_log_probs(net, episodes)]
                net.train()
            for _ in range(tc.ppo_epochs):
                loss = clipped_surrogate(
                    net, episodes, old, advantage_center, tc.clip
                )
                if not torch.isfinite(loss):
                    raise DivergenceError(
                        f"loss {float(loss.detach())} at epoch {epoch}"
                    )
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
        else:
            loss, parts = combined_loss(net, episodes, advantage_center, alpha)
            if not torch.isfinite(loss):
                raise DivergenceError(
                    f"loss {float(loss.detach())} at epoch {epoch}"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            aux_value = parts["aux"]

        baseline.update(returns)
        mean = float(np.mean(returns))
        stderr = (
            float(np.std(returns, ddof=1) / np.sqrt(len(returns)))
            if len(returns) > 1
            else 0.0
        )
        result.curve.append(CurvePoint(epoch, mean, stderr))
        result.aux_curve.append(aux_value)

    result.baseline = baseline.value
    net.eval()
    return result


def write_curve(path: str, curve: List[CurvePoint]) -> None:
    """The CSV shape the results reporter's --curves flag consumes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_cumulative_reward", "stderr"])
        for point in curve:
            writer.writerow(
                [point.epoch, f"{point.mean_cumulative_reward:.6f}", f"{point.stderr:.6f}"]
            )
