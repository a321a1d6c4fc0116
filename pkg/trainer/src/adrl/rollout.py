"""Episode collection over a live protocol session.

A decision records everything needed to rebuild its gradient later: the
observation, the options actually chosen, the step reward, and the next
interval's task matrix (the auxiliary target; zeros past the horizon).
"""
from typing import Iterable, List, NamedTuple, Optional

import numpy as np
import torch

from .client import EnvClient, WireObservation
from .model import PolicyNetwork


class Decision(NamedTuple):
    observation: WireObservation
    choices: np.ndarray
    reward: float
    target: np.ndarray


class Episode(NamedTuple):
    seed: int
    decisions: List[Decision]
    episode_return: float


def play_episode(
    client: EnvClient,
    net: PolicyNetwork,
    seed: int,
    overrides: Optional[dict] = None,
    generator: Optional[torch.Generator] = None,
    greedy: bool = False,
) -> Episode:
    obs = client.reset(seed, overrides)
    decisions: List[Decision] = []
    total = 0.0
    done = obs.done
    while not done:
        choices, assignments = net.act(obs, generator=generator, greedy=greedy)
        transition = client.act(assignments)
        done = transition.done
        target = (
            np.zeros_like(obs.task_features)
            if done
            else transition.observation.task_features
        )
        decisions.append(Decision(obs, choices, transition.reward, target))
        total += transition.reward
        obs = transition.observation
    return Episode(seed, decisions, total)


def collect(
    client: EnvClient,
    net: PolicyNetwork,
    seeds: Iterable[int],
    overrides: Optional[dict] = None,
    generator: Optional[torch.Generator] = None,
) -> List[Episode]:
    net.eval()
    return [
        play_episode(client, net, seed, overrides, generator=generator)
        for seed in seeds
    ]


def evaluate(
    client: EnvClient,
    net: PolicyNetwork,
    seeds: Iterable[int],
    overrides: Optional[dict] = None,
):
    """Greedy returns over the given seeds: (mean, stderr, returns)."""
    net.eval()
    returns = [
        play_episode(client, net, seed, overrides, greedy=True).episode_return
        for seed in seeds
    ]
    mean = float(np.mean(returns)) if returns else float("nan")
    stderr = (
        float(np.std(returns, ddof=1) / np.sqrt(len(returns)))
        if len(returns) > 1
        else 0.0
    )
    return mean, stderr, returns
