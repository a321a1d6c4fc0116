"""Training objectives.

The policy-gradient surrogate maximizes J, the baseline-centered
log-likelihood-weighted return; the auxiliary term N is the mean squared
error of the future-task prediction. The combined objective minimized is
L = -J + alpha * N. The clipped-ratio surrogate reuses the same
advantages at per-decision granularity.
"""
from typing import List, Optional, Sequence

import numpy as np
import torch

from .errors import EmptyBatchError
from .model import PolicyNetwork
from .rollout import Episode


class RunningBaseline:
    """Exponential running mean of episode returns; carries no gradient."""

    def __init__(self, beta: float = 0.1):
        self.beta = beta
        self.value = 0.0
        self._seen = False

    def update(self, returns: Sequence[float]) -> float:
        if len(returns) == 0:
            return self.value
        mean = float(np.mean(returns))
        if not self._seen:
            self.value = mean
            self._seen = True
        else:
            self.value = (1.0 - self.beta) * self.value + self.beta * mean
        return self.value


def policy_surrogate(
    net: PolicyNetwork, episodes: List[Episode], baseline: float
) -> torch.Tensor:
    """-J: mean over episodes of -log p(tau) * (return - baseline)."""
    if not episodes:
        raise EmptyBatchError("no episodes in batch")
    terms = []
    for ep in episodes:
        logp = sum(
            (net.log_prob_of(d.observation, d.choices) for d in ep.decisions),
            start=torch.zeros((), dtype=next(net.parameters()).dtype),
        )
        terms.append(-logp * (ep.episode_return - baseline))
    return torch.stack(terms).mean()


def auxiliary_loss(net: PolicyNetwork, episodes: List[Episode]) -> torch.Tensor:
    """N: mean squared error over every (interval, slot, feature) entry."""
    if not episodes:
        raise EmptyBatchError("no episodes in batch")
    dtype = next(net.parameters()).dtype
    total = torch.zeros((), dtype=dtype)
    entries = 0
    for ep in episodes:
        for d in ep.decisions:
            predicted = net.predict_future(d.observation)
            if predicted is None:  # feed-forward-only variant has no head
                continue
            target = torch.as_tensor(d.target, dtype=dtype)
            total = total + ((predicted - target) ** 2).sum()
            entries += target.numel()
    if entries == 0:
        return torch.zeros((), dtype=dtype)
    return total / entries


def combined_loss(
    net: PolicyNetwork,
    episodes: List[Episode],
    baseline: float,
    alpha: float,
):
    """L = -J + alpha * N; returns (loss, parts dict)."""
    pg = policy_surrogate(net, episodes, baseline)
    if alpha > 0:
        aux = auxiliary_loss(net, episodes)
        return pg + alpha * aux, {"pg": float(pg.detach()), "aux": float(aux.detach())}
    return pg, {"pg": float(pg.detach()), "aux": 0.0}


def decision_log_probs(
    net: PolicyNetwork, episodes: List[Episode]
) -> List[torch.Tensor]:
    """Per-decision action log-probabilities, batch-flattened."""
    return [
        net.log_prob_of(d.observation, d.choices)
        for ep in episodes
        for d in ep.decisions
    ]


def clipped_surrogate(
    net: PolicyNetwork,
    episodes: List[Episode],
    old_log_probs: Sequence[float],
    baseline: float,
    clip: float,
) -> torch.Tensor:
    """Clipped-ratio policy loss; advantages are episode-level."""
    if not episodes:
        raise EmptyBatchError("no episodes in batch")
    new = decision_log_probs(net, episodes)
    advantages = [
        ep.episode_return - baseline for ep in episodes for _ in ep.decisions
    ]
    terms = []
    for logp, old, adv in zip(new, old_log_probs, advantages):
        ratio = torch.exp(logp - float(old))
        unclipped = ratio * adv
        clipped = torch.clamp(ratio, 1.0 - clip, 1.0 + clip) * adv
        terms.append(-torch.minimum(unclipped, clipped))
    return torch.stack(terms).mean()
