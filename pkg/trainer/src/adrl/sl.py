"""Supervised imitation of the exhaustive-search solver.

Labels come from the environment's own `oracle` command over the CLI;
instances are replayed through the protocol while forcing the labeled
actions, so every sample is an (observation, option-per-task) pair under
the exact state distribution the solver saw.
"""
import json
import subprocess
import tempfile
from typing import List, Sequence, Tuple

import numpy as np
import torch

from .client import EnvClient, WireObservation
from .errors import EnvUnreachableError, TrainerError
from .model import PolicyNetwork
from .rollout import Episode  # noqa: F401  (re-exported for callers)

Sample = Tuple[WireObservation, np.ndarray]


def _config_lines(overrides: dict) -> str:
    lines = []
    for key, value in overrides.items():
        if isinstance(value, bool):
            lines.append(f"{key} = {'true' if value else 'false'}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def oracle_plans(
    program: Sequence[str],
    overrides: dict,
    episodes: int,
    seed: int,
) -> List[dict]:
    """Run the solver CLI; returns its JSON records (seed, value, plan)."""
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(_config_lines(overrides))
        path = fh.name
    cmd = [
        *program,
        "oracle",
        "--config",
        path,
        "--episodes",
        str(episodes),
        "--seed",
        str(seed),
    ]
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=600)
    except OSError as err:
        raise EnvUnreachableError(f"cannot run {cmd[0]}: {err}") from None
    if proc.returncode != 0:
        raise TrainerError(f"oracle command failed: {proc.stderr.strip()}")
    return [json.loads(line) for line in proc.stdout.splitlines() if line.strip()]


def _choices_for(obs: WireObservation, assignments: List[list]) -> np.ndarray:
    """Option index per task row for one labeled interval; unassigned
    valid rows are labeled no-op."""
    rows = len(obs.task_mask)
    noop = len(obs.participant_mask)
    choices = np.full(rows, -1, dtype=np.int64)
    by_id = {task["id"]: row for row, task in enumerate(obs.tasks)}
    for row in by_id.values():
        choices[row] = noop
    for tid, pids in assignments:
        row = by_id.get(tid)
        if row is None or len(pids) != 1:
            raise TrainerError(f"label references unknown task {tid}")
        choices[row] = pids[0]
    return choices


def build_dataset(
    client: EnvClient,
    overrides: dict,
    plans: List[dict],
) -> List[Sample]:
    """Replay each plan, capturing the observation before every action."""
    samples: List[Sample] = []
    for record in plans:
        obs = client.reset(record["seed"], overrides)
        for assignments in record["plan"]:
            samples.append((obs, _choices_for(obs, assignments)))
            transition = client.act(
                [(tid, tuple(pids)) for tid, pids in assignments]
            )
            obs = transition.observation
    return samples


def supervised_fit(
    net: PolicyNetwork,
    dataset: List[Sample],
    epochs: int,
    lr: float = 0.01,
) -> List[float]:
    """Cross-entropy on the labeled options; returns per-epoch loss."""
    if not dataset:
        raise TrainerError("empty supervised dataset")
    optimizer = torch.optim.Adam(net.parameters(), lr=lr)
    history = []
    net.train()
    for _ in range(epochs):
        total = torch.zeros((), dtype=next(net.parameters()).dtype)
        for obs, choices in dataset:
            total = total - net.log_prob_of(obs, choices)
        loss = total / len(dataset)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        history.append(float(loss.detach()))
    net.eval()
    return history


def action_accuracy(net: PolicyNetwork, dataset: List[Sample]) -> float:
    """Fraction of samples whose greedy action matches the label."""
    if not dataset:
        raise TrainerError("empty supervised dataset")
    net.eval()
    hits = 0
    for obs, choices in dataset:
        predicted, _ = net.act(obs, greedy=True)
        if np.array_equal(predicted, choices):
            hits += 1
    return hits / len(dataset)
