"""Shared fixtures. Every environment interaction goes through the
protocol subprocess; nothing imports the simulator package."""
import sys

import numpy as np
import pytest
import torch

from adrl.client import EnvClient, WireObservation, serve_command

PROGRAM = (sys.executable, "-m", "mcsim.cli")


@pytest.fixture(scope="module")
def client():
    with EnvClient(serve_command(PROGRAM)) as c:
        yield c


def synthetic_observation(
    rng: np.random.Generator,
    task_rows: int,
    participants: int,
    valid_tasks: int,
    required: int = 1,
) -> WireObservation:
    tf = rng.standard_normal((task_rows, 9)).astype(np.float32)
    tm = np.zeros(task_rows, dtype=np.float32)
    tm[:valid_tasks] = 1.0
    tf[valid_tasks:] = 0.0
    pf = rng.standard_normal((participants, 8)).astype(np.float32)
    pm = np.ones(participants, dtype=np.float32)
    tasks = [
        {"id": 100 + i, "required_participants": required}
        for i in range(valid_tasks)
    ]
    return WireObservation(0, False, tf, tm, pf, pm, tasks)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(autouse=True)
def _deterministic_torch():
    torch.manual_seed(0)
