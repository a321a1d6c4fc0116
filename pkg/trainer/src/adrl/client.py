"""Protocol client: the only doorway to the environment.

The simulator stays in its own process behind the newline-delimited JSON
protocol (``mcsim serve --stdio``); nothing here imports it. One client
owns one session; parallel rollouts use one client per worker.
"""
import json
import subprocess
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import EnvProtocolError, EnvUnreachableError

DEFAULT_COMMAND = ("mcsim", "serve", "--stdio")


def serve_command(program: Sequence[str] = ("mcsim",)) -> Tuple[str, ...]:
    """Full argv for one stdio session of the given simulator program."""
    return (*program, "serve", "--stdio")

TASK_WIDTH = 9
PARTICIPANT_WIDTH = 8


@dataclass
class WireObservation:
    """One observation off the wire, matrices decoded to float32."""

    interval: int
    done: bool
    task_features: np.ndarray
    task_mask: np.ndarray
    participant_features: np.ndarray
    participant_mask: np.ndarray
    tasks: List[dict] = field(default_factory=list)


@dataclass
class WireTransition:
    reward: float
    done: bool
    breakdown: Dict[str, float]
    info: Dict[str, int]
    observation: WireObservation


def _decode_observation(payload: dict) -> WireObservation:
    return WireObservation(
        interval=payload["interval"],
        done=payload["done"],
        task_features=np.asarray(payload["task_features"], dtype=np.float32),
        task_mask=np.asarray(payload["task_mask"], dtype=np.float32),
        participant_features=np.asarray(
            payload["participant_features"], dtype=np.float32
        ),
        participant_mask=np.asarray(payload["participant_mask"], dtype=np.float32),
        tasks=payload["tasks"],
    )


class EnvClient:
    """One live protocol session over a child process's stdio."""

    def __init__(self, command: Sequence[str] = DEFAULT_COMMAND):
        try:
            self._proc = subprocess.Popen(
                list(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as err:
            raise EnvUnreachableError(f"cannot start {command[0]}: {err}") from None

    def _round_trip(self, payload: dict) -> dict:
        proc = self._proc
        if proc.poll() is not None:
            raise EnvUnreachableError("environment process has exited")
        try:
            proc.stdin.write(json.dumps(payload, sort_keys=True) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as err:
            raise EnvUnreachableError(str(err)) from None
        if not line:
            raise EnvUnreachableError("environment closed the stream")
        reply = json.loads(line)
        if reply.get("type") == "error":
            raise EnvProtocolError(f"{reply.get('code')}: {reply.get('detail')}")
        return reply

    def reset(self, seed: int, overrides: Optional[dict] = None) -> WireObservation:
        msg: dict = {"type": "reset", "seed": seed}
        if overrides:
            msg["config"] = overrides
        reply = self._round_trip(msg)
        if reply.get("type") != "observation":
            raise EnvProtocolError(f"expected observation, got {reply.get('type')!r}")
        return _decode_observation(reply)

    def act(self, assignments: List[Tuple[int, Tuple[int, ...]]]) -> WireTransition:
        reply = self._round_trip(
            {
                "type": "act",
                "assignments": [[tid, list(pids)] for tid, pids in assignments],
            }
        )
        if reply.get("type") != "transition":
            raise EnvProtocolError(f"expected transition, got {reply.get('type')!r}")
        return WireTransition(
            reward=reply["reward"],
            done=reply["done"],
            breakdown=reply["breakdown"],
            info=reply["info"],
            observation=_decode_observation(reply["observation"]),
        )

    def close(self) -> None:
        proc = self._proc
        if proc.poll() is None:
            try:
                proc.stdin.write('{"type":"close"}\n')
                proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()

    def __enter__(self) -> "EnvClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def setting_overrides(
    s: int,
    t: int,
    p: int,
    preset: Optional[str] = None,
    weights: Optional[Sequence[float]] = None,
    **extra,
) -> dict:
    """Config override mapping for an (s, t, p) environment setting."""
    overrides: dict = {
        "intervals_per_episode": s,
        "max_tasks_per_interval": t,
        "num_participants": p,
    }
    if preset is not None:
        overrides["preset"] = preset
    if weights is not None:
        names = ("w_assign_dist", "w_trip_dist", "w_time", "w_fairness", "w_energy")
        overrides.update(dict(zip(names, weights)))
    overrides.update(extra)
    return overrides


# the smallest gated world: one interval, one task, two workers, scored on
# assignment and service distance only; everything resolves in one step
ATOM_OVERRIDES = setting_overrides(
    1,
    1,
    2,
    weights=(1.0, 1.0, 0.0, 0.0, 0.0),
    grid_width=4,
    grid_height=4,
    speed_min=8.0,
    speed_max=8.0,
    weather_amplitude=0.0,
    cancel_prob=0.0,
    fixed_task_count=True,
)
