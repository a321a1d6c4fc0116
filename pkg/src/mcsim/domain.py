"""Shared data model for the mobile-crowdsourcing world.

Tasks, participants, the grid, observations, actions and reward
configuration live here; every other module builds on these records.
All types are immutable values once constructed and safe to share
across threads.

Conventions used throughout the engine:

* the map is a ``width x height`` grid of cells; distance is Manhattan
  and movement is 4-neighbor,
* ids (tasks, participants) are dense non-negative integers assigned in
  generation order, and every tie anywhere breaks by lowest id,
* ``h`` indexes decision intervals; an episode has ``s`` of them.
"""
from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

TASK_FEATURE_WIDTH = 9
PARTICIPANT_FEATURE_WIDTH = 8


class McsError(Exception):
    """Base error; ``code`` is the stable machine-readable identifier."""

    code = "ERROR"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail


class InvalidConfigError(McsError):
    code = "INVALID_CONFIG"


class EpisodeDoneError(McsError):
    code = "EPISODE_DONE"


class InvalidAssignmentError(McsError):
    code = "INVALID_ASSIGNMENT"

    def __init__(self, violation: "Violation"):
        super().__init__(str(violation))
        self.violation = violation


class TripFileMissingError(McsError):
    code = "FILE_NOT_FOUND"


class SchemaMismatchError(McsError):
    code = "SCHEMA_MISMATCH"


class EmptyPoolError(McsError):
    code = "EMPTY_POOL"


class OutOfBboxError(McsError):
    code = "OUT_OF_BBOX"


class SearchTooLargeError(McsError):
    code = "SEARCH_TOO_LARGE"

    def __init__(self, bound: int, limit: int):
        super().__init__(f"search space {bound} exceeds limit {limit}")
        self.bound = bound
        self.limit = limit


class UnknownPresetError(McsError):
    code = "UNKNOWN_PRESET"


class ProtocolError(McsError):
    code = "PROTOCOL"


class EmptyResultsError(McsError):
    code = "EMPTY_RESULTS"


def derive_seed(seed: int, label: str) -> int:
    """Stable 64-bit child seed for an independent random stream."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def stream_seeds(seed: int) -> Tuple[int, int, int]:
    """The (grid, generation, cancellation) child seeds for one episode."""
    digest = hashlib.sha256(f"{seed}:streams".encode()).digest()
    return (
        int.from_bytes(digest[0:8], "little"),
        int.from_bytes(digest[8:16], "little"),
        int.from_bytes(digest[16:24], "little"),
    )


class GridCoord(NamedTuple):
    x: int
    y: int


def grid_distance(a: Sequence[int], b: Sequence[int]) -> int:
    """Manhattan distance in cells between two grid coordinates."""
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass(frozen=True)
class GridMap:
    """The city grid: per-cell base speeds plus a time-varying weather factor.

    ``base_speed[x][y]`` is in cells per interval and must be positive.
    The effective speed in a cell at interval ``h`` is

        base_speed(x, y) * (1 + weather_amplitude * sin(2*pi*h / weather_period))

    which stays positive because the amplitude is below 1.
    """

    width: int
    height: int
    base_speed: Tuple[Tuple[float, ...], ...]
    weather_amplitude: float = 0.0
    weather_period: int = 24

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidConfigError("grid dimensions must be >= 1")
        if len(self.base_speed) != self.width or any(
            len(col) != self.height for col in self.base_speed
        ):
            raise InvalidConfigError("base_speed must be a width x height table")
        if any(v <= 0 for col in self.base_speed for v in col):
            raise InvalidConfigError("every base_speed value must be > 0")
        if not 0.0 <= self.weather_amplitude < 1.0:
            raise InvalidConfigError("weather_amplitude must be in [0, 1)")
        if self.weather_period < 1:
            raise InvalidConfigError("weather_period must be a positive integer")

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def weather_factor(self, h: int) -> float:
        return 1.0 + self.weather_amplitude * math.sin(
            2.0 * math.pi * h / self.weather_period
        )

    def effective_speed(self, x: int, y: int, h: int) -> float:
        return self.base_speed[x][y] * self.weather_factor(h)

    @cached_property
    def mean_speed(self) -> float:
        total = sum(v for col in self.base_speed for v in col)
        return total / (self.width * self.height)

    @cached_property
    def max_speed(self) -> float:
        return max(v for col in self.base_speed for v in col)

    @cached_property
    def speed_ceiling(self) -> float:
        """Supremum of effective speed over all cells and intervals."""
        return self.max_speed * (1.0 + self.weather_amplitude)

    @classmethod
    def uniform(
        cls,
        width: int,
        height: int,
        speed: float = 1.0,
        weather_amplitude: float = 0.0,
        weather_period: int = 24,
    ) -> "GridMap":
        cells = tuple(tuple(float(speed) for _ in range(height)) for _ in range(width))
        return cls(width, height, cells, weather_amplitude, weather_period)

    @classmethod
    def _trusted(
        cls,
        width: int,
        height: int,
        base_speed: Tuple[Tuple[float, ...], ...],
        weather_amplitude: float,
        weather_period: int,
        mean: float,
        peak: float,
    ) -> "GridMap":
        # Construction fast path for internally generated tables; the caller
        # guarantees shape and positivity, and supplies the speed statistics.
        grid = object.__new__(cls)
        grid.__dict__.update(
            width=width,
            height=height,
            base_speed=base_speed,
            weather_amplitude=weather_amplitude,
            weather_period=weather_period,
            mean_speed=mean,
            max_speed=peak,
        )
        return grid


class TaskStatus(enum.Enum):
    PENDING = "pending"
    ASSIGNED = "assigned"
    IN_SERVICE = "in_service"
    COMPLETED = "completed"
    CANCELLED = "cancelled"
    EXPIRED = "expired"


# Legal transitions: the forward service chain plus the two pending-only exits.
_STATUS_SUCCESSORS = {
    TaskStatus.PENDING: {TaskStatus.ASSIGNED, TaskStatus.CANCELLED, TaskStatus.EXPIRED},
    TaskStatus.ASSIGNED: {TaskStatus.IN_SERVICE},
    TaskStatus.IN_SERVICE: {TaskStatus.COMPLETED},
    TaskStatus.COMPLETED: set(),
    TaskStatus.CANCELLED: set(),
    TaskStatus.EXPIRED: set(),
}


def status_transition_allowed(old: TaskStatus, new: TaskStatus) -> bool:
    return new in _STATUS_SUCCESSORS[old]


class Task(NamedTuple):
    """A location-aware request: move one party from origin to destination.

    ``origin == destination`` is permitted (a degenerate zero-distance trip).
    """

    id: int
    recruiter_id: int
    origin: GridCoord
    destination: GridCoord
    arrival_interval: int
    fare: float
    time_limit: int
    required_participants: int = 1
    status: TaskStatus = TaskStatus.PENDING

    @property
    def trip_distance(self) -> int:
        return grid_distance(self.origin, self.destination)


class Participant(NamedTuple):
    """A mobile worker with a FIFO queue of assigned tasks.

    ``busy_until`` is a deterministic estimate of the interval at which the
    current queue drains (``None`` when idle); availability is exactly
    "queue empty and busy_until is None".
    """

    id: int
    position: GridCoord
    queue: Tuple[int, ...] = ()
    busy_until: Optional[int] = None
    cum_tasks_completed: int = 0
    cum_incentive: float = 0.0
    cum_distance: int = 0
    cum_service_time: int = 0
    cum_assignments: int = 0

    @property
    def available(self) -> bool:
        return not self.queue and self.busy_until is None


class ParticipantColumns(NamedTuple):
    """Column-oriented snapshot of the roster at one interval.

    Index ``i`` across every column describes participant ``ids[i]``; ids are
    dense, so ``ids[i] == i`` for simulator-produced snapshots.
    """

    ids: Tuple[int, ...]
    x: Tuple[int, ...]
    y: Tuple[int, ...]
    available: Tuple[int, ...]
    queue_len: Tuple[int, ...]
    busy_remaining: Tuple[int, ...]
    cum_tasks: Tuple[int, ...]
    cum_incentive: Tuple[float, ...]
    cum_assignments: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.ids)

    def position(self, i: int) -> GridCoord:
        return GridCoord(self.x[i], self.y[i])


class Observation:
    """Per-interval state: padded, masked feature matrices plus raw views.

    The raw views (``tasks`` pending in arrival order, ``participants``
    columns) are what policies consume directly; the numeric matrices are
    materialized lazily on first access, from the same immutable snapshot,
    so cheap consumers never pay for feature extraction.

    Environment features (per-cell effective speed) are embedded into the
    task and participant rows rather than carried separately.
    """

    __slots__ = (
        "interval",
        "tasks",
        "participants",
        "env_features_embedded",
        "_builder",
        "_matrices",
    )

    def __init__(
        self,
        interval: int,
        tasks: Tuple[Task, ...],
        participants: ParticipantColumns,
        builder: Optional[Callable[[], tuple]] = None,
        matrices: Optional[tuple] = None,
    ):
        self.interval = interval
        self.tasks = tasks
        self.participants = participants
        self.env_features_embedded = True
        self._builder = builder
        self._matrices = matrices

    def _materialized(self) -> tuple:
        if self._matrices is None:
            self._matrices = self._builder()
        return self._matrices

    @property
    def task_features(self) -> np.ndarray:
        return self._materialized()[0]

    @property
    def task_mask(self) -> np.ndarray:
        return self._materialized()[1]

    @property
    def participant_features(self) -> np.ndarray:
        return self._materialized()[2]

    @property
    def participant_mask(self) -> np.ndarray:
        return self._materialized()[3]

    @property
    def task_ids(self) -> Tuple[int, ...]:
        return tuple(t.id for t in self.tasks)

    @property
    def participant_ids(self) -> Tuple[int, ...]:
        return self.participants.ids

    def equals(self, other: "Observation") -> bool:
        return (
            self.interval == other.interval
            and self.tasks == other.tasks
            and self.participants == other.participants
            and np.array_equal(self.task_features, other.task_features)
            and np.array_equal(self.task_mask, other.task_mask)
            and np.array_equal(self.participant_features, other.participant_features)
            and np.array_equal(self.participant_mask, other.participant_mask)
        )


class Action(NamedTuple):
    """One interval's assignment: (task id -> ordered participant ids) pairs.

    Omitting a pending task is legal (it stays pending); listing a task means
    committing exactly ``required_participants`` distinct workers to it, and
    no participant may appear twice across the whole action.
    """

    assignments: Tuple[Tuple[int, Tuple[int, ...]], ...] = ()

    @classmethod
    def of(cls, pairs: Iterable[Tuple[int, Iterable[int]]]) -> "Action":
        return cls(tuple((tid, tuple(pids)) for tid, pids in pairs))

    @classmethod
    def empty(cls) -> "Action":
        return cls(())


UNKNOWN_TASK = "UNKNOWN_TASK"
UNKNOWN_PARTICIPANT = "UNKNOWN_PARTICIPANT"
DUPLICATE_PARTICIPANT = "DUPLICATE_PARTICIPANT"
DUPLICATE_TASK = "DUPLICATE_TASK"
WRONG_PARTY_SIZE = "WRONG_PARTY_SIZE"


class Violation(NamedTuple):
    code: str
    task_id: Optional[int] = None
    participant_id: Optional[int] = None
    detail: str = ""

    def __str__(self) -> str:
        parts = [self.code]
        if self.task_id is not None:
            parts.append(f"task={self.task_id}")
        if self.participant_id is not None:
            parts.append(f"participant={self.participant_id}")
        if self.detail:
            parts.append(self.detail)
        return " ".join(parts)


def _pending_requirements(pending_tasks) -> Mapping[int, int]:
    if isinstance(pending_tasks, Mapping):
        return pending_tasks
    required = {}
    for entry in pending_tasks:
        if isinstance(entry, Task):
            required[entry.id] = entry.required_participants
        else:
            required[int(entry)] = 1
    return required


def _participant_ids(participants) -> frozenset:
    if isinstance(participants, frozenset):
        return participants
    if isinstance(participants, ParticipantColumns):
        return frozenset(participants.ids)
    ids = []
    for entry in participants:
        ids.append(entry.id if isinstance(entry, Participant) else int(entry))
    return frozenset(ids)


def validate_action(action: Action, pending_tasks, participants) -> Optional[Violation]:
    """Check an action against the current pending set and roster.

    ``pending_tasks`` may be a mapping (task id -> required party size), an
    iterable of Task records, or an iterable of ids (party size 1 assumed).
    ``participants`` may be ParticipantColumns, Participant records, or ids.
    Returns ``None`` when every invariant holds, otherwise the first
    violation in assignment order.
    """
    if not action.assignments:
        return None
    required = _pending_requirements(pending_tasks)
    roster = _participant_ids(participants)
    seen_tasks = set()
    seen_participants = set()
    for tid, pids in action.assignments:
        if tid in seen_tasks:
            return Violation(DUPLICATE_TASK, task_id=tid)
        seen_tasks.add(tid)
        if tid not in required:
            return Violation(UNKNOWN_TASK, task_id=tid)
        if len(pids) != required[tid]:
            return Violation(
                WRONG_PARTY_SIZE,
                task_id=tid,
                detail=f"expected {required[tid]}, got {len(pids)}",
            )
        for pid in pids:
            if pid not in roster:
                return Violation(UNKNOWN_PARTICIPANT, task_id=tid, participant_id=pid)
            if pid in seen_participants:
                return Violation(DUPLICATE_PARTICIPANT, task_id=tid, participant_id=pid)
            seen_participants.add(pid)
    return None


@dataclass(frozen=True)
class RewardWeights:
    """Non-negative weights for the five higher-is-better objectives."""

    w_assign_dist: float = 1.0
    w_trip_dist: float = 1.0
    w_time: float = 1.0
    w_fairness: float = 1.0
    w_energy: float = 1.0

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (
            self.w_assign_dist,
            self.w_trip_dist,
            self.w_time,
            self.w_fairness,
            self.w_energy,
        )

    def validate(self) -> None:
        values = self.as_tuple()
        if any(w < 0 for w in values):
            raise InvalidConfigError("reward weights must be non-negative")
        if all(w == 0 for w in values):
            raise InvalidConfigError("at least one reward weight must be positive")


class RewardBreakdown(NamedTuple):
    """Unweighted objective values for one interval plus the weighted total."""

    o_assign_dist: float
    o_trip_dist: float
    o_time: float
    o_fairness: float
    o_energy: float
    total: float = 0.0

    def components(self) -> Tuple[float, float, float, float, float]:
        return (
            self.o_assign_dist,
            self.o_trip_dist,
            self.o_time,
            self.o_fairness,
            self.o_energy,
        )


COMPONENT_NAMES = ("o_assign_dist", "o_trip_dist", "o_time", "o_fairness", "o_energy")
WEIGHT_NAMES = ("w_assign_dist", "w_trip_dist", "w_time", "w_fairness", "w_energy")

DATA_SOURCES = ("synthetic", "trip_records", "scripted")


@dataclass(frozen=True)
class SimConfig:
    """Full environment configuration; (config, seed) determines an episode.

    ``intervals_per_episode`` / ``max_tasks_per_interval`` /
    ``num_participants`` are the s/t/p environment-setting triple. When
    ``base_speeds`` is None, per-cell speeds are drawn once at reset from
    uniform[speed_min, speed_max]. Per-cell energy per traversed cell is
    ``energy_e0 + energy_e1 * effective_speed**2``.
    """

    intervals_per_episode: int = 5
    max_tasks_per_interval: int = 5
    num_participants: int = 10
    grid_width: int = 10
    grid_height: int = 10
    speed_min: float = 1.0
    speed_max: float = 3.0
    weather_amplitude: float = 0.2
    weather_period: int = 24
    cancel_prob: float = 0.05
    seed: int = 0
    data_source: str = "synthetic"
    trip_records_path: Optional[str] = None
    bbox: Optional[Tuple[float, float, float, float]] = None
    resample_records: bool = True
    fixed_task_count: bool = False
    fare_base: float = 2.0
    fare_rate: float = 0.5
    energy_e0: float = 1.0
    energy_e1: float = 0.1
    required_participants: int = 1
    preset: Optional[str] = "balanced"
    weights: Optional[RewardWeights] = None
    dist_scale: Optional[float] = None
    time_scale: Optional[float] = None
    fare_scale: float = 10.0
    energy_scale: Optional[float] = None
    base_speeds: Optional[Tuple[Tuple[float, ...], ...]] = None
    record_events: bool = True

    def validate(self) -> None:
        problems = []
        if self.intervals_per_episode < 1:
            problems.append("intervals_per_episode must be >= 1")
        if self.max_tasks_per_interval < 1:
            problems.append("max_tasks_per_interval must be >= 1")
        if self.num_participants < 1:
            problems.append("num_participants must be >= 1")
        if self.grid_width < 1 or self.grid_height < 1:
            problems.append("grid dimensions must be >= 1")
        if self.base_speeds is None and not 0 < self.speed_min <= self.speed_max:
            problems.append("need 0 < speed_min <= speed_max")
        if not 0.0 <= self.weather_amplitude < 1.0:
            problems.append("weather_amplitude must be in [0, 1)")
        if self.weather_period < 1:
            problems.append("weather_period must be >= 1")
        if not 0.0 <= self.cancel_prob <= 1.0:
            problems.append("cancel_prob must be in [0, 1]")
        if self.data_source not in DATA_SOURCES:
            problems.append(f"data_source must be one of {DATA_SOURCES}")
        if self.data_source == "trip_records" and not self.trip_records_path:
            problems.append("trip_records data source needs trip_records_path")
        if self.required_participants < 1:
            problems.append("required_participants must be >= 1")
        for name in ("dist_scale", "time_scale", "energy_scale"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                problems.append(f"{name} must be > 0")
        if self.fare_scale <= 0:
            problems.append("fare_scale must be > 0")
        if problems:
            raise InvalidConfigError("; ".join(problems))
        if self.weights is not None:
            self.weights.validate()


class Transition(NamedTuple):
    """Result of one simulator step."""

    observation: Observation
    reward: float
    breakdown: RewardBreakdown
    done: bool
    info: dict
