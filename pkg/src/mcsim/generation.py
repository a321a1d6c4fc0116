"""Task and participant generation: synthetic, trip-record replay, scripted.

A generator owns its own random stream so that task arrivals never
perturb other stochastic parts of the engine (cancellations, grid
speeds). Replay mode projects real ride records onto the grid through an
axis-aligned bounding box; ingestion is tolerant per row (malformed and
out-of-box rows are dropped and counted, never fatal) but strict about
the file itself (missing file or missing columns raise).
"""
from __future__ import annotations

import csv
import math
import os
import random
from dataclasses import dataclass
from datetime import datetime
from typing import List, NamedTuple, Optional, Sequence, Tuple

from .domain import (
    EmptyPoolError,
    GridCoord,
    GridMap,
    InvalidConfigError,
    OutOfBboxError,
    SchemaMismatchError,
    SimConfig,
    Task,
    TaskStatus,
    TripFileMissingError,
    grid_distance,
)

TRIP_COLUMNS = (
    "pickup_datetime",
    "dropoff_datetime",
    "pickup_latitude",
    "pickup_longitude",
    "dropoff_latitude",
    "dropoff_longitude",
    "trip_distance",
    "fare_amount",
)

POINT_COLUMNS = ("datetime", "latitude", "longitude")


def latlon_to_grid(
    lat: float,
    lon: float,
    bbox: Tuple[float, float, float, float],
    width: int,
    height: int,
) -> GridCoord:
    """Project a lat/lon point into cell coordinates.

    ``bbox`` is (lat_min, lat_max, lon_min, lon_max); latitude maps to x,
    longitude to y, each linearly then floored. Points on the top edge
    clamp into the last cell; points outside raise.
    """
    lat_min, lat_max, lon_min, lon_max = bbox
    if lat_max <= lat_min or lon_max <= lon_min:
        raise InvalidConfigError("bbox must have positive extent on both axes")
    if not (lat_min <= lat <= lat_max and lon_min <= lon <= lon_max):
        raise OutOfBboxError(f"point ({lat}, {lon}) outside bbox {bbox}")
    x = int((lat - lat_min) / (lat_max - lat_min) * width)
    y = int((lon - lon_min) / (lon_max - lon_min) * height)
    return GridCoord(min(x, width - 1), min(y, height - 1))


_TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


@dataclass(frozen=True)
class TripRecord:
    """One parsed ride: timestamps, raw coordinates, distance, fare."""

    pickup_time: datetime
    dropoff_time: datetime
    pickup: Tuple[float, float]
    dropoff: Tuple[float, float]
    trip_distance: float
    fare: float


@dataclass(frozen=True)
class IngestReport:
    """Row accounting for one ingestion pass."""

    parsed: int
    malformed: int
    out_of_bbox: int


class TripPool(NamedTuple):
    """Immutable in-bbox trips plus their grid projections, index-aligned."""

    records: Tuple[TripRecord, ...]
    bbox: Tuple[float, float, float, float]
    pickups: Tuple[GridCoord, ...]
    dropoffs: Tuple[GridCoord, ...]

    def __len__(self) -> int:
        return len(self.records)


def ingest_trip_records(
    path: str,
    bbox: Tuple[float, float, float, float],
    width: int,
    height: int,
) -> Tuple[TripPool, IngestReport]:
    """Read a trip CSV into a pool of in-bbox records plus a row report.

    Rows violating record invariants (unparseable fields, dropoff before
    pickup, negative fare or distance) count as malformed; rows with an
    endpoint outside the bbox count as out-of-box. Both are skipped.
    """
    if not os.path.exists(path):
        raise TripFileMissingError(f"trip records file not found: {path}")
    records: List[TripRecord] = []
    pickups: List[GridCoord] = []
    dropoffs: List[GridCoord] = []
    malformed = 0
    out_of_bbox = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in TRIP_COLUMNS if c not in header]
        if missing:
            raise SchemaMismatchError(
                f"trip records file missing columns: {', '.join(missing)}"
            )
        for row in reader:
            try:
                ptime = datetime.strptime(row["pickup_datetime"], _TIME_FORMAT)
                dtime = datetime.strptime(row["dropoff_datetime"], _TIME_FORMAT)
                plat = float(row["pickup_latitude"])
                plon = float(row["pickup_longitude"])
                dlat = float(row["dropoff_latitude"])
                dlon = float(row["dropoff_longitude"])
                distance = float(row["trip_distance"])
                fare = float(row["fare_amount"])
            except (TypeError, ValueError):
                malformed += 1
                continue
            if dtime < ptime or fare < 0 or distance < 0:
                malformed += 1
                continue
            try:
                pickup = latlon_to_grid(plat, plon, bbox, width, height)
                dropoff = latlon_to_grid(dlat, dlon, bbox, width, height)
            except OutOfBboxError:
                out_of_bbox += 1
                continue
            records.append(
                TripRecord(ptime, dtime, (plat, plon), (dlat, dlon), distance, fare)
            )
            pickups.append(pickup)
            dropoffs.append(dropoff)
    pool = TripPool(tuple(records), tuple(bbox), tuple(pickups), tuple(dropoffs))
    return pool, IngestReport(len(records), malformed, out_of_bbox)


def load_participant_points(
    path: str,
    bbox: Tuple[float, float, float, float],
    width: int,
    height: int,
) -> List[GridCoord]:
    """Read a points CSV (datetime, latitude, longitude) onto the grid."""
    if not os.path.exists(path):
        raise TripFileMissingError(f"points file not found: {path}")
    points: List[GridCoord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in POINT_COLUMNS if c not in header]
        if missing:
            raise SchemaMismatchError(
                f"points file missing columns: {', '.join(missing)}"
            )
        for line_no, row in enumerate(reader, start=2):
            try:
                lat = float(row["latitude"])
                lon = float(row["longitude"])
            except (TypeError, ValueError):
                raise SchemaMismatchError(
                    f"non-numeric field in points file at line {line_no}"
                ) from None
            points.append(latlon_to_grid(lat, lon, bbox, width, height))
    return points


def default_time_limit(distance: int, mean_speed: float) -> int:
    """Deadline in intervals: twice the straight-through travel time, >= 1."""
    return max(1, math.ceil(2.0 * distance / mean_speed))


def default_fare(distance: int, fare_base: float, fare_rate: float) -> float:
    return fare_base + fare_rate * distance


class TaskSource:
    """Interface: yield the batch of tasks arriving at one interval."""

    def generate(
        self, interval: int, first_id: int, first_recruiter: int
    ) -> List[Task]:
        raise NotImplementedError

    def clone(self, rng: random.Random) -> "TaskSource":
        """Copy bound to ``rng`` (already holding the matching stream state)."""
        raise NotImplementedError


class SyntheticSource(TaskSource):
    """Uniformly random tasks on the grid.

    Per interval the batch size is uniform on {0..max_count}, or exactly
    ``max_count`` when fixed; origins and destinations are uniform cells
    drawn independently.
    """

    def __init__(self, config: SimConfig, grid: GridMap, rng: random.Random):
        self._config = config
        self._grid = grid
        self._rng = rng
        self._mean_speed = grid.mean_speed

    def clone(self, rng: random.Random) -> "SyntheticSource":
        return SyntheticSource(self._config, self._grid, rng)

    def generate(
        self, interval: int, first_id: int, first_recruiter: int
    ) -> List[Task]:
        cfg = self._config
        cap = cfg.max_tasks_per_interval
        rand = self._rng.random
        count = cap if cfg.fixed_task_count else int(rand() * (cap + 1))
        width = self._grid.width
        height = self._grid.height
        mean = self._mean_speed
        fare_base = cfg.fare_base
        fare_rate = cfg.fare_rate
        required = cfg.required_participants
        new = tuple.__new__
        ceil = math.ceil
        pending = TaskStatus.PENDING
        tasks = []
        append = tasks.append
        for k in range(count):
            ox = int(rand() * width)
            oy = int(rand() * height)
            dx = int(rand() * width)
            dy = int(rand() * height)
            dist = abs(ox - dx) + abs(oy - dy)
            append(
                new(
                    Task,
                    (
                        first_id + k,
                        first_recruiter + k,
                        (ox, oy),
                        (dx, dy),
                        interval,
                        fare_base + fare_rate * dist,
                        max(1, ceil(2.0 * dist / mean)),
                        required,
                        pending,
                    ),
                )
            )
        return tasks


class TripRecordSource(TaskSource):
    """Tasks drawn from a trip pool; fares come from the records.

    With resampling the pool is sampled with replacement forever; without,
    records are consumed in a seed-shuffled order and exhausting the pool
    raises.
    """

    def __init__(
        self,
        pool: TripPool,
        config: SimConfig,
        grid: GridMap,
        rng: random.Random,
    ):
        if not pool.records:
            raise EmptyPoolError("trip record pool is empty")
        self._pool = pool
        self._config = config
        self._rng = rng
        self._mean_speed = grid.mean_speed
        self._resample = config.resample_records
        self._order: List[int] = []
        self._cursor = 0
        if not self._resample:
            self._order = list(range(len(pool.records)))
            rng.shuffle(self._order)

    def clone(self, rng: random.Random) -> "TripRecordSource":
        other = object.__new__(TripRecordSource)
        other._pool = self._pool
        other._config = self._config
        other._rng = rng
        other._mean_speed = self._mean_speed
        other._resample = self._resample
        other._order = self._order
        other._cursor = self._cursor
        return other

    def _next_index(self) -> int:
        if self._resample:
            return int(self._rng.random() * len(self._pool.records))
        if self._cursor >= len(self._order):
            raise EmptyPoolError("trip record pool exhausted")
        index = self._order[self._cursor]
        self._cursor += 1
        return index

    def generate(
        self, interval: int, first_id: int, first_recruiter: int
    ) -> List[Task]:
        cap = self._config.max_tasks_per_interval
        count = cap if self._config.fixed_task_count else int(self._rng.random() * (cap + 1))
        pool = self._pool
        tasks = []
        for k in range(count):
            index = self._next_index()
            origin = pool.pickups[index]
            destination = pool.dropoffs[index]
            dist = grid_distance(origin, destination)
            tasks.append(
                Task(
                    id=first_id + k,
                    recruiter_id=first_recruiter + k,
                    origin=origin,
                    destination=destination,
                    arrival_interval=interval,
                    fare=pool.records[index].fare,
                    time_limit=default_time_limit(dist, self._mean_speed),
                    required_participants=self._config.required_participants,
                )
            )
        return tasks


class ScriptedSource(TaskSource):
    """Replays a fixed schedule: interval -> list of task prototypes.

    Prototype ids are ignored; real ids are assigned in arrival order so
    scripted episodes obey the same dense-id convention as generated ones.
    """

    def __init__(self, schedule: dict):
        self._schedule = {int(k): tuple(v) for k, v in schedule.items()}

    def clone(self, rng: random.Random) -> "ScriptedSource":
        return self

    def generate(
        self, interval: int, first_id: int, first_recruiter: int
    ) -> List[Task]:
        protos = self._schedule.get(interval, ())
        return [
            proto._replace(
                id=first_id + k,
                recruiter_id=first_recruiter + k,
                arrival_interval=interval,
            )
            for k, proto in enumerate(protos)
        ]


def build_grid(config: SimConfig, rng: random.Random) -> GridMap:
    """Materialize the map: explicit speed table or random uniform draws."""
    if config.base_speeds is not None:
        cells = tuple(tuple(float(v) for v in col) for col in config.base_speeds)
        if len(cells) != config.grid_width or any(
            len(col) != config.grid_height for col in cells
        ):
            raise InvalidConfigError("base_speeds shape must match the grid")
        return GridMap(
            config.grid_width,
            config.grid_height,
            cells,
            config.weather_amplitude,
            config.weather_period,
        )
    lo = config.speed_min
    span = config.speed_max - config.speed_min
    rand = rng.random
    height = config.grid_height
    total = 0.0
    peak = 0.0
    cols = []
    for _ in range(config.grid_width):
        col = tuple(lo + span * rand() for _ in range(height))
        cols.append(col)
        total += sum(col)
        top = max(col)
        if top > peak:
            peak = top
    # Drawn values are positive by config validation, so skip table checks.
    return GridMap._trusted(
        config.grid_width,
        config.grid_height,
        tuple(cols),
        config.weather_amplitude,
        config.weather_period,
        total / (config.grid_width * height),
        peak,
    )


def initial_positions(
    config: SimConfig, rng: random.Random, points: Optional[Sequence[GridCoord]] = None
) -> List[GridCoord]:
    """Starting cells for the roster: sampled points file or uniform cells."""
    if points is not None:
        if not points:
            raise EmptyPoolError("participant points pool is empty")
        n = len(points)
        return [points[int(rng.random() * n)] for _ in range(config.num_participants)]
    rand = rng.random
    width = config.grid_width
    height = config.grid_height
    return [
        (int(rand() * width), int(rand() * height))
        for _ in range(config.num_participants)
    ]


def build_source(
    config: SimConfig,
    grid: GridMap,
    rng: random.Random,
    scripted_schedule: Optional[dict] = None,
    trip_pool: Optional[TripPool] = None,
) -> TaskSource:
    if config.data_source == "scripted":
        return ScriptedSource(scripted_schedule or {})
    if config.data_source == "trip_records":
        if trip_pool is None:
            if config.bbox is None:
                raise InvalidConfigError("trip_records data source needs a bbox")
            trip_pool, _ = ingest_trip_records(
                config.trip_records_path, config.bbox, grid.width, grid.height
            )
        return TripRecordSource(trip_pool, config, grid, rng)
    return SyntheticSource(config, grid, rng)
