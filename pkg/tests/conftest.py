"""Shared fixtures: deterministic tiny worlds and a trip-records corpus."""
import dataclasses

import pytest

from mcsim import Action, GridCoord, SimConfig, Simulator, Task

TRIP_CSV = """pickup_datetime,dropoff_datetime,pickup_longitude,pickup_latitude,dropoff_longitude,dropoff_latitude,trip_distance,fare_amount
2016-03-01 00:00:00,2016-03-01 00:07:55,-73.97,40.76,-73.98,40.77,2.5,11.8
2016-03-01 00:10:00,2016-03-01 00:11:06,-73.98,40.74,-73.92,40.75,1.1,6.3
2016-03-01 00:50:00,2016-03-01 00:55:00,-73.96,40.75,-73.95,40.76,0.9,5.0
"""

DIRTY_TRIP_CSV = TRIP_CSV + """2016-03-01 00:12:00,bogus-timestamp,-73.98,40.74,-73.92,40.75,1.1,6.3
2016-03-01 00:20:00,2016-03-01 00:25:00,-60.00,40.74,-73.92,40.75,1.1,6.3
2016-03-01 00:30:00,2016-03-01 00:05:00,-73.98,40.74,-73.92,40.75,1.1,6.3
2016-03-01 00:40:00,2016-03-01 00:45:00,-73.98,40.74,-73.92,40.75,1.1,-2.0
"""

BBOX = (40.70, 40.80, -74.05, -73.90)


def proto(ox, oy, dx, dy, fare=5.0, limit=8, need=1):
    """Task prototype for scripted schedules; ids are reassigned on admit."""
    return Task(0, 0, GridCoord(ox, oy), GridCoord(dx, dy), 0, fare, limit, need)


def flat_config(**overrides):
    """A fully deterministic world: flat unit speeds, no weather, no
    cancellation."""
    base = dict(
        intervals_per_episode=6,
        max_tasks_per_interval=1,
        num_participants=1,
        grid_width=6,
        grid_height=6,
        speed_min=1.0,
        speed_max=1.0,
        weather_amplitude=0.0,
        cancel_prob=0.0,
        data_source="scripted",
        seed=0,
    )
    base.update(overrides)
    return SimConfig(**base)


def scripted_sim(schedule, positions, **overrides):
    cfg = flat_config(**overrides)
    return Simulator(cfg, scripted_schedule=schedule, start_positions=positions)


def drain(sim):
    """Step with empty actions until the episode ends; returns breakdowns."""
    rows = []
    while not sim.done:
        rows.append(sim.step(Action.empty()).breakdown)
    return rows


@pytest.fixture
def trip_csv(tmp_path):
    path = tmp_path / "trips.csv"
    path.write_text(TRIP_CSV)
    return str(path)


@pytest.fixture
def dirty_trip_csv(tmp_path):
    path = tmp_path / "dirty.csv"
    path.write_text(DIRTY_TRIP_CSV)
    return str(path)


@pytest.fixture
def small_config():
    return SimConfig(
        intervals_per_episode=3,
        max_tasks_per_interval=2,
        num_participants=4,
        grid_width=5,
        grid_height=5,
        cancel_prob=0.0,
        seed=0,
    )


def replace(config, **kw):
    return dataclasses.replace(config, **kw)
