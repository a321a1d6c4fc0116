"""Task sources, projection, fares, and trip-record ingestion."""
import collections
import random

import pytest

from mcsim import GridCoord, InvalidConfigError, SimConfig
from mcsim.domain import (
    EmptyPoolError,
    OutOfBboxError,
    SchemaMismatchError,
    TripFileMissingError,
    grid_distance,
)
from mcsim.generation import (
    SyntheticSource,
    build_grid,
    default_fare,
    default_time_limit,
    ingest_trip_records,
    initial_positions,
    latlon_to_grid,
    load_participant_points,
    TripRecordSource,
)
from conftest import BBOX


class TestLatLonProjection:
    bbox = (40.0, 41.0, -74.0, -73.0)

    def test_corners(self):
        assert latlon_to_grid(40.0, -74.0, self.bbox, 10, 10) == (0, 0)
        assert latlon_to_grid(41.0, -73.0, self.bbox, 10, 10) == (9, 9)

    def test_midpoint(self):
        assert latlon_to_grid(40.5, -73.5, self.bbox, 10, 10) == (5, 5)

    def test_outside_raises(self):
        with pytest.raises(OutOfBboxError):
            latlon_to_grid(42.0, -73.5, self.bbox, 10, 10)
        with pytest.raises(OutOfBboxError):
            latlon_to_grid(40.5, -75.0, self.bbox, 10, 10)

    def test_degenerate_bbox_rejected(self):
        with pytest.raises(InvalidConfigError):
            latlon_to_grid(40.0, -74.0, (40.0, 40.0, -74.0, -73.0), 10, 10)


def test_synthetic_fare_example():
    assert default_fare(grid_distance((0, 0), (3, 4)), 2.0, 0.5) == pytest.approx(5.5)


def test_default_time_limit_scales_with_distance():
    assert default_time_limit(0, 1.0) >= 1
    assert default_time_limit(10, 2.0) >= default_time_limit(4, 2.0)


def test_initial_positions_cover_grid_uniformly():
    cfg = SimConfig(num_participants=1, grid_width=2, grid_height=2)
    rng = random.Random(0)
    hits = collections.Counter()
    for _ in range(10000):
        (pos,) = initial_positions(cfg, rng)
        hits[tuple(pos)] += 1
    assert set(hits) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    for count in hits.values():
        assert abs(count / 10000 - 0.25) < 0.02


def test_initial_positions_from_points():
    cfg = SimConfig(num_participants=5, grid_width=4, grid_height=4)
    rng = random.Random(1)
    points = [GridCoord(1, 2), GridCoord(3, 3)]
    for pos in initial_positions(cfg, rng, points):
        assert tuple(pos) in {(1, 2), (3, 3)}


def test_build_grid_respects_bounds():
    cfg = SimConfig(grid_width=3, grid_height=4, speed_min=1.5, speed_max=2.5)
    grid = build_grid(cfg, random.Random(7))
    assert grid.width == 3 and grid.height == 4
    for col in grid.base_speed:
        for v in col:
            assert 1.5 <= v <= 2.5
    again = build_grid(cfg, random.Random(7))
    assert again.base_speed == grid.base_speed


def test_build_grid_explicit_table():
    cfg = SimConfig(grid_width=2, grid_height=1, base_speeds=((2.0,), (3.0,)))
    grid = build_grid(cfg, random.Random(0))
    assert grid.base_speed == ((2.0,), (3.0,))
    bad = SimConfig(grid_width=2, grid_height=2, base_speeds=((2.0,), (3.0,)))
    with pytest.raises(InvalidConfigError):
        build_grid(bad, random.Random(0))


class TestSyntheticSource:
    def make(self, seed=0, **overrides):
        cfg = SimConfig(max_tasks_per_interval=4, grid_width=5, grid_height=5, **overrides)
        grid = build_grid(cfg, random.Random(99))
        return cfg, SyntheticSource(cfg, grid, random.Random(seed))

    def test_ids_are_dense_and_fields_sane(self):
        cfg, source = self.make()
        seen = 0
        for h in range(50):
            tasks = source.generate(h, seen, seen)
            for k, task in enumerate(tasks):
                assert task.id == seen + k
                assert task.arrival_interval == h
                assert 0 <= task.origin[0] < 5 and 0 <= task.origin[1] < 5
                assert 0 <= task.destination[0] < 5 and 0 <= task.destination[1] < 5
                assert task.fare > 0 and task.time_limit >= 1
                assert task.required_participants == cfg.required_participants
            seen += len(tasks)
            assert len(tasks) <= 4

    def test_count_spans_zero_to_cap(self):
        _, source = self.make(seed=3)
        counts = collections.Counter(
            len(source.generate(h, 0, 0)) for h in range(4000)
        )
        assert set(counts) == {0, 1, 2, 3, 4}

    def test_fixed_count_pins_cap(self):
        _, source = self.make(seed=3, fixed_task_count=True)
        for h in range(50):
            assert len(source.generate(h, 0, 0)) == 4

    def test_fare_matches_distance_formula(self):
        cfg, source = self.make(fare_base=2.0, fare_rate=0.5)
        for h in range(20):
            for task in source.generate(h, 0, 0):
                dist = grid_distance(task.origin, task.destination)
                assert task.fare == pytest.approx(default_fare(dist, 2.0, 0.5))


class TestIngestion:
    def test_clean_file(self, trip_csv):
        pool, report = ingest_trip_records(trip_csv, BBOX, 10, 10)
        assert report.parsed == 3
        assert report.malformed == 0
        assert report.out_of_bbox == 0
        assert len(pool) == 3
        assert len(pool.pickups) == 3 and len(pool.dropoffs) == 3
        for cell in pool.pickups + pool.dropoffs:
            assert 0 <= cell[0] < 10 and 0 <= cell[1] < 10
        assert [r.fare for r in pool.records] == [11.8, 6.3, 5.0]

    def test_dirty_rows_counted_not_fatal(self, dirty_trip_csv):
        pool, report = ingest_trip_records(dirty_trip_csv, BBOX, 10, 10)
        assert report.parsed == 3
        assert report.malformed == 3
        assert report.out_of_bbox == 1
        assert len(pool) == 3

    def test_idempotent(self, dirty_trip_csv):
        first = ingest_trip_records(dirty_trip_csv, BBOX, 10, 10)
        second = ingest_trip_records(dirty_trip_csv, BBOX, 10, 10)
        assert first[0].records == second[0].records
        assert first[1] == second[1]

    def test_missing_file_fatal(self):
        with pytest.raises(TripFileMissingError):
            ingest_trip_records("/no/such/file.csv", BBOX, 10, 10)

    def test_missing_column_fatal(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("pickup_datetime,dropoff_datetime\na,b\n")
        with pytest.raises(SchemaMismatchError):
            ingest_trip_records(str(path), BBOX, 10, 10)


class TestTripRecordSource:
    def pool(self, trip_csv):
        pool, _ = ingest_trip_records(trip_csv, BBOX, 10, 10)
        return pool

    def test_tasks_use_pool_cells_and_fares(self, trip_csv):
        pool = self.pool(trip_csv)
        cfg = SimConfig(
            max_tasks_per_interval=2,
            data_source="trip_records",
            trip_records_path=trip_csv,
            bbox=BBOX,
        )
        grid = build_grid(cfg, random.Random(5))
        source = TripRecordSource(pool, cfg, grid, random.Random(0))
        fares = {r.fare for r in pool.records}
        cells = set(map(tuple, pool.pickups))
        for h in range(30):
            for task in source.generate(h, 0, 0):
                assert task.fare in fares
                assert tuple(task.origin) in cells

    def test_exhaustion_without_resample(self, trip_csv):
        pool = self.pool(trip_csv)
        cfg = SimConfig(
            max_tasks_per_interval=3,
            data_source="trip_records",
            trip_records_path=trip_csv,
            bbox=BBOX,
            resample_records=False,
            fixed_task_count=True,
        )
        grid = build_grid(cfg, random.Random(5))
        source = TripRecordSource(pool, cfg, grid, random.Random(0))
        drawn = source.generate(0, 0, 0)
        assert len(drawn) == 3
        with pytest.raises(EmptyPoolError):
            source.generate(1, 10, 10)


def test_point_loader_is_strict(tmp_path):
    good = tmp_path / "points.csv"
    good.write_text(
        "datetime,latitude,longitude\n"
        "2016-03-01 00:00:00,40.75,-73.97\n"
        "2016-03-01 00:01:00,40.76,-73.95\n"
    )
    points = load_participant_points(str(good), BBOX, 10, 10)
    assert len(points) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("datetime,latitude,longitude\n2016-03-01 00:00:00,99.0,-73.97\n")
    with pytest.raises(OutOfBboxError):
        load_participant_points(str(bad), BBOX, 10, 10)
