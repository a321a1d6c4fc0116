"""Core types: distances, grids, action validation, config checks."""
import collections
import random

import pytest
from hypothesis import given, strategies as st

from mcsim import (
    Action,
    GridCoord,
    GridMap,
    InvalidConfigError,
    RewardWeights,
    SimConfig,
    Task,
    TaskStatus,
    grid_distance,
    validate_action,
)
from mcsim.domain import (
    DUPLICATE_PARTICIPANT,
    DUPLICATE_TASK,
    TASK_FEATURE_WIDTH,
    PARTICIPANT_FEATURE_WIDTH,
    UNKNOWN_PARTICIPANT,
    UNKNOWN_TASK,
    WRONG_PARTY_SIZE,
    derive_seed,
    status_transition_allowed,
    stream_seeds,
)

cells = st.tuples(st.integers(0, 30), st.integers(0, 30))


def bfs_distance(a, b, width=31, height=31):
    """Unit-step breadth-first search on the 4-neighbour grid."""
    if a == b:
        return 0
    seen = {a}
    queue = collections.deque([(a, 0)])
    while queue:
        (x, y), d = queue.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < width and 0 <= ny < height and (nx, ny) not in seen:
                if (nx, ny) == b:
                    return d + 1
                seen.add((nx, ny))
                queue.append(((nx, ny), d + 1))
    raise AssertionError("unreachable")


def test_grid_distance_example():
    assert grid_distance((0, 0), (3, 4)) == 7


def test_grid_distance_matches_bfs():
    rng = random.Random(1)
    for _ in range(200):
        a = (rng.randrange(8), rng.randrange(8))
        b = (rng.randrange(8), rng.randrange(8))
        assert grid_distance(a, b) == bfs_distance(a, b, 8, 8)


@given(cells, cells, cells)
def test_grid_distance_is_a_metric(a, b, c):
    assert grid_distance(a, b) >= 0
    assert (grid_distance(a, b) == 0) == (tuple(a) == tuple(b))
    assert grid_distance(a, b) == grid_distance(b, a)
    assert grid_distance(a, c) <= grid_distance(a, b) + grid_distance(b, c)


def test_seed_derivation_is_stable_and_label_sensitive():
    assert derive_seed(7, "policy") == derive_seed(7, "policy")
    assert derive_seed(7, "policy") != derive_seed(7, "grid")
    assert derive_seed(7, "policy") != derive_seed(8, "policy")
    a = stream_seeds(3)
    assert a == stream_seeds(3)
    assert len(a) == 3 and len(set(a)) == 3
    assert stream_seeds(3) != stream_seeds(4)


def test_grid_map_checks_shape_and_speeds():
    with pytest.raises(InvalidConfigError):
        GridMap(2, 2, ((1.0,), (1.0,)), 0.0, 24)
    with pytest.raises(InvalidConfigError):
        GridMap(1, 1, ((0.0,),), 0.0, 24)
    grid = GridMap(2, 3, ((1.0, 2.0, 3.0), (4.0, 5.0, 6.0)), 0.0, 24)
    assert grid.contains(1, 2) and not grid.contains(2, 0)
    assert grid.mean_speed == pytest.approx(3.5)
    assert grid.max_speed == 6.0


def test_weather_factor_cycles():
    grid = GridMap(1, 1, ((2.0,),), 0.5, 4)
    factors = [grid.weather_factor(h) for h in range(4)]
    assert factors[0] == pytest.approx(1.0)
    assert factors[1] == pytest.approx(1.5)
    assert factors[2] == pytest.approx(1.0)
    assert factors[3] == pytest.approx(0.5)
    assert grid.weather_factor(6) == pytest.approx(grid.weather_factor(2))
    assert grid.effective_speed(0, 0, 1) == pytest.approx(3.0)
    assert grid.speed_ceiling == pytest.approx(3.0)


def test_status_transitions():
    ok = [
        (TaskStatus.PENDING, TaskStatus.ASSIGNED),
        (TaskStatus.PENDING, TaskStatus.CANCELLED),
        (TaskStatus.PENDING, TaskStatus.EXPIRED),
        (TaskStatus.ASSIGNED, TaskStatus.IN_SERVICE),
        (TaskStatus.IN_SERVICE, TaskStatus.COMPLETED),
    ]
    for old, new in ok:
        assert status_transition_allowed(old, new)
    bad = [
        (TaskStatus.COMPLETED, TaskStatus.PENDING),
        (TaskStatus.CANCELLED, TaskStatus.ASSIGNED),
        (TaskStatus.ASSIGNED, TaskStatus.CANCELLED),
        (TaskStatus.ASSIGNED, TaskStatus.COMPLETED),
        (TaskStatus.EXPIRED, TaskStatus.COMPLETED),
    ]
    for old, new in bad:
        assert not status_transition_allowed(old, new)


def _task(tid, need=1):
    return Task(tid, tid, GridCoord(0, 0), GridCoord(1, 1), 0, 1.0, 5, need)


class TestValidateAction:
    tasks = [_task(0), _task(1)]
    roster = [0, 1, 2]

    def test_empty_action_is_valid(self):
        assert validate_action(Action.empty(), self.tasks, self.roster) is None

    def test_disjoint_singletons_are_valid(self):
        action = Action.of([(0, (0,)), (1, (1,))])
        assert validate_action(action, self.tasks, self.roster) is None

    def test_duplicate_participant_across_tasks(self):
        action = Action.of([(0, (1,)), (1, (1,))])
        violation = validate_action(action, self.tasks, self.roster)
        assert violation is not None and violation.code == DUPLICATE_PARTICIPANT

    def test_duplicate_task(self):
        action = Action.of([(0, (0,)), (0, (1,))])
        violation = validate_action(action, self.tasks, self.roster)
        assert violation.code == DUPLICATE_TASK

    def test_unknown_task(self):
        violation = validate_action(Action.of([(9, (0,))]), self.tasks, self.roster)
        assert violation.code == UNKNOWN_TASK

    def test_unknown_participant(self):
        violation = validate_action(Action.of([(0, (9,))]), self.tasks, self.roster)
        assert violation.code == UNKNOWN_PARTICIPANT

    def test_wrong_party_size(self):
        violation = validate_action(Action.of([(0, (0, 1))]), self.tasks, self.roster)
        assert violation.code == WRONG_PARTY_SIZE
        pair = [_task(0, need=2)]
        assert validate_action(Action.of([(0, (0, 1))]), pair, self.roster) is None
        violation = validate_action(Action.of([(0, (2,))]), pair, self.roster)
        assert violation.code == WRONG_PARTY_SIZE

    def test_accepts_id_iterables(self):
        action = Action.of([(0, (2,))])
        assert validate_action(action, [0, 1], frozenset({0, 1, 2})) is None


def test_reward_weights_validation():
    RewardWeights().validate()
    with pytest.raises(InvalidConfigError):
        RewardWeights(-1.0, 1, 1, 1, 1).validate()
    with pytest.raises(InvalidConfigError):
        RewardWeights(0, 0, 0, 0, 0).validate()


def test_config_validation_rejects_bad_values():
    SimConfig().validate()
    bad = [
        dict(intervals_per_episode=0),
        dict(max_tasks_per_interval=0),
        dict(num_participants=0),
        dict(grid_width=0),
        dict(speed_min=0.0),
        dict(speed_min=3.0, speed_max=2.0),
        dict(cancel_prob=1.5),
        dict(weather_amplitude=-0.1),
        dict(data_source="nope"),
        dict(required_participants=0),
    ]
    for overrides in bad:
        with pytest.raises(InvalidConfigError):
            SimConfig(**overrides).validate()


def test_feature_widths_are_pinned():
    assert TASK_FEATURE_WIDTH == 9
    assert PARTICIPANT_FEATURE_WIDTH == 8


def test_task_trip_distance():
    assert _task(0).trip_distance == 2
