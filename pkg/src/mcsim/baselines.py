"""Reference selection policies: greedy heuristics, random, exact search.

Heuristics read only the observation; the exhaustive oracle additionally
clones the simulator to evaluate realized returns, so it sees exactly the
arrivals and cancellations the live episode will see.

Tie-breaking is deterministic everywhere: distances first where stated,
then lowest participant id.
"""
from __future__ import annotations

import random
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .domain import (
    Action,
    InvalidConfigError,
    Observation,
    SearchTooLargeError,
    SimConfig,
)

ORACLE_SEARCH_LIMIT = 1_000_000

_EMPTY_ACTION = Action(())


class Policy:
    """Per-episode decision maker. ``sim`` is only needed by the oracle."""

    name = "policy"

    def begin_episode(self, seed: int) -> None:
        """Called once before each episode with an episode-specific seed."""

    def act(self, obs: Observation, sim=None) -> Action:
        raise NotImplementedError


def _nearest(
    candidates: List[int], cols, ox: int, oy: int, k: int
) -> Optional[Tuple[int, ...]]:
    if len(candidates) < k:
        return None
    if k == 1:
        best = min(candidates, key=lambda i: (abs(cols.x[i] - ox) + abs(cols.y[i] - oy), i))
        return (best,)
    ordered = sorted(
        candidates, key=lambda i: (abs(cols.x[i] - ox) + abs(cols.y[i] - oy), i)
    )
    return tuple(ordered[:k])


class NearestFirst(Policy):
    """Assign every task to its closest workers, busy or not."""

    name = "npf"

    def act(self, obs: Observation, sim=None) -> Action:
        cols = obs.participants
        taken = set()
        pairs = []
        for task in obs.tasks:
            candidates = [i for i in cols.ids if i not in taken]
            ox, oy = task.origin
            chosen = _nearest(candidates, cols, ox, oy, task.required_participants)
            if chosen is None:
                continue
            taken.update(chosen)
            pairs.append((task.id, chosen))
        return Action(tuple(pairs))


class NearestAvailableFirst(Policy):
    """Assign every task to its closest idle workers; skip when too few."""

    name = "napf"

    def act(self, obs: Observation, sim=None) -> Action:
        cols = obs.participants
        avail = cols.available
        taken = set()
        pairs = []
        for task in obs.tasks:
            candidates = [i for i in cols.ids if avail[i] and i not in taken]
            ox, oy = task.origin
            chosen = _nearest(candidates, cols, ox, oy, task.required_participants)
            if chosen is None:
                continue
            taken.update(chosen)
            pairs.append((task.id, chosen))
        return Action(tuple(pairs))


class WorkloadFirst(Policy):
    """Balance lifetime assignment counts among idle workers near each task.

    Only available workers within ``radius`` of the origin are considered;
    among them the fewest-assignments worker wins, closer then lower id on
    ties. A task with no such worker stays pending.
    """

    name = "wpf"

    def __init__(self, radius: float):
        if radius < 0:
            raise InvalidConfigError("radius must be non-negative")
        self.radius = radius

    @classmethod
    def for_config(cls, config: SimConfig) -> "WorkloadFirst":
        return cls((config.grid_width + config.grid_height) / 4.0)

    def act(self, obs: Observation, sim=None) -> Action:
        cols = obs.participants
        loads = cols.cum_assignments
        avail = cols.available
        taken = set()
        pairs = []
        for task in obs.tasks:
            ox, oy = task.origin
            k = task.required_participants
            scored = []
            for i in cols.ids:
                if not avail[i] or i in taken:
                    continue
                d = abs(cols.x[i] - ox) + abs(cols.y[i] - oy)
                if d <= self.radius:
                    scored.append((loads[i], d, i))
            if len(scored) < k:
                continue
            scored.sort()
            chosen = tuple(entry[2] for entry in scored[:k])
            taken.update(chosen)
            pairs.append((task.id, chosen))
        return Action(tuple(pairs))


class RandomPolicy(Policy):
    """Uniform choice per task over every untaken worker plus leaving it."""

    name = "random"

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)

    def begin_episode(self, seed: int) -> None:
        self._rng.seed(seed)

    def act(self, obs: Observation, sim=None) -> Action:
        tasks = obs.tasks
        if not tasks:
            return _EMPTY_ACTION
        rand = self._rng.random
        candidates = list(obs.participants.ids)
        pairs = []
        for task in tasks:
            k = task[7]
            n = len(candidates)
            if n < k:
                continue
            pick = int(rand() * (n + 1))
            if pick == n:
                continue
            if k == 1:
                chosen = (candidates[pick],)
                candidates[pick] = candidates[n - 1]
                candidates.pop()
            else:
                first = candidates[pick]
                candidates[pick] = candidates[n - 1]
                candidates.pop()
                rest = self._rng.sample(candidates, k - 1)
                for pid in rest:
                    candidates.remove(pid)
                chosen = (first, *rest)
            pairs.append((task[0], chosen))
        return Action(tuple(pairs))


# -- exhaustive search ------------------------------------------------------


def search_bound(config: SimConfig) -> int:
    """A-priori upper bound on action sequences for one episode."""
    per_interval = (config.num_participants + 1) ** config.max_tasks_per_interval
    return per_interval ** config.intervals_per_episode


def enumerate_actions(
    task_ids: Iterable[int], participant_ids: Iterable[int]
) -> Iterator[Action]:
    """Every legal one-worker-per-task action for one interval.

    Order is lexicographic: tasks ascending, and per task each participant
    ascending before the leave-unserved branch.
    """
    tasks = sorted(task_ids)
    parts = sorted(participant_ids)

    def rec(idx: int, used: set) -> Iterator[tuple]:
        if idx == len(tasks):
            yield ()
            return
        tid = tasks[idx]
        for pid in parts:
            if pid in used:
                continue
            used.add(pid)
            for tail in rec(idx + 1, used):
                yield ((tid, (pid,)),) + tail
            used.discard(pid)
        yield from rec(idx + 1, used)

    for combo in rec(0, set()):
        yield Action(combo)


def _best_plan(sim) -> Tuple[float, List[Action]]:
    if sim.done:
        return 0.0, []
    pending = sim.pending_tasks
    if any(t.required_participants != 1 for t in pending):
        raise InvalidConfigError("exact search handles single-worker tasks only")
    best_value: Optional[float] = None
    best_seq: List[Action] = []
    ids = range(sim.config.num_participants)
    for action in enumerate_actions((t.id for t in pending), ids):
        child = sim.clone()
        transition = child.step(action)
        tail_value, tail_seq = _best_plan(child)
        total = transition.reward + tail_value
        if best_value is None or total > best_value:
            best_value = total
            best_seq = [action] + tail_seq
    return best_value, best_seq


def solve(sim) -> Tuple[float, List[Action]]:
    """Best remaining action sequence by exhaustive simulation.

    Returns the realized return of the best sequence from the simulator's
    current state, and the sequence itself (first maximizer in enumeration
    order). Refuses instances whose a-priori bound exceeds the search
    limit.
    """
    bound = search_bound(sim.config)
    if bound > ORACLE_SEARCH_LIMIT:
        raise SearchTooLargeError(bound, ORACLE_SEARCH_LIMIT)
    return _best_plan(sim)


class OraclePolicy(Policy):
    """Plays the exhaustive-search plan computed at its first turn."""

    name = "oracle"

    def __init__(self):
        self._plan: Optional[List[Action]] = None
        self._start = 0
        self.planned_value: Optional[float] = None

    def begin_episode(self, seed: int) -> None:
        self._plan = None
        self.planned_value = None

    def act(self, obs: Observation, sim=None) -> Action:
        if sim is None:
            raise InvalidConfigError("oracle policy needs the simulator")
        if self._plan is None:
            self.planned_value, self._plan = solve(sim)
            self._start = obs.interval
        index = obs.interval - self._start
        if index >= len(self._plan):
            return Action.empty()
        return self._plan[index]


POLICY_NAMES = ("npf", "napf", "wpf", "random", "oracle")


def make_policy(name: str, config: SimConfig, seed: int = 0) -> Policy:
    if name == "npf":
        return NearestFirst()
    if name == "napf":
        return NearestAvailableFirst()
    if name == "wpf":
        return WorkloadFirst.for_config(config)
    if name == "random":
        return RandomPolicy(seed)
    if name == "oracle":
        return OraclePolicy()
    raise InvalidConfigError(f"unknown policy {name!r}; choose from {POLICY_NAMES}")
