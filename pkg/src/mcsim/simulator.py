"""Interval-stepped participant-selection environment.

One `step(action)` advances a full decision interval:

1. commit the action's assignments (validated atomically first),
2. move every busy participant along its deterministic x-then-y path,
   completing pickups and drop-offs it reaches,
3. cancel, then expire, pending never-assigned tasks,
4. generate the next interval's task arrivals,
5. score the interval (five-objective reward),
6. advance the clock and snapshot the observation.

Determinism: a (config, seed) pair fixes the whole episode. Three
independent child streams (grid, task generation, cancellation) are
derived from the seed so consuming one never shifts another.

Movement: a participant's speed is evaluated once per interval in its
starting cell; unspent fractional budget carries to the next interval
while busy and is dropped when the queue drains. Waypoints that need no
movement (already standing on them) resolve even with zero budget.
"""
from __future__ import annotations

import math
import random
from functools import partial
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .domain import (
    Action,
    EpisodeDoneError,
    GridMap,
    InvalidAssignmentError,
    InvalidConfigError,
    Observation,
    PARTICIPANT_FEATURE_WIDTH,
    Participant,
    ParticipantColumns,
    RewardBreakdown,
    SimConfig,
    TASK_FEATURE_WIDTH,
    Task,
    TaskStatus,
    Transition,
    stream_seeds,
    validate_action,
)
from .generation import (
    TripPool,
    build_grid,
    build_source,
    ingest_trip_records,
    initial_positions,
    load_participant_points,
)
from .reward import RewardScales, resolve_weights, stddev_from_moments

EV_GENERATE = "generate"
EV_ASSIGN = "assign"
EV_PICKUP = "pickup"
EV_COMPLETE = "complete"
EV_CANCEL = "cancel"
EV_EXPIRE = "expire"

_IDLE = 0
_APPROACH = 1
_TRIP = 2


class Event(NamedTuple):
    """One episode-log entry; ``value`` is kind-specific.

    assign: value = that participant's assignment distance.
    complete: value = the task's time cost, participant is the last finisher.
    generate: interval is the arrival interval.
    """

    kind: str
    interval: int
    task_id: int
    participant_id: Optional[int] = None
    value: float = 0.0


def _build_matrices(
    tasks: Tuple[Task, ...],
    cols: ParticipantColumns,
    interval: int,
    horizon: int,
    base: Tuple[Tuple[float, ...], ...],
    wf: float,
    speed_norm: float,
    fare_scale: float,
    busy_scale: float,
    cap: int,
):
    task_f = np.zeros((cap, TASK_FEATURE_WIDTH), dtype=np.float32)
    task_m = np.zeros(cap, dtype=np.float32)
    for r, t in enumerate(tasks):
        ox, oy = t.origin
        dx, dy = t.destination
        task_f[r, 0] = ox
        task_f[r, 1] = oy
        task_f[r, 2] = dx
        task_f[r, 3] = dy
        task_f[r, 4] = (interval - t.arrival_interval) / horizon
        task_f[r, 5] = t.fare / fare_scale
        task_f[r, 6] = t.time_limit / horizon
        task_f[r, 7] = t.required_participants
        task_f[r, 8] = base[ox][oy] * wf / speed_norm
        task_m[r] = 1.0
    n = len(cols.ids)
    part_f = np.zeros((n, PARTICIPANT_FEATURE_WIDTH), dtype=np.float32)
    part_m = np.ones(n, dtype=np.float32)
    for i in range(n):
        x = cols.x[i]
        y = cols.y[i]
        part_f[i, 0] = x
        part_f[i, 1] = y
        part_f[i, 2] = cols.available[i]
        part_f[i, 3] = cols.queue_len[i] / horizon
        part_f[i, 4] = cols.busy_remaining[i] / horizon
        part_f[i, 5] = cols.cum_tasks[i] / horizon
        part_f[i, 6] = cols.cum_incentive[i] / busy_scale
        part_f[i, 7] = base[x][y] * wf / speed_norm
    return task_f, task_m, part_f, part_m


class Simulator:
    """The environment. Use ``reset()`` then ``step(action)`` until done.

    ``scripted_schedule`` (interval -> Task prototypes) and explicit
    ``start_positions`` exist for reproducible fixtures; normal runs leave
    both None.
    """

    def __init__(
        self,
        config: SimConfig,
        scripted_schedule: Optional[dict] = None,
        start_positions: Optional[List] = None,
        participant_points_path: Optional[str] = None,
    ):
        config.validate()
        if scripted_schedule:
            for interval, protos in scripted_schedule.items():
                if len(protos) > config.max_tasks_per_interval:
                    raise InvalidConfigError(
                        f"scripted interval {interval} exceeds max_tasks_per_interval"
                    )
        if start_positions is not None and len(start_positions) != config.num_participants:
            raise InvalidConfigError("start_positions length must equal num_participants")
        self.config = config
        self._schedule = scripted_schedule
        self._fixed_positions = (
            [tuple(pos) for pos in start_positions] if start_positions is not None else None
        )
        self._points_path = participant_points_path
        self._scales = RewardScales.from_config(config)
        self._weights = resolve_weights(config)
        self._weights.validate()
        self._w = self._weights.as_tuple()
        self._horizon = config.intervals_per_episode
        self._cap = config.intervals_per_episode * config.max_tasks_per_interval
        self._p = config.num_participants
        self._ids = tuple(range(self._p))
        self._roster = frozenset(self._ids)
        self._period = config.weather_period
        amp = config.weather_amplitude
        self._wf_table = [
            1.0 + amp * math.sin(2.0 * math.pi * k / self._period)
            for k in range(self._period)
        ]
        self.grid: Optional[GridMap] = None
        self._started = False
        self._trip_pool: Optional[TripPool] = None
        self.trip_report = None
        # Seeding Mersenne state is costly; reuse the instances across resets.
        self._grid_rng = random.Random()
        self._gen_rng = random.Random()
        self._cancel_rng = random.Random()

    # -- episode setup ----------------------------------------------------

    def reset(self, seed: Optional[int] = None) -> Observation:
        cfg = self.config
        base_seed = cfg.seed if seed is None else seed
        self._seed = base_seed
        grid_seed, gen_seed, cancel_seed = stream_seeds(base_seed)
        self._grid_rng.seed(grid_seed)
        self._gen_rng.seed(gen_seed)
        self._cancel_rng.seed(cancel_seed)

        self.grid = build_grid(cfg, self._grid_rng)
        grid = self.grid
        self._base = grid.base_speed
        self._mean_speed = grid.mean_speed
        self._inv_mean_speed = 1.0 / self._mean_speed
        self._speed_norm = grid.speed_ceiling
        trips = None
        if cfg.data_source == "trip_records":
            trips = self._trip_pool
            if trips is None:
                if cfg.bbox is None:
                    raise InvalidConfigError("trip_records data source needs a bbox")
                trips, self.trip_report = ingest_trip_records(
                    cfg.trip_records_path, cfg.bbox, grid.width, grid.height
                )
                self._trip_pool = trips
        self._source = build_source(cfg, grid, self._gen_rng, self._schedule, trips)

        if self._fixed_positions is not None:
            positions = list(self._fixed_positions)
        elif self._points_path is not None:
            if cfg.bbox is None:
                raise InvalidConfigError("participant points need a bbox")
            points = load_participant_points(
                self._points_path, cfg.bbox, grid.width, grid.height
            )
            positions = initial_positions(cfg, self._grid_rng, points)
        elif trips is not None:
            # Record-backed worlds start workers where demand starts.
            positions = initial_positions(cfg, self._grid_rng, trips.pickups)
        else:
            positions = initial_positions(cfg, self._grid_rng)
        for x, y in positions:
            if not grid.contains(x, y):
                raise InvalidConfigError(f"start position ({x}, {y}) off the grid")

        p = self._p
        self._px = [pos[0] for pos in positions]
        self._py = [pos[1] for pos in positions]
        self._pqueue: List[List[int]] = [[] for _ in range(p)]
        self._pphase = [_IDLE] * p
        self._ptx = list(self._px)
        self._pty = list(self._py)
        self._pcarry = [0.0] * p
        self._premaining = [0] * p
        self._ptailx = list(self._px)
        self._ptaily = list(self._py)
        self._pavail = [1] * p
        self._pqlen = [0] * p
        self._pcum_tasks = [0] * p
        self._pcum_inc = [0.0] * p
        self._passign = [0.0] * p
        self._pcum_assignments = [0] * p
        self._pdist = [0] * p
        self._pserv = [0] * p
        self._pacc = [0.0] * p

        self._tasks: Dict[int, Task] = {}
        self._status: Dict[int, TaskStatus] = {}
        self._pending: Dict[int, Task] = {}
        self._unfinished: Dict[int, int] = {}
        self._task_energy: Dict[int, float] = {}
        self._next_tid = 0
        self._next_rid = 0

        self._fair_s1 = 0.0
        self._fair_s2 = 0.0
        self._ct_n = 0
        self._ct_s1 = 0.0
        self._ct_s2 = 0.0
        self._dispersion = 0.0

        self._h = 0
        self._done = False
        self._rec = cfg.record_events
        self._events: List[tuple] = []
        self._n_generated = 0
        self._n_assigned = 0
        self._n_completed = 0
        self._n_cancelled = 0
        self._n_expired = 0
        self._return = 0.0
        self._component_sums = [0.0] * 5
        self._started = True

        self._admit(self._source.generate(0, self._next_tid, self._next_rid), 0)
        self._last_obs = self._make_observation()
        return self._last_obs

    def _admit(self, batch: List[Task], arrival: int) -> int:
        tasks = self._tasks
        status = self._status
        pending = self._pending
        rec = self._rec
        events = self._events
        pending_status = TaskStatus.PENDING
        for t in batch:
            tid = t[0]
            tasks[tid] = t
            status[tid] = pending_status
            pending[tid] = t
            if rec:
                events.append((EV_GENERATE, arrival, tid, None, 0.0))
        n = len(batch)
        self._next_tid += n
        self._next_rid += n
        self._n_generated += n
        return n

    # -- stepping ----------------------------------------------------------

    def step(self, action: Action) -> Transition:
        if not self._started:
            raise EpisodeDoneError("call reset() before step()")
        if self._done:
            raise EpisodeDoneError("episode is over; call reset()")
        pending = self._pending
        assignments = action.assignments

        # Inline fast-path validation; on any failure the public checker
        # reproduces the canonical first violation. State is untouched here.
        if assignments:
            roster = self._roster
            seen_t = set()
            seen_p = set()
            ok = True
            for tid, pids in assignments:
                task = pending.get(tid)
                if task is None or tid in seen_t or len(pids) != task[7]:
                    ok = False
                    break
                seen_t.add(tid)
                for pid in pids:
                    if pid in seen_p or pid not in roster:
                        ok = False
                        break
                    seen_p.add(pid)
                if not ok:
                    break
            if not ok:
                violation = validate_action(action, pending.values(), self._roster)
                raise InvalidAssignmentError(violation)

        h = self._h
        cfg = self.config
        rec = self._rec
        events = self._events
        status = self._status
        tasks = self._tasks
        unfinished = self._unfinished
        px = self._px
        py = self._py
        ptx = self._ptx
        pty = self._pty
        ptailx = self._ptailx
        ptaily = self._ptaily
        pqueue = self._pqueue
        pphase = self._pphase
        passign = self._passign
        pqlen = self._pqlen
        pavail = self._pavail
        premaining = self._premaining
        pcum_assignments = self._pcum_assignments

        # 1. commit assignments
        sum_assign = 0.0
        fair_s1 = self._fair_s1
        fair_s2 = self._fair_s2
        assigned_status = TaskStatus.ASSIGNED
        for tid, pids in assignments:
            task = pending.pop(tid)
            status[tid] = assigned_status
            unfinished[tid] = len(pids)
            ox, oy = task[2]
            dx, dy = task[3]
            trip = abs(ox - dx) + abs(oy - dy)
            for pid in pids:
                d = abs(px[pid] - ox) + abs(py[pid] - oy)
                sum_assign += d
                old = passign[pid]
                new = old + d
                passign[pid] = new
                fair_s1 += d
                fair_s2 += new * new - old * old
                pcum_assignments[pid] += 1
                q = pqueue[pid]
                if not q:
                    pphase[pid] = _APPROACH
                    ptx[pid] = ox
                    pty[pid] = oy
                    pavail[pid] = 0
                q.append(tid)
                pqlen[pid] += 1
                premaining[pid] += abs(ptailx[pid] - ox) + abs(ptaily[pid] - oy) + trip
                ptailx[pid] = dx
                ptaily[pid] = dy
                if rec:
                    events.append((EV_ASSIGN, h, tid, pid, float(d)))
        self._fair_s1 = fair_s1
        self._fair_s2 = fair_s2
        self._n_assigned += len(assignments)

        # 2. movement: jump whole-cell spans along each x-then-y leg
        sum_trip = 0
        sum_cost = 0
        n_completed = 0
        ct_n = self._ct_n
        ct_s1 = self._ct_s1
        ct_s2 = self._ct_s2
        energy = 0.0
        moved_total = 0
        e0 = cfg.energy_e0
        e1 = cfg.energy_e1
        wf = self._wf_table[h % self._period]
        base = self._base
        pcarry = self._pcarry
        pserv = self._pserv
        pcum_tasks = self._pcum_tasks
        pcum_inc = self._pcum_inc
        pdist = self._pdist
        pacc = self._pacc
        task_energy = self._task_energy
        in_service = TaskStatus.IN_SERVICE
        completed_status = TaskStatus.COMPLETED
        for i in range(self._p):
            q = pqueue[i]
            if not q:
                continue
            pserv[i] += 1
            x = px[i]
            y = py[i]
            v = base[x][y] * wf
            rate = e0 + e1 * v * v
            budget = pcarry[i] + v
            whole = int(budget)
            tx = ptx[i]
            ty = pty[i]
            moved = 0
            flushed = 0
            acc = pacc[i]
            while True:
                if x == tx and y == ty:
                    tid = q[0]
                    task = tasks[tid]
                    if pphase[i] == _APPROACH:
                        if status[tid] is assigned_status:
                            status[tid] = in_service
                        if rec:
                            events.append((EV_PICKUP, h, tid, i, 0.0))
                        pphase[i] = _TRIP
                        tx, ty = task[3]
                    else:
                        del q[0]
                        pqlen[i] -= 1
                        pcum_tasks[i] += 1
                        pcum_inc[i] += task[5]
                        # Energy spent on this leg settles only when the
                        # whole task completes.
                        acc += (moved - flushed) * rate
                        flushed = moved
                        left = unfinished[tid] - 1
                        if left == 0:
                            status[tid] = completed_status
                            cost = h - task[4]
                            ox, oy = task[2]
                            dx, dy = task[3]
                            sum_trip += abs(ox - dx) + abs(oy - dy)
                            sum_cost += cost
                            n_completed += 1
                            ct_n += 1
                            ct_s1 += cost
                            ct_s2 += cost * cost
                            del unfinished[tid]
                            energy += task_energy.pop(tid, 0.0) + acc
                            if rec:
                                events.append((EV_COMPLETE, h, tid, i, float(cost)))
                        else:
                            unfinished[tid] = left
                            task_energy[tid] = task_energy.get(tid, 0.0) + acc
                        acc = 0.0
                        if q:
                            pphase[i] = _APPROACH
                            tx, ty = tasks[q[0]][2]
                        else:
                            pphase[i] = _IDLE
                            pavail[i] = 1
                            break
                    continue
                if not whole:
                    break
                if x != tx:
                    leg = tx - x
                    if leg > 0:
                        m = leg if leg < whole else whole
                        x += m
                    else:
                        leg = -leg
                        m = leg if leg < whole else whole
                        x -= m
                else:
                    leg = ty - y
                    if leg > 0:
                        m = leg if leg < whole else whole
                        y += m
                    else:
                        leg = -leg
                        m = leg if leg < whole else whole
                        y -= m
                whole -= m
                moved += m
            px[i] = x
            py[i] = y
            ptx[i] = tx
            pty[i] = ty
            pcarry[i] = budget - moved if q else 0.0
            pacc[i] = acc + (moved - flushed) * rate
            if moved:
                premaining[i] -= moved
                pdist[i] += moved
                moved_total += moved
        self._n_completed += n_completed
        self._ct_n = ct_n
        self._ct_s1 = ct_s1
        self._ct_s2 = ct_s2

        # 3. cancellation, then deadline expiry, for still-pending tasks
        n_cancelled = 0
        n_expired = 0
        if pending:
            cp = cfg.cancel_prob
            deadline_h = h + 1
            cancelled_status = TaskStatus.CANCELLED
            expired_status = TaskStatus.EXPIRED
            drops = None
            if cp > 0.0:
                crng = self._cancel_rng.random
                for tid, task in pending.items():
                    if crng() < cp:
                        if drops is None:
                            drops = [(tid, cancelled_status)]
                        else:
                            drops.append((tid, cancelled_status))
                    elif deadline_h - task[4] > task[6]:
                        if drops is None:
                            drops = [(tid, expired_status)]
                        else:
                            drops.append((tid, expired_status))
            else:
                for tid, task in pending.items():
                    if deadline_h - task[4] > task[6]:
                        if drops is None:
                            drops = [(tid, expired_status)]
                        else:
                            drops.append((tid, expired_status))
            if drops is not None:
                for tid, st in drops:
                    del pending[tid]
                    status[tid] = st
                    if st is cancelled_status:
                        n_cancelled += 1
                        if rec:
                            events.append((EV_CANCEL, h, tid, None, 0.0))
                    else:
                        n_expired += 1
                        if rec:
                            events.append((EV_EXPIRE, h, tid, None, 0.0))
                self._n_cancelled += n_cancelled
                self._n_expired += n_expired

        # 4. next interval's arrivals
        generated = 0
        if h + 1 < self._horizon:
            generated = self._admit(
                self._source.generate(h + 1, self._next_tid, self._next_rid), h + 1
            )

        # 5. score
        d_before = self._dispersion
        d_after = stddev_from_moments(
            self._p, fair_s1, fair_s2
        ) + stddev_from_moments(ct_n, ct_s1, ct_s2)
        self._dispersion = d_after
        scales = self._scales
        o_assign = -sum_assign / scales.dist_scale
        o_trip = sum_trip / scales.dist_scale
        o_time = -sum_cost / scales.time_scale
        o_fair = (d_before - d_after) / scales.fairness_scale
        o_energy = -energy / scales.energy_scale
        w = self._w
        total = (
            w[0] * o_assign
            + w[1] * o_trip
            + w[2] * o_time
            + w[3] * o_fair
            + w[4] * o_energy
        )
        breakdown = tuple.__new__(
            RewardBreakdown, (o_assign, o_trip, o_time, o_fair, o_energy, total)
        )
        self._return += total
        sums = self._component_sums
        sums[0] += o_assign
        sums[1] += o_trip
        sums[2] += o_time
        sums[3] += o_fair
        sums[4] += o_energy

        # 6. advance
        self._h = h + 1
        self._done = done = self._h >= self._horizon
        obs = self._make_observation()
        self._last_obs = obs
        info = {
            "interval": h,
            "assigned": len(assignments),
            "completed": n_completed,
            "cancelled": n_cancelled,
            "expired": n_expired,
            "generated": generated,
            "moved_cells": moved_total,
            "energy": energy,
        }
        return tuple.__new__(Transition, (obs, total, breakdown, done, info))

    # -- views -------------------------------------------------------------

    def _make_observation(self) -> Observation:
        h = self._h
        inv_mean = self._inv_mean_speed
        ceil = math.ceil
        brem = [0] * self._p
        for i, rem in enumerate(self._premaining):
            if rem > 0:
                brem[i] = ceil(rem * inv_mean)
        cols = ParticipantColumns(
            self._ids,
            tuple(self._px),
            tuple(self._py),
            tuple(self._pavail),
            tuple(self._pqlen),
            tuple(brem),
            tuple(self._pcum_tasks),
            tuple(self._pcum_inc),
            tuple(self._pcum_assignments),
        )
        tasks = tuple(self._pending.values())
        builder = partial(
            _build_matrices,
            tasks,
            cols,
            h,
            self._horizon,
            self._base,
            self._wf_table[h % self._period],
            self._speed_norm,
            self._scales.fare_scale,
            self._scales.fare_scale * self._horizon,
            self._cap,
        )
        return Observation(h, tasks, cols, builder)

    def observation(self) -> Observation:
        return self._last_obs

    @property
    def interval(self) -> int:
        return self._h

    @property
    def done(self) -> bool:
        return self._done

    @property
    def episode_return(self) -> float:
        return self._return

    @property
    def component_totals(self) -> Tuple[float, float, float, float, float]:
        return tuple(self._component_sums)

    @property
    def dispersion(self) -> float:
        return self._dispersion

    @property
    def events(self) -> Tuple[Event, ...]:
        return tuple(Event(*entry) for entry in self._events)

    def event_log(self) -> List[str]:
        """Replayable episode log, one comma-separated line per event:
        ``interval,event_type,task_id,participant_id,cell_x,cell_y``.

        The cell is where the event lands (the task origin, except
        completions, which land at the destination); the participant field
        is empty for task-only events.
        """
        lines = []
        tasks = self._tasks
        for kind, interval, tid, pid, _value in self._events:
            task = tasks[tid]
            cx, cy = task[3] if kind == EV_COMPLETE else task[2]
            who = "" if pid is None else pid
            lines.append(f"{interval},{kind},{tid},{who},{cx},{cy}")
        return lines

    @property
    def pending_tasks(self) -> Tuple[Task, ...]:
        return tuple(self._pending.values())

    def task(self, task_id: int) -> Task:
        return self._tasks[task_id]._replace(status=self._status[task_id])

    def task_status(self, task_id: int) -> TaskStatus:
        return self._status[task_id]

    def participant(self, pid: int) -> Participant:
        queue = tuple(self._pqueue[pid])
        busy = None
        if queue:
            busy = self._h + max(1, math.ceil(self._premaining[pid] * self._inv_mean_speed))
        return Participant(
            id=pid,
            position=(self._px[pid], self._py[pid]),
            queue=queue,
            busy_until=busy,
            cum_tasks_completed=self._pcum_tasks[pid],
            cum_incentive=self._pcum_inc[pid],
            cum_distance=self._pdist[pid],
            cum_service_time=self._pserv[pid],
            cum_assignments=self._pcum_assignments[pid],
        )

    def participants(self) -> Tuple[Participant, ...]:
        return tuple(self.participant(i) for i in range(self._p))

    def counts(self) -> Dict[str, int]:
        """Lifecycle totals; generated always equals the other five summed."""
        return {
            "generated": self._n_generated,
            "assigned": self._n_assigned,
            "completed": self._n_completed,
            "cancelled": self._n_cancelled,
            "expired": self._n_expired,
            "pending": len(self._pending),
            "in_flight": len(self._unfinished),
        }

    def episode_summary(self) -> Dict[str, float]:
        summary: Dict[str, float] = {
            "return": self._return,
            "o_assign_dist": self._component_sums[0],
            "o_trip_dist": self._component_sums[1],
            "o_time": self._component_sums[2],
            "o_fairness": self._component_sums[3],
            "o_energy": self._component_sums[4],
            "dispersion": self._dispersion,
        }
        summary.update({k: float(v) for k, v in self.counts().items()})
        return summary

    # -- search support ------------------------------------------------------

    def clone(self) -> "Simulator":
        """Deep-enough copy: stepping the clone never touches the original.

        Random streams are duplicated at their current state, so a clone
        replays exactly the arrivals and cancellations the original would
        see.
        """
        if not self._started:
            raise EpisodeDoneError("cannot clone before reset()")
        other = object.__new__(Simulator)
        other.config = self.config
        other._schedule = self._schedule
        other._fixed_positions = self._fixed_positions
        other._points_path = self._points_path
        other._trip_pool = self._trip_pool
        other.trip_report = self.trip_report
        other._scales = self._scales
        other._weights = self._weights
        other._w = self._w
        other._horizon = self._horizon
        other._cap = self._cap
        other._p = self._p
        other._ids = self._ids
        other._roster = self._roster
        other._started = True
        other._seed = self._seed
        other.grid = self.grid
        other._base = self._base
        other._mean_speed = self._mean_speed
        other._inv_mean_speed = self._inv_mean_speed
        other._speed_norm = self._speed_norm
        other._period = self._period
        other._wf_table = self._wf_table

        other._grid_rng = random.Random()
        other._grid_rng.setstate(self._grid_rng.getstate())
        other._gen_rng = random.Random()
        other._gen_rng.setstate(self._gen_rng.getstate())
        other._cancel_rng = random.Random()
        other._cancel_rng.setstate(self._cancel_rng.getstate())
        other._source = self._source.clone(other._gen_rng)

        other._px = list(self._px)
        other._py = list(self._py)
        other._pqueue = [list(q) for q in self._pqueue]
        other._pphase = list(self._pphase)
        other._ptx = list(self._ptx)
        other._pty = list(self._pty)
        other._pcarry = list(self._pcarry)
        other._premaining = list(self._premaining)
        other._ptailx = list(self._ptailx)
        other._ptaily = list(self._ptaily)
        other._pavail = list(self._pavail)
        other._pqlen = list(self._pqlen)
        other._pcum_tasks = list(self._pcum_tasks)
        other._pcum_inc = list(self._pcum_inc)
        other._passign = list(self._passign)
        other._pcum_assignments = list(self._pcum_assignments)
        other._pdist = list(self._pdist)
        other._pserv = list(self._pserv)
        other._pacc = list(self._pacc)

        other._tasks = dict(self._tasks)
        other._status = dict(self._status)
        other._pending = dict(self._pending)
        other._unfinished = dict(self._unfinished)
        other._task_energy = dict(self._task_energy)
        other._next_tid = self._next_tid
        other._next_rid = self._next_rid

        other._fair_s1 = self._fair_s1
        other._fair_s2 = self._fair_s2
        other._ct_n = self._ct_n
        other._ct_s1 = self._ct_s1
        other._ct_s2 = self._ct_s2
        other._dispersion = self._dispersion

        other._h = self._h
        other._done = self._done
        other._rec = self._rec
        other._events = list(self._events)
        other._n_generated = self._n_generated
        other._n_assigned = self._n_assigned
        other._n_completed = self._n_completed
        other._n_cancelled = self._n_cancelled
        other._n_expired = self._n_expired
        other._return = self._return
        other._component_sums = list(self._component_sums)
        other._last_obs = self._last_obs
        return other
