"""Line-delimited JSON protocol for driving episodes from another process.

Every request line gets exactly one reply line. Canonical encoding (sorted
keys, no whitespace) makes replies byte-reproducible for identical
episodes.

    -> {"type": "reset", "seed": 7, "config": {...overrides...}}
    <- {"type": "observation", ...}
    -> {"type": "act", "assignments": [[task_id, [participant_id, ...]], ...]}
    <- {"type": "transition", "reward": ..., "observation": {...}, ...}
    -> {"type": "close"}
    <- {"type": "close"}

Malformed or out-of-order input yields {"type": "error", "code", "detail"}
and leaves session state untouched; the peer may simply continue.
"""
from __future__ import annotations

import json
import socket
import socketserver
from typing import IO, Optional

from .baselines import Policy
from .configfile import merge_config
from .domain import (
    Action,
    InvalidConfigError,
    McsError,
    Observation,
    ProtocolError,
    SimConfig,
    Task,
    Transition,
)
from .simulator import Simulator

PROTOCOL_VERSION = 1


def encode_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _task_payload(task: Task, interval: int) -> dict:
    return {
        "id": task.id,
        "origin": [task.origin[0], task.origin[1]],
        "destination": [task.destination[0], task.destination[1]],
        "arrival_interval": task.arrival_interval,
        "age": interval - task.arrival_interval,
        "fare": task.fare,
        "time_limit": task.time_limit,
        "required_participants": task.required_participants,
    }


def observation_payload(obs: Observation, done: bool) -> dict:
    cols = obs.participants
    participants = [
        {
            "id": cols.ids[i],
            "position": [cols.x[i], cols.y[i]],
            "available": cols.available[i],
            "queue_len": cols.queue_len[i],
            "busy_remaining": cols.busy_remaining[i],
            "cum_tasks": cols.cum_tasks[i],
            "cum_incentive": cols.cum_incentive[i],
            "cum_assignments": cols.cum_assignments[i],
        }
        for i in range(len(cols.ids))
    ]
    return {
        "type": "observation",
        "interval": obs.interval,
        "done": done,
        "tasks": [_task_payload(t, obs.interval) for t in obs.tasks],
        "participants": participants,
        "task_features": obs.task_features.tolist(),
        "task_mask": obs.task_mask.tolist(),
        "participant_features": obs.participant_features.tolist(),
        "participant_mask": obs.participant_mask.tolist(),
    }


def transition_payload(transition: Transition) -> dict:
    b = transition.breakdown
    return {
        "type": "transition",
        "reward": transition.reward,
        "breakdown": {
            "o_assign_dist": b.o_assign_dist,
            "o_trip_dist": b.o_trip_dist,
            "o_time": b.o_time,
            "o_fairness": b.o_fairness,
            "o_energy": b.o_energy,
            "total": b.total,
        },
        "done": transition.done,
        "info": transition.info,
        "observation": observation_payload(transition.observation, transition.done),
    }


def error_payload(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}


def action_from_payload(msg: dict) -> Action:
    raw = msg.get("assignments", [])
    if not isinstance(raw, list):
        raise ProtocolError("assignments must be a list of [task, [participants]] pairs")
    pairs = []
    for entry in raw:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not isinstance(entry[0], int)
            or isinstance(entry[0], bool)
            or not isinstance(entry[1], list)
        ):
            raise ProtocolError("each assignment must be [task_id, [participant ids]]")
        tid, pids = entry
        if any(not isinstance(p, int) or isinstance(p, bool) for p in pids):
            raise ProtocolError("participant ids must be integers")
        pairs.append((tid, tuple(pids)))
    return Action(tuple(pairs))


class Session:
    """One request/reply state machine over a base configuration."""

    def __init__(self, base_config: Optional[SimConfig] = None):
        self._base = base_config if base_config is not None else SimConfig()
        self._sim: Optional[Simulator] = None
        self.closed = False

    def handle_line(self, line: str) -> str:
        return encode_line(self._handle(line))

    def _handle(self, line: str) -> dict:
        try:
            msg = json.loads(line)
        except ValueError:
            return error_payload("PROTOCOL", "not valid JSON")
        if not isinstance(msg, dict):
            return error_payload("PROTOCOL", "message must be a JSON object")
        kind = msg.get("type")
        if kind == "reset":
            return self._on_reset(msg)
        if kind == "act":
            return self._on_act(msg)
        if kind == "close":
            self.closed = True
            return {"type": "close"}
        return error_payload("PROTOCOL", f"unknown message type: {kind!r}")

    def _on_reset(self, msg: dict) -> dict:
        overrides = msg.get("config")
        if overrides is not None and not isinstance(overrides, dict):
            return error_payload("PROTOCOL", "config must be an object")
        seed = msg.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            return error_payload("PROTOCOL", "seed must be an integer")
        try:
            config = merge_config(self._base, overrides)
            sim = Simulator(config)
            obs = sim.reset(seed)
        except McsError as err:
            return error_payload(err.code, err.detail)
        self._sim = sim
        return observation_payload(obs, sim.done)

    def _on_act(self, msg: dict) -> dict:
        sim = self._sim
        if sim is None:
            return error_payload("PROTOCOL", "act before reset")
        try:
            action = action_from_payload(msg)
            transition = sim.step(action)
        except McsError as err:
            return error_payload(err.code, err.detail)
        return transition_payload(transition)


def serve_stdio(
    base_config: Optional[SimConfig] = None,
    stdin: Optional[IO[str]] = None,
    stdout: Optional[IO[str]] = None,
) -> None:
    """One session over text streams; returns at close or EOF."""
    import sys

    fin = stdin if stdin is not None else sys.stdin
    fout = stdout if stdout is not None else sys.stdout
    session = Session(base_config)
    for raw in fin:
        fout.write(session.handle_line(raw.rstrip("\n")))
        fout.write("\n")
        fout.flush()
        if session.closed:
            break


class _SessionHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = Session(self.server.base_config)
        for raw in self.rfile:
            reply = session.handle_line(raw.decode("utf-8", "replace").rstrip("\r\n"))
            self.wfile.write(reply.encode("utf-8") + b"\n")
            self.wfile.flush()
            if session.closed:
                break


class ProtocolServer(socketserver.ThreadingTCPServer):
    """One independent session per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, base_config: Optional[SimConfig] = None):
        super().__init__(address, _SessionHandler)
        self.base_config = base_config


def serve_tcp(host: str, port: int, base_config: Optional[SimConfig] = None) -> ProtocolServer:
    """Bind and return the server; caller runs serve_forever()/shutdown()."""
    return ProtocolServer((host, port), base_config)


class ExternalPolicy(Policy):
    """Remote decision maker: one observation line out, one act line back.

    The agent is any line server speaking the same message vocabulary in
    the reverse direction: for every ``observation`` message it must reply
    with exactly one ``act`` (or ``error``) message. Episode boundaries
    are visible to the agent as observations with interval 0.
    """

    name = "external"

    def __init__(self, endpoint: str):
        host, sep, port = endpoint.rpartition(":")
        if not sep or not port.isdigit():
            raise InvalidConfigError(f"endpoint must be host:port, got {endpoint!r}")
        self._addr = (host or "127.0.0.1", int(port))
        self._io: Optional[IO[str]] = None
        self._sock: Optional[socket.socket] = None

    def _ensure(self) -> IO[str]:
        if self._io is None:
            self._sock = socket.create_connection(self._addr)
            self._io = self._sock.makefile("rw", encoding="utf-8", newline="\n")
        return self._io

    def act(self, obs: Observation, sim=None) -> Action:
        io = self._ensure()
        io.write(encode_line(observation_payload(obs, False)))
        io.write("\n")
        io.flush()
        line = io.readline()
        if not line:
            raise ProtocolError("agent closed the connection")
        try:
            msg = json.loads(line)
        except ValueError:
            raise ProtocolError("agent reply is not valid JSON") from None
        if not isinstance(msg, dict):
            raise ProtocolError("agent reply must be a JSON object")
        kind = msg.get("type")
        if kind == "error":
            raise ProtocolError(f"agent error: {msg.get('code')} {msg.get('detail')}")
        if kind != "act":
            raise ProtocolError(f"expected act reply, got {kind!r}")
        return action_from_payload(msg)

    def close(self) -> None:
        if self._io is not None:
            try:
                self._io.close()
            finally:
                self._sock.close()
                self._io = None
                self._sock = None
