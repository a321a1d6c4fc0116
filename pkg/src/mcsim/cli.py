"""Command-line front end.

    mcsim run    --policy npf --settings 5,5,10 --episodes 20 --out results.csv
    mcsim serve  --stdio | --listen HOST:PORT [--config base.cfg]
    mcsim report --in results.csv [--curves curves.csv]
    mcsim oracle --settings 2,2,3 --episodes 10 --out plans.jsonl

`--settings` takes one s,t,p triple or several separated by semicolons
(`2,2,10;5,5,15`); `run` sweeps the whole list. `run --policy external
--endpoint HOST:PORT` queries a remote agent for every decision; agents
may also drive episodes themselves via `serve`.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from typing import Dict, List, Optional, Tuple

from .baselines import POLICY_NAMES, make_policy, solve
from .configfile import load_config
from .domain import InvalidConfigError, McsError, SimConfig
from .protocol import ExternalPolicy, encode_line, serve_stdio, serve_tcp
from .runner import (
    EpisodeResult,
    episode_seed,
    format_curve_summary,
    format_report,
    load_curves,
    load_results,
    run_grid,
    write_results,
)
from .simulator import Simulator


def _parse_triple(text: str) -> Tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise InvalidConfigError("settings triple wants s,t,p (three integers)")
    try:
        s, t, p = (int(v) for v in parts)
    except ValueError:
        raise InvalidConfigError("settings triple wants s,t,p (three integers)") from None
    return s, t, p


def _parse_settings(text: str) -> List[Tuple[int, int, int]]:
    chunks = [c for c in text.replace(";", " ").split() if c]
    if not chunks:
        raise InvalidConfigError("--settings wants one or more s,t,p triples")
    return [_parse_triple(c) for c in chunks]


def _build_config(args) -> SimConfig:
    config = load_config(args.config) if args.config else SimConfig()
    updates = {}
    if getattr(args, "settings", None):
        triples = _parse_settings(args.settings)
        if len(triples) != 1:
            raise InvalidConfigError("this command wants exactly one s,t,p triple")
        s, t, p = triples[0]
        updates.update(
            intervals_per_episode=s, max_tasks_per_interval=t, num_participants=p
        )
    if getattr(args, "preset", None):
        updates.update(preset=args.preset, weights=None)
    if getattr(args, "seed", None) is not None:
        updates.update(seed=args.seed)
    if updates:
        config = dataclasses.replace(config, **updates)
    config.validate()
    return config


def _mean_std(values: List[float]) -> Tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def _print_run_summary(results: List[EpisodeResult], elapsed: float) -> None:
    groups: Dict[tuple, List[EpisodeResult]] = {}
    for r in results:
        groups.setdefault((r.s, r.t, r.p, r.preset), []).append(r)
    for (s, t, p, preset), rows in sorted(groups.items()):
        returns = [r.episode_return for r in rows if not r.error]
        failed = len(rows) - len(returns)
        if returns:
            mean, std = _mean_std(returns)
            stats = f"mean_return={mean:.6f} std={std:.6f}"
        else:
            stats = "mean_return=nan std=nan"
        print(
            f"setting={s},{t},{p} preset={preset} episodes={len(rows)} "
            f"{stats} failed={failed}"
        )
    print(f"total_time_s={elapsed:.3f}")


def _cmd_run(args) -> int:
    config = load_config(args.config) if args.config else SimConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    config.validate()
    if args.settings:
        settings = _parse_settings(args.settings)
    else:
        settings = [
            (
                config.intervals_per_episode,
                config.max_tasks_per_interval,
                config.num_participants,
            )
        ]
    presets: List[Optional[str]] = [args.preset] if args.preset else [None]
    policy = None
    if args.policy == "external":
        if not args.endpoint:
            raise InvalidConfigError("--policy external needs --endpoint HOST:PORT")
        policy = ExternalPolicy(args.endpoint)
    start = time.perf_counter()
    try:
        results = run_grid(
            config, args.policy, settings, presets, args.episodes, policy=policy
        )
    finally:
        if policy is not None:
            policy.close()
    elapsed = time.perf_counter() - start
    if args.out:
        write_results(args.out, results, timings=args.timings)
    if not args.quiet:
        _print_run_summary(results, elapsed)
    return 0


def _cmd_serve(args) -> int:
    base = load_config(args.config) if args.config else None
    if args.stdio:
        serve_stdio(base)
        return 0
    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise InvalidConfigError("--listen wants HOST:PORT")
    server = serve_tcp(host, int(port_text), base)
    address = server.server_address
    print(f"listening on {address[0]}:{address[1]}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
    return 0


def _cmd_report(args) -> int:
    rows = load_results(args.results)
    print(format_report(rows))
    if args.curves:
        print(format_curve_summary(load_curves(args.curves)))
    return 0


def _cmd_oracle(args) -> int:
    config = _build_config(args)
    sim = Simulator(config)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for index in range(args.episodes):
            seed = episode_seed(config.seed, index)
            sim.reset(seed)
            value, plan = solve(sim)
            payload = {
                "episode": index,
                "seed": seed,
                "value": value,
                "plan": [
                    [[tid, list(pids)] for tid, pids in action.assignments]
                    for action in plan
                ],
            }
            print(encode_line(payload), file=out)
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcsim", description="participant-selection simulator tools"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run episodes with a built-in or external policy")
    run.add_argument("--config", help="path to a key = value config file")
    run.add_argument("--policy", default="npf", choices=POLICY_NAMES + ("external",))
    run.add_argument("--endpoint", help="agent HOST:PORT for --policy external")
    run.add_argument("--settings", help="s,t,p triples, semicolon separated")
    run.add_argument("--preset", help="reward weight preset name")
    run.add_argument("--episodes", type=int, default=10)
    run.add_argument("--seed", type=int, help="base seed overriding the config")
    run.add_argument("--out", help="write per-episode results CSV here")
    run.add_argument("--timings", action="store_true", help="add wall_time_ms to the CSV")
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=_cmd_run)

    serve = sub.add_parser("serve", help="serve episodes over the line protocol")
    serve.add_argument("--config", help="base config file for sessions")
    mode = serve.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true", help="one session on stdin/stdout")
    mode.add_argument("--listen", help="HOST:PORT for a TCP server")
    serve.set_defaults(func=_cmd_serve)

    report = sub.add_parser("report", help="summarize a results CSV")
    report.add_argument("--in", dest="results", required=True)
    report.add_argument("--curves", help="optional learning-curve CSV")
    report.set_defaults(func=_cmd_report)

    oracle = sub.add_parser("oracle", help="exact plans/values for small instances")
    oracle.add_argument("--config", help="path to a key = value config file")
    oracle.add_argument("--settings", help="single s,t,p triple overriding the config")
    oracle.add_argument("--preset", help="reward weight preset name")
    oracle.add_argument("--seed", type=int, help="base seed overriding the config")
    oracle.add_argument("--episodes", type=int, default=1)
    oracle.add_argument("--out", help="write JSON lines here instead of stdout")
    oracle.set_defaults(func=_cmd_oracle)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except McsError as err:
        print(f"error [{err.code}]: {err.detail}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
