"""Command line for training and evaluating selection policies.

The environment is always an external process; ``--program`` names the
simulator executable (default ``mcsim``) and everything rides over its
serve/oracle commands.
"""
import argparse
import shlex
import sys
from typing import List, Optional

from .checkpoint import load_network, save_checkpoint
from .client import ATOM_OVERRIDES, EnvClient, serve_command, setting_overrides
from .errors import TrainerError
from .model import NetworkConfig, build_network
from .rollout import evaluate
from .sl import action_accuracy, build_dataset, oracle_plans, supervised_fit
from .train import MODES, TrainingConfig, train, write_curve


def _parse_triple(text: str):
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3:
        raise TrainerError(f"expected s,t,p: {text!r}")
    return tuple(parts)


def _overrides(args) -> dict:
    if getattr(args, "atom", False):
        return dict(ATOM_OVERRIDES)
    s, t, p = _parse_triple(args.settings)
    return setting_overrides(s, t, p, preset=args.preset)


def _network_config(args, overrides: dict) -> NetworkConfig:
    s = overrides["intervals_per_episode"]
    t = overrides["max_tasks_per_interval"]
    p = overrides["num_participants"]
    mlp_only = args.mlp_only or args.mode in ("rwm", "ppowm")
    return NetworkConfig(
        task_rows=s * t,
        participants=p,
        d=args.d,
        heads=args.heads,
        blocks=args.blocks,
        ff_hidden=args.ff_hidden,
        dropout=args.dropout,
        no_norm=args.no_norm,
        no_recurrent=args.no_recurrent,
        no_dropout=args.no_dropout,
        one_layer=args.one_layer,
        mlp_only=mlp_only,
    )


def _add_env_args(cmd) -> None:
    cmd.add_argument("--settings", help="s,t,p environment triple")
    cmd.add_argument("--preset", help="reward preset name")
    cmd.add_argument("--atom", action="store_true", help="use the frozen atom world")
    cmd.add_argument("--program", default="mcsim", help="simulator executable")
    cmd.add_argument("--seed", type=int, default=0)


def _add_arch_args(cmd) -> None:
    cmd.add_argument("--d", type=int, default=64)
    cmd.add_argument("--heads", type=int, default=4)
    cmd.add_argument("--blocks", type=int, default=8)
    cmd.add_argument("--ff-hidden", type=int, default=128)
    cmd.add_argument("--dropout", type=float, default=0.1)
    cmd.add_argument("--no-norm", action="store_true")
    cmd.add_argument("--no-recurrent", action="store_true")
    cmd.add_argument("--no-dropout", action="store_true")
    cmd.add_argument("--one-layer", action="store_true")
    cmd.add_argument("--mlp-only", action="store_true")


def _program(args) -> List[str]:
    return shlex.split(args.program)


def _cmd_train(args) -> int:
    overrides = _overrides(args)
    cfg = _network_config(args, overrides)
    net = build_network(cfg)
    tc = TrainingConfig(
        mode=args.mode,
        epochs=args.epochs,
        episodes_per_epoch=args.batch_episodes,
        lr=args.lr,
        alpha=args.alpha,
        seed=args.seed,
        fixed_episode_seed=args.fixed_episode_seed,
    )
    with EnvClient(serve_command(_program(args))) as client:
        result = train(net, client, overrides, tc)
        for point in result.curve:
            print(
                f"epoch={point.epoch} mean_cumulative_reward="
                f"{point.mean_cumulative_reward:.4f} stderr={point.stderr:.4f}"
            )
        if args.eval_episodes:
            base = args.seed * 1_000_000 + 777_000
            mean, stderr, _ = evaluate(
                client,
                net,
                seeds=range(base, base + args.eval_episodes),
                overrides=overrides,
            )
            print(f"eval mean_return={mean:.4f} stderr={stderr:.4f}")
    if args.curves:
        write_curve(args.curves, result.curve)
    if args.checkpoint:
        save_checkpoint(
            args.checkpoint,
            net,
            extra={"mode": args.mode, "overrides": overrides, "epochs": args.epochs},
        )
    return 0


def _cmd_eval(args) -> int:
    net, extra = load_network(args.checkpoint)
    overrides = extra.get("overrides") or _overrides(args)
    base = args.seed * 1_000_000 + 777_000
    with EnvClient(serve_command(_program(args))) as client:
        mean, stderr, _ = evaluate(
            client, net, seeds=range(base, base + args.episodes), overrides=overrides
        )
    print(f"eval mean_return={mean:.4f} stderr={stderr:.4f} episodes={args.episodes}")
    return 0


def _cmd_sl(args) -> int:
    overrides = _overrides(args)
    cfg = _network_config(args, overrides)
    net = build_network(cfg)
    plans = oracle_plans(_program(args), overrides, args.instances, args.seed)
    with EnvClient(serve_command(_program(args))) as client:
        dataset = build_dataset(client, overrides, plans)
        history = supervised_fit(net, dataset, args.epochs, lr=args.lr)
        accuracy = action_accuracy(net, dataset)
        base = args.seed * 1_000_000 + 777_000
        mean, stderr, _ = evaluate(
            client,
            net,
            seeds=range(base, base + max(1, args.instances)),
            overrides=overrides,
        )
    print(
        f"samples={len(dataset)} final_loss={history[-1]:.4f} "
        f"accuracy={accuracy:.3f} eval mean_return={mean:.4f}"
    )
    if args.checkpoint:
        save_checkpoint(args.checkpoint, net, extra={"mode": "sl", "overrides": overrides})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adrl", description="selection-policy training tools"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="reinforcement training")
    _add_env_args(tr)
    _add_arch_args(tr)
    tr.add_argument("--mode", default="adrl", choices=MODES)
    tr.add_argument("--epochs", type=int, default=10)
    tr.add_argument("--batch-episodes", type=int, help="episodes per epoch")
    tr.add_argument("--lr", type=float, default=0.1)
    tr.add_argument("--alpha", type=float, default=0.1)
    tr.add_argument("--fixed-episode-seed", type=int)
    tr.add_argument("--eval-episodes", type=int, default=0)
    tr.add_argument("--checkpoint", help="write the trained archive here")
    tr.add_argument("--curves", help="write the per-epoch reward CSV here")
    tr.set_defaults(func=_cmd_train)

    ev = sub.add_parser("eval", help="greedy evaluation of a checkpoint")
    _add_env_args(ev)
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--episodes", type=int, default=20)
    ev.set_defaults(func=_cmd_eval)

    sl = sub.add_parser("sl", help="supervised imitation of the solver")
    _add_env_args(sl)
    _add_arch_args(sl)
    sl.add_argument("--mode", default="adrl", help=argparse.SUPPRESS)
    sl.add_argument("--instances", type=int, default=50)
    sl.add_argument("--epochs", type=int, default=50)
    sl.add_argument("--lr", type=float, default=0.01)
    sl.add_argument("--checkpoint")
    sl.set_defaults(func=_cmd_sl)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrainerError as err:
        print(f"error [{err.code}]: {err.detail}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
