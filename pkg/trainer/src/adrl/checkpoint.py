"""Single-file parameter archives with a configuration fingerprint.

Writes go to a sibling temp file first and land via rename, so a reader
never sees a half-written archive. Loading refuses any fingerprint
disagreement: weights trained against one feature geometry are garbage
under another.
"""
import os
from typing import Optional

import torch

from .errors import CheckpointMismatchError
from .model import NetworkConfig, PolicyNetwork, build_network


def save_checkpoint(path: str, net: PolicyNetwork, extra: Optional[dict] = None) -> None:
    payload = {
        "fingerprint": net.cfg.fingerprint(),
        "state": net.state_dict(),
        "extra": extra or {},
    }
    tmp = f"{path}.tmp.{os.getpid()}"
    torch.save(payload, tmp)
    os.replace(tmp, path)


def load_checkpoint(path: str, cfg: NetworkConfig) -> PolicyNetwork:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    stored = payload["fingerprint"]
    wanted = cfg.fingerprint()
    differing = sorted(
        key
        for key in set(stored) | set(wanted)
        if stored.get(key) != wanted.get(key)
    )
    if differing:
        raise CheckpointMismatchError(
            "fingerprint disagrees on: " + ", ".join(differing)
        )
    net = build_network(cfg)
    net.load_state_dict(payload["state"])
    return net


def load_network(path: str):
    """Rebuild the archived network from its own fingerprint; returns
    (network, extra). Use load_checkpoint to enforce a caller-side
    configuration instead."""
    payload = torch.load(path, map_location="cpu", weights_only=False)
    stored = dict(payload["fingerprint"])
    stored["mlp_hidden"] = tuple(stored["mlp_hidden"])
    net = build_network(NetworkConfig(**stored))
    net.load_state_dict(payload["state"])
    net.eval()
    return net, payload["extra"]
