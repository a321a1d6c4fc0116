"""Selection policy network.

Task and participant rows are embedded linearly, normalized per feature
across the valid rows of the instance, and contextualized by two stacks
of identical self-attention blocks (post-norm residual layout, rectified
feed-forward, dropout on the feed-forward sublayer only). A pointer
matrix of dot products scores every (task, participant) pair; a recurrent
core walks the tasks in arrival order, consuming each padded score row,
and its state is projected to per-option logits over the participants
plus an explicit no-op. Chosen participants are masked out for later
tasks, so emitted actions are valid by construction.

An auxiliary head turns learned query slots against the encoded tasks
into a prediction of the next interval's task feature matrix.

The feed-forward-only variant (also the policy for the REINFORCE and
clipped-surrogate baselines) replaces all of the above with a multilayer
perceptron over the flattened observation, keeping the same sequential
masked selection so the action space is identical.
"""
import math
from dataclasses import dataclass, asdict
from typing import List, Optional, Tuple

import numpy as np
import torch
from torch import nn

from .client import PARTICIPANT_WIDTH, TASK_WIDTH, WireObservation
from .errors import ShapeMismatchError

NEG_INF = float("-inf")


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture description; doubles as the checkpoint fingerprint."""

    task_rows: int
    participants: int
    task_width: int = TASK_WIDTH
    participant_width: int = PARTICIPANT_WIDTH
    d: int = 64
    heads: int = 4
    blocks: int = 8
    ff_hidden: int = 128
    dropout: float = 0.1
    mlp_hidden: Tuple[int, int] = (256, 256)
    no_norm: bool = False
    no_recurrent: bool = False
    no_dropout: bool = False
    one_layer: bool = False
    mlp_only: bool = False

    def fingerprint(self) -> dict:
        out = asdict(self)
        out["mlp_hidden"] = list(self.mlp_hidden)
        return out

    @property
    def options(self) -> int:
        return self.participants + 1

    @property
    def effective_blocks(self) -> int:
        return 1 if self.one_layer else self.blocks

    @property
    def effective_dropout(self) -> float:
        return 0.0 if self.no_dropout else self.dropout


def masked_set_norm(x: torch.Tensor, mask: torch.Tensor, eps: float = 1e-8) -> torch.Tensor:
    """Zero-mean unit-variance per feature over the valid rows only.

    Population statistics; masked rows are excluded from the moments and
    forced to zero afterwards. Sets with fewer than two valid rows pass
    through unstandardized: centering a lone row would erase it. Scale
    and shift, when wanted, are applied by the caller so this closed
    form stays testable.
    """
    m = mask.reshape(-1, 1).to(x.dtype)
    count = m.sum()
    if count < 2:
        return x * m
    mean = (x * m).sum(dim=0) / count
    var = (((x - mean) ** 2) * m).sum(dim=0) / count
    return (x - mean) / torch.sqrt(var + eps) * m


class SelfAttention(nn.Module):
    """Multi-head scaled dot-product self-attention with key masking."""

    def __init__(self, d: int, heads: int):
        super().__init__()
        if d % heads:
            raise ShapeMismatchError(f"width {d} not divisible by {heads} heads")
        self.heads = heads
        self.scale = math.sqrt(d // heads)
        self.qkv = nn.Linear(d, 3 * d)
        self.out = nn.Linear(d, d)

    def forward(self, x: torch.Tensor, mask: torch.Tensor):
        n, d = x.shape
        h = self.heads
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        # [heads, n, d/h]
        q = q.reshape(n, h, -1).transpose(0, 1)
        k = k.reshape(n, h, -1).transpose(0, 1)
        v = v.reshape(n, h, -1).transpose(0, 1)
        scores = q @ k.transpose(1, 2) / self.scale
        scores = scores.masked_fill(mask.reshape(1, 1, n) < 0.5, NEG_INF)
        weights = torch.softmax(scores, dim=-1)
        mixed = (weights @ v).transpose(0, 1).reshape(n, d)
        return self.out(mixed), weights.mean(dim=0)


class EncoderBlock(nn.Module):
    """Self-attention and feed-forward sublayers, each residual + norm."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.attn = SelfAttention(cfg.d, cfg.heads)
        self.norm1 = nn.LayerNorm(cfg.d)
        self.norm2 = nn.LayerNorm(cfg.d)
        self.ff = nn.Sequential(
            nn.Linear(cfg.d, cfg.ff_hidden),
            nn.ReLU(),
            nn.Dropout(cfg.effective_dropout),
            nn.Linear(cfg.ff_hidden, cfg.d),
        )

    def forward(self, x: torch.Tensor, mask: torch.Tensor):
        attended, weights = self.attn(x, mask)
        x = self.norm1(x + attended)
        x = self.norm2(x + self.ff(x))
        return x * mask.reshape(-1, 1).to(x.dtype), weights


class Encoder(nn.Module):
    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.stack = nn.ModuleList(
            EncoderBlock(cfg) for _ in range(cfg.effective_blocks)
        )

    def forward(self, x: torch.Tensor, mask: torch.Tensor, collect: bool = False):
        maps = []
        if mask.sum() < 1:
            return torch.zeros_like(x), maps
        for block in self.stack:
            x, weights = block(x, mask)
            if collect:
                maps.append(weights)
        return x, maps


class AuxiliaryHead(nn.Module):
    """Learned query slots attend over the encoded tasks (plus a learned
    null key so empty intervals still decode) and regress the next
    interval's task feature matrix."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.queries = nn.Parameter(torch.randn(cfg.task_rows, cfg.d) * 0.1)
        self.null_key = nn.Parameter(torch.zeros(1, cfg.d))
        self.null_value = nn.Parameter(torch.zeros(1, cfg.d))
        self.key = nn.Linear(cfg.d, cfg.d)
        self.value = nn.Linear(cfg.d, cfg.d)
        self.out = nn.Linear(cfg.d, cfg.task_width)
        self.scale = math.sqrt(cfg.d)

    def forward(self, task_enc: torch.Tensor, task_mask: torch.Tensor) -> torch.Tensor:
        dtype = task_enc.dtype
        keys = torch.cat([self.key(task_enc), self.null_key.to(dtype)], dim=0)
        values = torch.cat([self.value(task_enc), self.null_value.to(dtype)], dim=0)
        valid = torch.cat(
            [task_mask.to(dtype), torch.ones(1, dtype=dtype, device=task_mask.device)]
        )
        scores = self.queries.to(dtype) @ keys.T / self.scale
        scores = scores.masked_fill(valid.reshape(1, -1) < 0.5, NEG_INF)
        return self.out(torch.softmax(scores, dim=-1) @ values)


class PolicyNetwork(nn.Module):
    """All variants behind one act/evaluate interface."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.cfg = cfg
        if cfg.mlp_only:
            flat = (
                cfg.task_rows * (cfg.task_width + 1)
                + cfg.participants * (cfg.participant_width + 1)
            )
            h1, h2 = cfg.mlp_hidden
            self.trunk = nn.Sequential(
                nn.Linear(flat, h1),
                nn.ReLU(),
                nn.Linear(h1, h2),
                nn.ReLU(),
            )
            self.head = nn.Linear(h2, cfg.task_rows * cfg.options)
            return
        self.task_embed = nn.Linear(cfg.task_width, cfg.d)
        self.part_embed = nn.Linear(cfg.participant_width, cfg.d)
        if not cfg.no_norm:
            self.task_gamma = nn.Parameter(torch.ones(cfg.d))
            self.task_beta = nn.Parameter(torch.zeros(cfg.d))
            self.part_gamma = nn.Parameter(torch.ones(cfg.d))
            self.part_beta = nn.Parameter(torch.zeros(cfg.d))
        self.task_encoder = Encoder(cfg)
        self.part_encoder = Encoder(cfg)
        if cfg.no_recurrent:
            self.noop_bias = nn.Parameter(torch.zeros(1))
        else:
            self.core = nn.LSTM(cfg.options, cfg.d, batch_first=True)
            self.proj = nn.Linear(cfg.d, cfg.options)
        self.aux = AuxiliaryHead(cfg)

    # -- shared plumbing ---------------------------------------------------

    def _tensors(self, obs: WireObservation):
        cfg = self.cfg
        if obs.task_features.shape != (cfg.task_rows, cfg.task_width):
            raise ShapeMismatchError(
                f"task matrix {obs.task_features.shape} vs "
                f"configured {(cfg.task_rows, cfg.task_width)}"
            )
        if obs.participant_features.shape != (cfg.participants, cfg.participant_width):
            raise ShapeMismatchError(
                f"participant matrix {obs.participant_features.shape} vs "
                f"configured {(cfg.participants, cfg.participant_width)}"
            )
        dtype = next(self.parameters()).dtype
        return (
            torch.as_tensor(obs.task_features, dtype=dtype),
            torch.as_tensor(obs.task_mask, dtype=dtype),
            torch.as_tensor(obs.participant_features, dtype=dtype),
            torch.as_tensor(obs.participant_mask, dtype=dtype),
        )

    def encode(self, obs: WireObservation, collect: bool = False):
        """Contextualized embeddings, pointer scores, attention maps."""
        tf, tm, pf, pm = self._tensors(obs)
        t = self.task_embed(tf)
        p = self.part_embed(pf)
        if self.cfg.no_norm:
            t = t * tm.reshape(-1, 1)
            p = p * pm.reshape(-1, 1)
        else:
            t = masked_set_norm(t, tm) * self.task_gamma + self.task_beta
            t = t * tm.reshape(-1, 1)
            p = masked_set_norm(p, pm) * self.part_gamma + self.part_beta
            p = p * pm.reshape(-1, 1)
        t, t_maps = self.task_encoder(t, tm, collect)
        p, p_maps = self.part_encoder(p, pm, collect)
        u = t @ p.T
        return t, p, u, (t_maps, p_maps)

    def _row_logits(self, obs: WireObservation):
        """Per valid task row, the option logits before choice masking."""
        cfg = self.cfg
        dtype = next(self.parameters()).dtype
        valid = [i for i in range(cfg.task_rows) if obs.task_mask[i] > 0.5]
        if cfg.mlp_only:
            tf, tm, pf, pm = self._tensors(obs)
            flat = torch.cat([tf.reshape(-1), tm, pf.reshape(-1), pm])
            logits = self.head(self.trunk(flat)).reshape(cfg.task_rows, cfg.options)
            return valid, [logits[i] for i in valid]
        _, _, u, _ = self.encode(obs)
        if not valid:
            return valid, []
        pm = torch.as_tensor(obs.participant_mask, dtype=dtype)
        rows = u[valid] * pm.reshape(1, -1)  # invalid columns contribute 0
        noop = torch.zeros(len(valid), 1, dtype=dtype)
        seq = torch.cat([rows, noop], dim=1)
        if cfg.no_recurrent:
            logits = torch.cat(
                [rows, self.noop_bias.to(dtype).expand(len(valid), 1)], dim=1
            )
        else:
            out, _ = self.core(seq.unsqueeze(0))
            logits = self.proj(out.squeeze(0))
        return valid, [logits[i] for i in range(len(valid))]

    @staticmethod
    def _option_mask(obs: WireObservation, row: int, taken: set) -> List[bool]:
        """True where an option may be chosen: untaken live participants,
        and always the trailing no-op. Tasks demanding a party larger
        than one are declined (single-choice pointer head)."""
        p = len(obs.participant_mask)
        task = obs.tasks[row] if row < len(obs.tasks) else None
        if task is not None and task.get("required_participants", 1) != 1:
            return [False] * p + [True]
        ok = [
            obs.participant_mask[j] > 0.5 and j not in taken for j in range(p)
        ]
        return ok + [True]

    def _walk(self, obs: WireObservation, pick) -> Tuple[np.ndarray, torch.Tensor, list]:
        """Sequential masked selection. ``pick(probs) -> option`` decides;
        returns per-row choices, summed log-probability, assignments."""
        cfg = self.cfg
        valid, logit_rows = self._row_logits(obs)
        choices = np.full(cfg.task_rows, -1, dtype=np.int64)
        dtype = next(self.parameters()).dtype
        total = torch.zeros((), dtype=dtype)
        assignments = []
        taken: set = set()
        for row, logits in zip(valid, logit_rows):
            allowed = torch.tensor(self._option_mask(obs, row, taken))
            masked = logits.masked_fill(~allowed, NEG_INF)
            logp = torch.log_softmax(masked, dim=0)
            option = pick(torch.exp(logp.detach()))
            choices[row] = option
            total = total + logp[option]
            if option < cfg.participants:
                taken.add(option)
                assignments.append((obs.tasks[row]["id"], (option,)))
        return choices, total, assignments

    # -- public API ---------------------------------------------------------

    def act(
        self,
        obs: WireObservation,
        generator: Optional[torch.Generator] = None,
        greedy: bool = False,
    ):
        """Choose assignments; returns (choices, assignments)."""
        if greedy:
            pick = lambda probs: int(torch.argmax(probs))
        else:
            pick = lambda probs: int(
                torch.multinomial(probs, 1, generator=generator)
            )
        with torch.no_grad():
            choices, _, assignments = self._walk(obs, pick)
        return choices, assignments

    def log_prob_of(self, obs: WireObservation, choices: np.ndarray) -> torch.Tensor:
        """Differentiable log-probability of a recorded decision."""
        replay = iter([c for c in choices if c >= 0])
        _, total, _ = self._walk(obs, lambda probs: int(next(replay)))
        return total

    def distribution_rows(self, obs: WireObservation):
        """Masked probability row per valid task, honoring sequentially
        recorded greedy removals; for inspection and property tests."""
        rows = []
        valid, logit_rows = self._row_logits(obs)
        taken: set = set()
        for row, logits in zip(valid, logit_rows):
            allowed = torch.tensor(self._option_mask(obs, row, taken))
            probs = torch.softmax(logits.masked_fill(~allowed, NEG_INF), dim=0)
            option = int(torch.argmax(probs))
            if option < self.cfg.participants:
                taken.add(option)
            rows.append(probs.detach())
        return valid, rows

    def predict_future(self, obs: WireObservation) -> Optional[torch.Tensor]:
        """Next-interval task feature matrix estimate; None for the
        feed-forward-only variant (it has no task encoder)."""
        if self.cfg.mlp_only:
            return None
        t, _, _, _ = self.encode(obs)
        dtype = next(self.parameters()).dtype
        return self.aux(t, torch.as_tensor(obs.task_mask, dtype=dtype))


def build_network(cfg: NetworkConfig) -> PolicyNetwork:
    return PolicyNetwork(cfg)
