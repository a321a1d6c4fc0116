"""Neural participant-selection policies over the simulator protocol."""
from .checkpoint import load_checkpoint, load_network, save_checkpoint
from .client import (
    ATOM_OVERRIDES,
    EnvClient,
    WireObservation,
    WireTransition,
    serve_command,
    setting_overrides,
)
from .errors import (
    CheckpointMismatchError,
    DivergenceError,
    EmptyBatchError,
    EnvProtocolError,
    EnvUnreachableError,
    ShapeMismatchError,
    TrainerError,
)
from .losses import (
    RunningBaseline,
    auxiliary_loss,
    clipped_surrogate,
    combined_loss,
    policy_surrogate,
)
from .model import NetworkConfig, PolicyNetwork, build_network, masked_set_norm
from .rollout import Decision, Episode, collect, evaluate, play_episode
from .sl import action_accuracy, build_dataset, oracle_plans, supervised_fit
from .train import (
    MODES,
    CurvePoint,
    TrainingConfig,
    TrainResult,
    default_batch_episodes,
    train,
    write_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
