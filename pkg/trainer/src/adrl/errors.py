"""Error taxonomy for the training client. Every raisable condition has a
stable code so callers can branch without string matching."""


class TrainerError(Exception):
    code = "TRAINER"

    def __init__(self, detail: str):
        super().__init__(f"[{self.code}] {detail}")
        self.detail = detail


class EnvUnreachableError(TrainerError):
    """The environment process could not be started or stopped answering."""

    code = "ENV_UNREACHABLE"


class EnvProtocolError(TrainerError):
    """The environment replied with something other than the expected
    message type, or reported an error of its own."""

    code = "ENV_PROTOCOL"


class ShapeMismatchError(TrainerError):
    """Observation feature widths disagree with the configured network."""

    code = "SHAPE_MISMATCH"


class EmptyBatchError(TrainerError):
    code = "EMPTY_BATCH"


class DivergenceError(TrainerError):
    """Loss went non-finite; training aborts rather than corrupt weights."""

    code = "DIVERGENCE"


class CheckpointMismatchError(TrainerError):
    code = "CHECKPOINT_MISMATCH"
