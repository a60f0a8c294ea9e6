"""Dense networks, optimizer, soft target blending, checkpoint container."""
from .adam import AdamState, adam_step
from .backend import BACKEND_NAME, get_backend
from .checkpoint import (CheckpointConfigError, CheckpointError,
                         CheckpointShapeError, CheckpointVersionError,
                         CorruptCheckpointError, read_checkpoint, read_probe,
                         write_checkpoint, write_probe)
from .mlp import LINEAR, TANH_SCALED, Mlp, backward, forward, init, soft_update

__all__ = [
    "AdamState", "adam_step", "BACKEND_NAME", "get_backend",
    "CheckpointError", "CorruptCheckpointError", "CheckpointVersionError",
    "CheckpointShapeError", "CheckpointConfigError",
    "read_checkpoint", "write_checkpoint", "read_probe", "write_probe",
    "LINEAR", "TANH_SCALED", "Mlp", "init", "forward", "backward",
    "soft_update",
]
