"""Minimal float64 network core with hand-derived backward passes."""

from surit.neural.optim import AdamState, StepResult, optimizer_step
from surit.neural.params import (
    ModelParams,
    check_compatible,
    init_params,
    load_checkpoint,
    param_shapes,
    save_checkpoint,
)

__all__ = [
    "AdamState",
    "ModelParams",
    "StepResult",
    "check_compatible",
    "init_params",
    "load_checkpoint",
    "optimizer_step",
    "param_shapes",
    "save_checkpoint",
]
