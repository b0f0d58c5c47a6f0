"""SURIT assembly: unmix front-end, shared ASR transducer and SID HAT head."""

from surit.model.evaluation import decode_sample, evaluate
from surit.model.losses import (
    JointLossResult,
    LossResult,
    Objective,
    heat_asr_loss,
    heat_sid_loss,
    joint_loss,
    pit_asr_loss,
    pit_loss,
    sample_inputs,
    sample_loss,
)
from surit.model.network import UnmixOutput, unmix
from surit.model.sweep import PRESETS, SweepCell, run_sweep, sweep_cells
from surit.model.training import TrainingResult, train

__all__ = [
    "PRESETS",
    "JointLossResult",
    "LossResult",
    "Objective",
    "SweepCell",
    "TrainingResult",
    "UnmixOutput",
    "decode_sample",
    "evaluate",
    "heat_asr_loss",
    "heat_sid_loss",
    "joint_loss",
    "pit_asr_loss",
    "pit_loss",
    "run_sweep",
    "sample_inputs",
    "sample_loss",
    "sweep_cells",
    "train",
    "unmix",
]
