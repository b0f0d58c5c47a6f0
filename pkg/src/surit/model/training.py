"""Joint and stepwise training loops."""

import os
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd
import psutil

from surit.config import ExperimentConfig, TrainingMode
from surit.data.synth import MixtureSample
from surit.errors import InvalidConfigError, TrainingDivergenceError
from surit.logging_config import perf_logger, train_logger
from surit.model.losses import Objective, sample_loss
from surit.neural.optim import AdamState, global_norm, optimizer_step
from surit.neural.params import ModelParams, init_params, save_checkpoint

STEP_COLUMNS = ["epoch", "step", "L_asr", "L_sid", "L_joint", "grad_norm"]
EPOCH_COLUMNS = [
    "epoch",
    "phase",
    "L_asr",
    "L_sid",
    "L_joint",
    "grad_norm_asr",
    "grad_norm_sid",
]

UNMIX, ASR, SID = "unmix.", "asr.", "sid."


@dataclass
class TrainingResult:
    params: ModelParams
    steps: pd.DataFrame
    epochs: pd.DataFrame


@dataclass(frozen=True)
class Phase:
    """One optimisation stage: which objective terms count and which tensors stay fixed."""

    name: str
    epochs: int
    lambda_asr: float
    lambda_sid: float
    frozen: tuple[str, ...] = field(default_factory=tuple)


def training_phases(config: ExperimentConfig, frozen: Sequence[str] = ()) -> list[Phase]:
    """Joint: one phase on L_asr + lambda L_sid. Stepwise: ASR first, then SID with unmix and ASR frozen."""
    t = config.training
    frozen = tuple(frozen)
    if t.mode is TrainingMode.JOINT:
        return [Phase("joint", t.epochs, 1.0, t.lambda_sid, frozen)]
    return [
        Phase("asr", t.epochs, 1.0, 0.0, frozen + (SID,)),
        Phase("sid", t.sid_epochs, 0.0, 1.0, frozen + (UNMIX, ASR)),
    ]


def _rss_mb() -> float:
    return psutil.Process(os.getpid()).memory_info().rss / 2**20


def _trainable(params: ModelParams, frozen: tuple[str, ...]) -> list[str]:
    held = set(params.select(frozen))
    return [name for name in params if name not in held]


def train(
    config: ExperimentConfig,
    samples: Sequence[MixtureSample],
    *,
    params: ModelParams | None = None,
    frozen: Sequence[str] = (),
    out_dir: Path | None = None,
) -> TrainingResult:
    """Minibatch Adam over the configured phases.

    Batches are averaged in a fixed sample order. If a loss or gradient goes
    non-finite the last good parameters are written to
    ``out_dir/last_good.ckpt`` and TrainingDivergenceError is raised.
    """
    if not samples:
        raise InvalidConfigError("training needs at least one sample")
    t = config.training
    params = params.copy() if params is not None else init_params(config, config.seed)
    # Terms are weighted per phase below, so the objective itself carries lambda = 1.
    objective = replace(Objective.from_config(config, training=True), lambda_sid=1.0)

    step_rows: list[dict] = []
    epoch_rows: list[dict] = []
    epoch_index = 0
    step_index = 0

    for phase in training_phases(config, frozen):
        trainable = _trainable(params, phase.frozen)
        state = AdamState()
        train_logger.info(
            "Starting training phase",
            phase=phase.name,
            epochs=phase.epochs,
            lambda_sid=phase.lambda_sid,
            trainable_tensors=len(trainable),
        )

        for _ in range(phase.epochs):
            epoch_index += 1
            order = np.random.default_rng([config.seed, epoch_index]).permutation(len(samples))
            sums = {"L_asr": 0.0, "L_sid": 0.0, "L_joint": 0.0, "asr_sq": 0.0, "sid_sq": 0.0}

            for start in range(0, len(order), t.batch_size):
                batch = [samples[i] for i in order[start : start + t.batch_size]]
                grads = params.zeros_like()
                grads_asr = params.zeros_like()
                grads_sid = params.zeros_like()
                l_asr = l_sid = 0.0
                for sample in batch:
                    result = sample_loss(params, sample, objective)
                    grads_asr.add_scaled(result.asr.grads, 1.0 / len(batch))
                    grads_sid.add_scaled(result.sid.grads, 1.0 / len(batch))
                    l_asr += result.asr.loss / len(batch)
                    l_sid += result.sid.loss / len(batch)
                if phase.lambda_asr:
                    grads.add_scaled(grads_asr, phase.lambda_asr)
                if phase.lambda_sid:
                    grads.add_scaled(grads_sid, phase.lambda_sid)
                l_joint = phase.lambda_asr * l_asr + phase.lambda_sid * l_sid

                step_index += 1
                try:
                    if not np.isfinite(l_joint):
                        raise TrainingDivergenceError(f"non-finite loss {l_joint} at step {step_index}")
                    step = optimizer_step(
                        params,
                        grads,
                        state,
                        t.lr,
                        clip_norm=t.clip_norm,
                        beta1=t.beta1,
                        beta2=t.beta2,
                        eps=t.eps,
                        frozen=phase.frozen,
                    )
                except TrainingDivergenceError as exc:
                    checkpoint = None
                    if out_dir is not None:
                        checkpoint = out_dir / "last_good.ckpt"
                        save_checkpoint(params, checkpoint)
                    train_logger.error(
                        "Training diverged", step=step_index, error=str(exc), checkpoint=str(checkpoint)
                    )
                    raise TrainingDivergenceError(str(exc), checkpoint=checkpoint) from exc

                params, state = step.params, step.state
                step_rows.append(
                    {
                        "epoch": epoch_index,
                        "step": step_index,
                        "L_asr": l_asr,
                        "L_sid": l_sid,
                        "L_joint": l_joint,
                        "grad_norm": min(step.grad_norm, t.clip_norm),
                    }
                )
                n = len(batch)
                sums["L_asr"] += l_asr * n
                sums["L_sid"] += l_sid * n
                sums["L_joint"] += l_joint * n
                sums["asr_sq"] += global_norm(grads_asr, trainable) ** 2
                sums["sid_sq"] += global_norm(grads_sid, trainable) ** 2

            n_steps = -(-len(samples) // t.batch_size)
            record = {
                "epoch": epoch_index,
                "phase": phase.name,
                "L_asr": sums["L_asr"] / len(samples),
                "L_sid": sums["L_sid"] / len(samples),
                "L_joint": sums["L_joint"] / len(samples),
                "grad_norm_asr": float(np.sqrt(sums["asr_sq"] / n_steps)),
                "grad_norm_sid": float(np.sqrt(sums["sid_sq"] / n_steps)),
            }
            epoch_rows.append(record)
            train_logger.info("Epoch finished", **record)
            perf_logger.debug("Memory usage", epoch=epoch_index, rss_mb=round(_rss_mb(), 1))

    return TrainingResult(
        params=params,
        steps=pd.DataFrame(step_rows, columns=STEP_COLUMNS),
        epochs=pd.DataFrame(epoch_rows, columns=EPOCH_COLUMNS),
    )
