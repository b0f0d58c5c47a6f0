"""Adaptive-moment optimiser with global gradient-norm clipping."""

from collections.abc import Collection
from dataclasses import dataclass, field

import numpy as np

from surit.errors import TrainingDivergenceError
from surit.neural.params import ModelParams


@dataclass
class AdamState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class StepResult:
    params: ModelParams
    state: AdamState
    grad_norm: float
    clipped: bool


def global_norm(grads: ModelParams, names: Collection[str]) -> float:
    return float(np.sqrt(sum(float(np.sum(grads[name] ** 2)) for name in names)))


def optimizer_step(
    params: ModelParams,
    grads: ModelParams,
    state: AdamState,
    lr: float,
    *,
    clip_norm: float | None = None,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    frozen: Collection[str] = (),
) -> StepResult:
    """Bias-corrected moment update of every non-frozen tensor.

    ``frozen`` lists name prefixes; matching tensors are copied through
    untouched and keep no optimiser state.
    """
    held = set(params.select(frozen))
    trainable = [name for name in params if name not in held]

    bad = [name for name in trainable if not np.all(np.isfinite(grads[name]))]
    if bad:
        raise TrainingDivergenceError(f"non-finite gradients in {', '.join(bad)}")

    norm = global_norm(grads, trainable)
    scale = 1.0
    if clip_norm is not None and norm > clip_norm:
        scale = clip_norm / norm

    step = state.step + 1
    new_state = AdamState(step=step, m=dict(state.m), v=dict(state.v))
    correction1 = 1.0 - beta1**step
    correction2 = 1.0 - beta2**step

    updated = ModelParams()
    for name, value in params.items():
        if name not in trainable:
            updated[name] = value.copy()
            continue
        g = grads[name] * scale if scale != 1.0 else grads[name]
        m = beta1 * state.m.get(name, np.zeros_like(value)) + (1.0 - beta1) * g
        v = beta2 * state.v.get(name, np.zeros_like(value)) + (1.0 - beta2) * g * g
        new_state.m[name] = m
        new_state.v[name] = v
        updated[name] = value - lr * (m / correction1) / (np.sqrt(v / correction2) + eps)
    return StepResult(params=updated, state=new_state, grad_norm=norm, clipped=scale != 1.0)
