"""HEAT, PIT and joint objectives over the two unmixed streams.

Every loss returns its value together with exact parameter gradients. The
same ASR transducer and SID head parameters score both streams.
"""

from dataclasses import dataclass, replace

import numpy as np

from surit.config import Assignment, ExperimentConfig
from surit.data.features import feature_pipeline, model_frames
from surit.data.synth import MixtureSample
from surit.errors import DuplicateSpeakerError, InvalidConfigError, InvalidInputError
from surit.inventory import SpeakerInventory
from surit.lattice import (
    LatencyConfig,
    apply_latency_penalty,
    scale_blank_gradient,
    transducer_grad,
    transducer_loss,
)
from surit.model.network import (
    UnmixOutput,
    asr_stream,
    asr_stream_backward,
    sid_stream,
    sid_stream_backward,
    unmix_backward,
    unmix_forward,
)
from surit.neural.params import ModelParams


@dataclass(frozen=True, eq=False)
class LossResult:
    """Summed loss over both streams, per-stream terms and d(loss)/d(params)."""

    loss: float
    terms: tuple[float, float]
    grads: ModelParams | None
    swapped: bool = False


@dataclass(frozen=True, eq=False)
class JointLossResult:
    loss: float
    asr: LossResult
    sid: LossResult
    lambda_sid: float
    grads: ModelParams | None


@dataclass(frozen=True)
class Objective:
    """Loss settings resolved from an experiment config."""

    lambda_sid: float = 10.0
    latency: LatencyConfig = LatencyConfig()
    asr_alpha: float = 1.0
    assignment: Assignment = Assignment.HEAT
    splice_context: int = 3

    @classmethod
    def from_config(cls, config: ExperimentConfig, *, training: bool = True) -> "Objective":
        lat = config.latency
        beta = lat.beta if (config.training.penalty_in_training or not training) else 0.0
        return cls(
            lambda_sid=config.training.lambda_sid,
            latency=LatencyConfig(alpha=lat.alpha, beta=beta, t_buffer=lat.t_buffer),
            asr_alpha=lat.alpha if lat.scale_asr_blank else 1.0,
            assignment=config.loss.assignment,
            splice_context=config.model.splice_context,
        )


def _asr_term(
    params: ModelParams, stream: np.ndarray, tokens: tuple[int, ...], alpha: float, grads: ModelParams | None
) -> tuple[float, np.ndarray | None]:
    stream_pass = asr_stream(params, stream, tokens)
    loss, occupancy = transducer_loss(stream_pass.lattice)
    if grads is None:
        return loss, None
    grad = scale_blank_gradient(transducer_grad(stream_pass.lattice, occupancy), alpha)
    return loss, asr_stream_backward(grad, stream_pass, grads)


def _sid_term(
    params: ModelParams,
    stream: np.ndarray,
    inventory: SpeakerInventory,
    speaker: int,
    latency: LatencyConfig,
    grads: ModelParams | None,
) -> tuple[float, np.ndarray | None]:
    stream_pass = sid_stream(params, stream, inventory, speaker)
    lattice = apply_latency_penalty(stream_pass.lattice, latency)
    loss, occupancy = transducer_loss(lattice)
    if grads is None:
        return loss, None
    grad = scale_blank_gradient(transducer_grad(lattice, occupancy), latency.alpha)
    return loss, sid_stream_backward(grad, stream_pass, grads)


def pit_loss(matrix: np.ndarray) -> float:
    """min(m00 + m11, m01 + m10) where m[i][j] scores labels j on stream i."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (2, 2):
        raise InvalidInputError(f"PIT needs a 2x2 loss matrix, got {m.shape}")
    return float(min(m[0, 0] + m[1, 1], m[0, 1] + m[1, 0]))


def _asr_branch(
    params: ModelParams,
    streams: UnmixOutput,
    Y1: tuple[int, ...],
    Y2: tuple[int, ...],
    objective: Objective,
    with_grad: bool,
) -> tuple[LossResult, np.ndarray | None, np.ndarray | None]:
    grads = params.zeros_like() if with_grad else None
    alpha = objective.asr_alpha
    if objective.assignment is Assignment.HEAT:
        l1, d1 = _asr_term(params, streams.H1, Y1, alpha, grads)
        l2, d2 = _asr_term(params, streams.H2, Y2, alpha, grads)
        return LossResult(loss=l1 + l2, terms=(l1, l2), grads=grads), d1, d2

    # PIT: score every assignment, backpropagate only the winning one.
    matrix = np.array(
        [
            [_asr_term(params, streams.H1, Y1, alpha, None)[0], _asr_term(params, streams.H1, Y2, alpha, None)[0]],
            [_asr_term(params, streams.H2, Y1, alpha, None)[0], _asr_term(params, streams.H2, Y2, alpha, None)[0]],
        ]
    )
    swapped = matrix[0, 1] + matrix[1, 0] < matrix[0, 0] + matrix[1, 1]
    first, second = (Y2, Y1) if swapped else (Y1, Y2)
    l1, d1 = _asr_term(params, streams.H1, first, alpha, grads)
    l2, d2 = _asr_term(params, streams.H2, second, alpha, grads)
    return LossResult(loss=l1 + l2, terms=(l1, l2), grads=grads, swapped=bool(swapped)), d1, d2


def _sid_branch(
    params: ModelParams,
    streams: UnmixOutput,
    S1: int,
    S2: int,
    inventory: SpeakerInventory,
    objective: Objective,
    delay_frames: int,
    with_grad: bool,
    swapped: bool = False,
) -> tuple[LossResult, np.ndarray | None, np.ndarray | None]:
    """Speaker terms per stream; ``swapped`` moves talker 2 (and its onset delay) onto H1."""
    if S1 == S2:
        raise DuplicateSpeakerError(f"both streams are assigned speaker {S1}")
    grads = params.zeros_like() if with_grad else None
    first = replace(objective.latency, t_delay=0)
    second = replace(objective.latency, t_delay=delay_frames)
    if swapped:
        S1, S2 = S2, S1
        first, second = second, first
    l1, d1 = _sid_term(params, streams.H1, inventory, S1, first, grads)
    l2, d2 = _sid_term(params, streams.H2, inventory, S2, second, grads)
    return LossResult(loss=l1 + l2, terms=(l1, l2), grads=grads, swapped=swapped), d1, d2


def heat_asr_loss(
    params: ModelParams, X: np.ndarray, Y1: tuple[int, ...], Y2: tuple[int, ...], *, asr_alpha: float = 1.0
) -> LossResult:
    """L_rnnt(Y1, H1) + L_rnnt(Y2, H2); Y1 belongs to the first-spoken talker."""
    streams, cache = unmix_forward(params, X)
    result, d1, d2 = _asr_branch(params, streams, Y1, Y2, Objective(asr_alpha=asr_alpha), True)
    unmix_backward(d1, d2, cache, result.grads)
    return result


def pit_asr_loss(
    params: ModelParams, X: np.ndarray, Y1: tuple[int, ...], Y2: tuple[int, ...], *, asr_alpha: float = 1.0
) -> LossResult:
    """ASR loss minimised over both label-to-stream assignments."""
    streams, cache = unmix_forward(params, X)
    objective = Objective(asr_alpha=asr_alpha, assignment=Assignment.PIT)
    result, d1, d2 = _asr_branch(params, streams, Y1, Y2, objective, True)
    unmix_backward(d1, d2, cache, result.grads)
    return result


def heat_sid_loss(
    params: ModelParams,
    X: np.ndarray,
    S1: int,
    S2: int,
    inventory: SpeakerInventory,
    *,
    latency: LatencyConfig = LatencyConfig(),
    delay_frames: int = 0,
) -> LossResult:
    """L_hat(S1, H1) + L_hat(S2, H2) with the late-emission penalty offset per stream.

    Stream 1 starts at frame 0; stream 2 starts ``delay_frames`` later.
    """
    streams, cache = unmix_forward(params, X)
    result, d1, d2 = _sid_branch(
        params, streams, S1, S2, inventory, Objective(latency=latency), delay_frames, True
    )
    unmix_backward(d1, d2, cache, result.grads)
    return result


def joint_loss(
    params: ModelParams,
    X: np.ndarray,
    Y1: tuple[int, ...],
    Y2: tuple[int, ...],
    S1: int,
    S2: int,
    inventory: SpeakerInventory,
    objective: Objective = Objective(),
    *,
    delay_frames: int = 0,
    with_grad: bool = True,
) -> JointLossResult:
    """L_asr + lambda * L_sid from one shared unmix forward pass.

    Under PIT the speaker references follow the winning transcript assignment.

    ``grads`` is assembled as grad_asr + lambda * grad_sid.
    """
    if objective.lambda_sid < 0.0:
        raise InvalidConfigError(f"lambda must be >= 0, got {objective.lambda_sid}")
    streams, cache = unmix_forward(params, X)
    asr, a1, a2 = _asr_branch(params, streams, Y1, Y2, objective, with_grad)
    sid, s1, s2 = _sid_branch(
        params, streams, S1, S2, inventory, objective, delay_frames, with_grad, swapped=asr.swapped
    )
    loss = asr.loss + objective.lambda_sid * sid.loss
    if not with_grad:
        return JointLossResult(loss=loss, asr=asr, sid=sid, lambda_sid=objective.lambda_sid, grads=None)

    unmix_backward(a1, a2, cache, asr.grads)
    unmix_backward(s1, s2, cache, sid.grads)
    grads = asr.grads.copy()
    grads.add_scaled(sid.grads, objective.lambda_sid)
    return JointLossResult(loss=loss, asr=asr, sid=sid, lambda_sid=objective.lambda_sid, grads=grads)


def sample_inputs(sample: MixtureSample, splice_context: int = 3) -> tuple[np.ndarray, int]:
    """Model input features and the second stream's onset in unmix frames."""
    return feature_pipeline(sample.X, splice_context), model_frames(sample.delay, splice_context)


def sample_loss(
    params: ModelParams, sample: MixtureSample, objective: Objective, *, with_grad: bool = True
) -> JointLossResult:
    if sample.inventory is None:
        raise InvalidInputError(f"sample {sample.utt_id} carries no speaker inventory")
    X, delay_frames = sample_inputs(sample, objective.splice_context)
    return joint_loss(
        params,
        X,
        sample.Y1,
        sample.Y2,
        sample.S1,
        sample.S2,
        sample.inventory,
        objective,
        delay_frames=delay_frames,
        with_grad=with_grad,
    )
