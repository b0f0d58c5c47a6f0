"""Forward and backward passes of the unmix front-end and the two transducer heads.

Backward functions accumulate into a ``grads`` mapping (same names as the
parameters) so several passes can share one gradient buffer.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from surit.errors import InvalidInputError
from surit.inventory import SpeakerInventory
from surit.lattice import AlignmentLattice, LatticeGrad, LatticeMode
from surit.neural import ops
from surit.neural.params import ModelParams

# SID label-encoder rows: before and after the single speaker emission.
SID_START, SID_EMITTED = 0, 1


@dataclass(frozen=True, eq=False)
class UnmixOutput:
    """Encoded mixture H, mask M in (0, 1) and the streams H1 = H * M, H2 = H * (1 - M).

    H1 + H2 == H holds exactly in float64.
    """

    H: np.ndarray
    M: np.ndarray
    H1: np.ndarray
    H2: np.ndarray


# Unmix


def _conv_stack(params: ModelParams, branch: str, X: np.ndarray) -> tuple[np.ndarray, tuple]:
    a1, c1 = ops.conv1d_forward(X, params[f"unmix.{branch}.conv1.W"], params[f"unmix.{branch}.conv1.b"])
    h1, t1 = ops.tanh_forward(a1)
    out, c2 = ops.conv1d_forward(h1, params[f"unmix.{branch}.conv2.W"], params[f"unmix.{branch}.conv2.b"])
    return out, (c1, t1, c2)


def _conv_stack_backward(d_out: np.ndarray, cache: tuple, branch: str, grads: ModelParams) -> None:
    c1, t1, c2 = cache
    d_h1, dW2, db2 = ops.conv1d_backward(d_out, c2)
    grads[f"unmix.{branch}.conv2.W"] += dW2
    grads[f"unmix.{branch}.conv2.b"] += db2
    _, dW1, db1 = ops.conv1d_backward(ops.tanh_backward(d_h1, t1), c1)
    grads[f"unmix.{branch}.conv1.W"] += dW1
    grads[f"unmix.{branch}.conv1.b"] += db1


def _split(H: np.ndarray, M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """H * M and H * (1 - M) with H1 + H2 == H bit for bit.

    The larger share is the rounded product; the smaller is H minus it, which
    is exact because the two lie within a factor of two (Sterbenz).
    """
    upper = M >= 0.5
    major = H * np.where(upper, M, 1.0 - M)
    minor = H - major
    return np.where(upper, major, minor), np.where(upper, minor, major)


def unmix_forward(params: ModelParams, X: np.ndarray) -> tuple[UnmixOutput, tuple]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInputError(f"unmix expects a non-empty (T, d) matrix, got {X.shape}")
    mask_logits, mask_cache = _conv_stack(params, "mask", X)
    M, sig_cache = ops.sigmoid_forward(mask_logits)
    H, enc_cache = _conv_stack(params, "enc", X)
    H1, H2 = _split(H, M)
    return UnmixOutput(H=H, M=M, H1=H1, H2=H2), (mask_cache, sig_cache, enc_cache, H, M)


def unmix(params: ModelParams, X: np.ndarray) -> UnmixOutput:
    return unmix_forward(params, X)[0]


def unmix_backward(dH1: np.ndarray, dH2: np.ndarray, cache: tuple, grads: ModelParams) -> None:
    mask_cache, sig_cache, enc_cache, H, M = cache
    diff = dH1 - dH2
    dH = dH2 + diff * M
    dM = diff * H
    _conv_stack_backward(ops.sigmoid_backward(dM, sig_cache), mask_cache, "mask", grads)
    _conv_stack_backward(dH, enc_cache, "enc", grads)


# ASR transducer


def _asr_layers(params: ModelParams) -> int:
    layer = 0
    while f"asr.enc.l{layer}.W" in params:
        layer += 1
    return layer


def asr_encoder_forward(params: ModelParams, stream: np.ndarray) -> tuple[np.ndarray, list]:
    """Stacked unidirectional recurrent layers, with optional frame-pair reduction after layer 0."""
    x = stream
    caches: list[tuple[str, Any]] = []
    for layer in range(_asr_layers(params)):
        W, U, b = (params[f"asr.enc.l{layer}.{n}"] for n in "WUb")
        x, cache = ops.recurrent_forward(x, np.zeros(U.shape[0]), W, U, b)
        caches.append((f"asr.enc.l{layer}", cache))
        if layer == 0 and "asr.enc.reduce.W" in params:
            x, cache = ops.time_reduction_forward(x, params["asr.enc.reduce.W"], params["asr.enc.reduce.b"])
            caches.append(("asr.enc.reduce", cache))
    return x, caches


def asr_encoder_backward(dF: np.ndarray, caches: list, grads: ModelParams) -> np.ndarray:
    d = dF
    for prefix, cache in reversed(caches):
        if prefix == "asr.enc.reduce":
            d, dW, db = ops.time_reduction_backward(d, cache)
            grads[f"{prefix}.W"] += dW
            grads[f"{prefix}.b"] += db
            continue
        d, _, dW, dU, db = ops.recurrent_backward(d, cache)
        grads[f"{prefix}.W"] += dW
        grads[f"{prefix}.U"] += dU
        grads[f"{prefix}.b"] += db
    return d


def asr_predictor_forward(params: ModelParams, tokens: tuple[int, ...]) -> tuple[np.ndarray, tuple]:
    """Label encoder states for the start symbol and every prefix of ``tokens``; (U+1, H_g)."""
    ids = np.array([0, *(int(t) + 1 for t in tokens)], dtype=np.int64)
    E, embed_cache = ops.embed_forward(ids, params["asr.pred.embed"])
    U = params["asr.pred.gru.U"]
    G, gru_cache = ops.recurrent_forward(
        E, np.zeros(U.shape[0]), params["asr.pred.gru.W"], U, params["asr.pred.gru.b"]
    )
    return G, (embed_cache, gru_cache)


def asr_predictor_backward(dG: np.ndarray, cache: tuple, grads: ModelParams) -> None:
    embed_cache, gru_cache = cache
    dE, _, dW, dU, db = ops.recurrent_backward(dG, gru_cache)
    grads["asr.pred.gru.W"] += dW
    grads["asr.pred.gru.U"] += dU
    grads["asr.pred.gru.b"] += db
    grads["asr.pred.embed"] += ops.embed_backward(dE, embed_cache)


def _joint_forward(
    F: np.ndarray, G: np.ndarray, W_enc: np.ndarray, W_pred: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, tuple]:
    """tanh(concat(f_t, g_u) @ W + b) with W split into its encoder and predictor rows."""
    z = np.tanh((F @ W_enc)[:, None, :] + (G @ W_pred)[None, :, :] + b)
    return z, (F, G, W_enc, W_pred, z)


def _joint_backward(dz: np.ndarray, cache: tuple) -> tuple[np.ndarray, ...]:
    """Returns (dF, dG, dW_enc, dW_pred, db)."""
    F, G, W_enc, W_pred, z = cache
    d_pre = dz * (1.0 - z * z)
    d_enc = d_pre.sum(axis=1)
    d_pred = d_pre.sum(axis=0)
    return d_enc @ W_enc.T, d_pred @ W_pred.T, F.T @ d_enc, G.T @ d_pred, d_pre.sum(axis=(0, 1))


@dataclass(frozen=True, eq=False)
class StreamPass:
    """A transducer lattice built from one feature stream, plus what its backward pass needs."""

    lattice: AlignmentLattice
    cache: tuple


def asr_stream(params: ModelParams, stream: np.ndarray, tokens: tuple[int, ...]) -> StreamPass:
    """RNN-T lattice of the shared ASR transducer on one stream; output index 0 is blank."""
    F, enc_cache = asr_encoder_forward(params, stream)
    G, pred_cache = asr_predictor_forward(params, tokens)
    z, joint_cache = _joint_forward(
        F, G, params["asr.joint.enc.W"], params["asr.joint.pred.W"], params["asr.joint.b"]
    )
    logits, out_cache = ops.linear_forward(z, params["asr.out.W"], params["asr.out.b"])
    lattice = AlignmentLattice(
        mode=LatticeMode.RNNT,
        blank_logits=logits[..., 0],
        label_logits=logits[..., 1:],
        targets=np.asarray(tokens, dtype=np.int64),
    )
    return StreamPass(lattice=lattice, cache=(enc_cache, pred_cache, joint_cache, out_cache))


def asr_stream_backward(grad: LatticeGrad, stream_pass: StreamPass, grads: ModelParams) -> np.ndarray:
    """Backpropagate lattice-logit gradients; returns d(stream)."""
    enc_cache, pred_cache, joint_cache, out_cache = stream_pass.cache
    d_logits = np.concatenate((grad.blank[..., None], grad.label), axis=-1)
    dz, dW, db = ops.linear_backward(d_logits, out_cache)
    grads["asr.out.W"] += dW
    grads["asr.out.b"] += db
    dF, dG, dW_enc, dW_pred, db_joint = _joint_backward(dz, joint_cache)
    grads["asr.joint.enc.W"] += dW_enc
    grads["asr.joint.pred.W"] += dW_pred
    grads["asr.joint.b"] += db_joint
    asr_predictor_backward(dG, pred_cache, grads)
    return asr_encoder_backward(dF, enc_cache, grads)


# SID HAT head


def sid_encoder_forward(params: ModelParams, stream: np.ndarray) -> tuple[np.ndarray, tuple]:
    U = params["sid.enc.gru.U"]
    return ops.recurrent_forward(
        stream, np.zeros(U.shape[0]), params["sid.enc.gru.W"], U, params["sid.enc.gru.b"]
    )


def sid_head_forward(params: ModelParams, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Blank logit and profile-space projection e from joint activations z (..., J)."""
    blank, blank_cache = ops.linear_forward(z, params["sid.blank.W"], params["sid.blank.b"])
    e, label_cache = ops.linear_forward(z, params["sid.label.W"], params["sid.label.b"])
    return blank[..., 0], e, (blank_cache, label_cache)


def sid_stream(params: ModelParams, stream: np.ndarray, inventory: SpeakerInventory, speaker: int) -> StreamPass:
    """One-label HAT lattice; label logits are inventory profiles dotted with e."""
    target = inventory.index_of(speaker)
    Fs, enc_cache = sid_encoder_forward(params, stream)
    Es, embed_cache = ops.embed_forward(np.array([SID_START, SID_EMITTED]), params["sid.pred.embed"])
    z, joint_cache = _joint_forward(
        Fs, Es, params["sid.joint.enc.W"], params["sid.joint.pred.W"], params["sid.joint.b"]
    )
    blank, e, head_cache = sid_head_forward(params, z)
    lattice = AlignmentLattice(
        mode=LatticeMode.HAT,
        blank_logits=blank,
        label_logits=e @ inventory.embeddings.T,
        targets=np.array([target]),
    )
    cache = (enc_cache, embed_cache, joint_cache, head_cache, inventory.embeddings)
    return StreamPass(lattice=lattice, cache=cache)


def sid_stream_backward(grad: LatticeGrad, stream_pass: StreamPass, grads: ModelParams) -> np.ndarray:
    enc_cache, embed_cache, joint_cache, head_cache, profiles = stream_pass.cache
    blank_cache, label_cache = head_cache
    dz_blank, dW, db = ops.linear_backward(grad.blank[..., None], blank_cache)
    grads["sid.blank.W"] += dW
    grads["sid.blank.b"] += db
    dz_label, dW, db = ops.linear_backward(grad.label @ profiles, label_cache)
    grads["sid.label.W"] += dW
    grads["sid.label.b"] += db
    dFs, dEs, dW_enc, dW_pred, db_joint = _joint_backward(dz_blank + dz_label, joint_cache)
    grads["sid.joint.enc.W"] += dW_enc
    grads["sid.joint.pred.W"] += dW_pred
    grads["sid.joint.b"] += db_joint
    grads["sid.pred.embed"] += ops.embed_backward(dEs, embed_cache)
    d_stream, _, dW, dU, db = ops.recurrent_backward(dFs, enc_cache)
    grads["sid.enc.gru.W"] += dW
    grads["sid.enc.gru.U"] += dU
    grads["sid.enc.gru.b"] += db
    return d_stream
