"""Per-node output distributions for the RNN-T and HAT lattices."""

from dataclasses import dataclass

import numpy as np

from surit.errors import InvalidInputError, ShapeError
from surit.inventory import SpeakerInventory


def logsumexp(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Stable log(sum(exp(x))) along ``axis``."""
    m = np.max(x, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def log_sigmoid(x: np.ndarray | float) -> np.ndarray:
    return -np.logaddexp(0.0, -np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class NodeLogits:
    """Pre-activation scores at one lattice node.

    ``label_logits`` has length V for ASR nodes and K (inventory size) for
    SID nodes.
    """

    blank_logit: float
    label_logits: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.label_logits, dtype=np.float64)
        if labels.ndim != 1 or labels.size == 0:
            raise ShapeError(f"label_logits must be a non-empty vector, got shape {labels.shape}")
        if not np.isfinite(self.blank_logit) or not np.all(np.isfinite(labels)):
            raise InvalidInputError("node logits must be finite")
        object.__setattr__(self, "blank_logit", float(self.blank_logit))
        object.__setattr__(self, "label_logits", labels)


def rnnt_node_logprobs(node: NodeLogits) -> tuple[float, np.ndarray]:
    """Single softmax over {blank} and the labels."""
    scores = np.concatenate(([node.blank_logit], node.label_logits))
    logp = scores - logsumexp(scores)
    return float(logp[0]), logp[1:]


def hat_node_logprobs(node: NodeLogits) -> tuple[float, np.ndarray]:
    """Bernoulli blank b = sigmoid(blank_logit); labels get (1-b) * softmax."""
    log_blank = float(log_sigmoid(node.blank_logit))
    log_not_blank = float(log_sigmoid(-node.blank_logit))
    labels = node.label_logits
    return log_blank, log_not_blank + labels - logsumexp(labels)


def speaker_posterior(z: np.ndarray, inventory: SpeakerInventory) -> np.ndarray:
    """P(s=k) = softmax_k(d_k . z) over the inventory profiles."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] != inventory.dim:
        raise ShapeError(
            f"joint output has shape {z.shape}, profiles have dimension {inventory.dim}"
        )
    scores = inventory.embeddings @ z
    scores = scores - scores.max()
    weights = np.exp(scores)
    return weights / weights.sum()
