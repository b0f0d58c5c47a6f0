"""Latency shaping for transducer training: blank-gradient scaling and late-emission penalty."""

from dataclasses import dataclass, replace

import numpy as np

from surit.errors import InvalidConfigError, InvalidInputError
from surit.lattice.transducer import AlignmentLattice, LatticeGrad, LatticeMode


@dataclass(frozen=True)
class LatencyConfig:
    """alpha scales blank gradients; beta, t_buffer and t_delay define the label penalty."""

    alpha: float = 1.0
    beta: float = 0.0
    t_buffer: int = 3
    t_delay: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.beta >= 0.0:
            raise InvalidConfigError(f"beta must be >= 0, got {self.beta}")
        if self.t_buffer < 0 or self.t_delay < 0:
            raise InvalidConfigError("t_buffer and t_delay must be >= 0")


def scale_blank_gradient(grad: LatticeGrad, alpha: float) -> LatticeGrad:
    """Multiply every dL/dblank_logit entry by alpha; label gradients pass through."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidConfigError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return grad
    return LatticeGrad(blank=grad.blank * alpha, label=grad.label)


def emission_penalty(T: int, cfg: LatencyConfig) -> np.ndarray:
    """max(0, beta * (t - t_buffer - t_delay)) for 1-based frames t = 1..T."""
    frames = np.arange(1, T + 1, dtype=np.float64)
    return np.maximum(0.0, cfg.beta * (frames - cfg.t_buffer - cfg.t_delay))


def apply_latency_penalty(lattice: AlignmentLattice, cfg: LatencyConfig) -> AlignmentLattice:
    """Lower label log-probabilities at late frames before forward-backward runs."""
    if lattice.mode is not LatticeMode.HAT:
        raise InvalidInputError("the late-emission penalty applies to HAT lattices only")
    if cfg.beta == 0.0:
        return lattice
    penalty = emission_penalty(lattice.T, cfg)
    if lattice.label_penalty is not None:
        penalty = penalty + lattice.label_penalty
    return replace(lattice, label_penalty=penalty)
