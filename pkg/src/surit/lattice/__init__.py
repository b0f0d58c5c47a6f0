"""Exact transducer lattice losses and their gradients."""

from surit.lattice.latency import (
    LatencyConfig,
    apply_latency_penalty,
    emission_penalty,
    scale_blank_gradient,
)
from surit.lattice.nodes import (
    NodeLogits,
    hat_node_logprobs,
    logsumexp,
    rnnt_node_logprobs,
    speaker_posterior,
)
from surit.lattice.transducer import (
    AlignmentLattice,
    LatticeGrad,
    LatticeMode,
    Occupancy,
    frontier_log_masses,
    node_log_distributions,
    transducer_grad,
    transducer_loss,
    transition_logprobs,
)

__all__ = [
    "AlignmentLattice",
    "LatencyConfig",
    "LatticeGrad",
    "LatticeMode",
    "NodeLogits",
    "Occupancy",
    "apply_latency_penalty",
    "emission_penalty",
    "frontier_log_masses",
    "hat_node_logprobs",
    "logsumexp",
    "node_log_distributions",
    "rnnt_node_logprobs",
    "scale_blank_gradient",
    "speaker_posterior",
    "transducer_grad",
    "transducer_loss",
    "transition_logprobs",
]
