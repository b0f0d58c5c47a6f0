"""Log-space forward-backward over the T x (U+1) alignment lattice.

Path convention: a complete alignment holds exactly T-1 blanks and U labels
and ends at node (T-1, U) (0-based). There are C(T-1+U, U) such paths. The
final node emits nothing, so its logits never receive gradient.
"""

import hashlib
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from surit.errors import ConsistencyError, InvalidInputError, InvalidLabelError, ShapeError
from surit.lattice.nodes import NodeLogits, log_sigmoid, logsumexp

NEG_INF = -np.inf


class LatticeMode(StrEnum):
    RNNT = "rnnt"
    HAT = "hat"


@dataclass(frozen=True)
class AlignmentLattice:
    """Node logits for one training sample.

    blank_logits: (T, U+1); label_logits: (T, U+1, V); targets: (U,) label
    indices y_1..y_U; label_penalty: optional (T,) amount subtracted from
    every label log-probability at frame t.
    """

    mode: LatticeMode
    blank_logits: np.ndarray
    label_logits: np.ndarray
    targets: np.ndarray
    label_penalty: np.ndarray | None = None

    def __post_init__(self) -> None:
        blank = np.asarray(self.blank_logits, dtype=np.float64)
        labels = np.asarray(self.label_logits, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.int64).reshape(-1)
        if blank.ndim != 2 or blank.shape[0] < 1:
            raise ShapeError(f"blank_logits must be (T, U+1) with T >= 1, got {blank.shape}")
        T, U1 = blank.shape
        if labels.ndim != 3 or labels.shape[:2] != (T, U1) or labels.shape[2] < 1:
            raise ShapeError(f"label_logits must be ({T}, {U1}, V), got {labels.shape}")
        if targets.shape[0] != U1 - 1:
            raise ShapeError(f"expected {U1 - 1} targets, got {targets.shape[0]}")
        if np.any(targets < 0) or np.any(targets >= labels.shape[2]):
            raise InvalidLabelError(
                f"target labels {targets.tolist()} outside [0, {labels.shape[2]})"
            )
        if not (np.all(np.isfinite(blank)) and np.all(np.isfinite(labels))):
            raise InvalidInputError("lattice logits must be finite")
        if self.label_penalty is not None:
            penalty = np.asarray(self.label_penalty, dtype=np.float64)
            if penalty.shape != (T,) or not np.all(np.isfinite(penalty)):
                raise ShapeError(f"label_penalty must be a finite ({T},) vector")
            object.__setattr__(self, "label_penalty", penalty)
        object.__setattr__(self, "mode", LatticeMode(self.mode))
        object.__setattr__(self, "blank_logits", blank)
        object.__setattr__(self, "label_logits", labels)
        object.__setattr__(self, "targets", targets)

    @property
    def T(self) -> int:
        return int(self.blank_logits.shape[0])

    @property
    def U(self) -> int:
        return int(self.blank_logits.shape[1]) - 1

    @property
    def n_labels(self) -> int:
        return int(self.label_logits.shape[2])

    def node(self, t: int, u: int) -> NodeLogits:
        return NodeLogits(self.blank_logits[t, u], self.label_logits[t, u])

    def fingerprint(self) -> str:
        digest = hashlib.blake2b(digest_size=16)
        digest.update(self.mode.value.encode())
        for array in (self.blank_logits, self.label_logits, self.targets, self.label_penalty):
            if array is None:
                digest.update(b"none")
                continue
            digest.update(str(array.shape).encode())
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True)
class Occupancy:
    """Forward/backward accumulators and per-transition posteriors.

    blank[t, u] is the posterior of the blank move (t,u)->(t+1,u);
    label[t, u] that of the label move (t,u)->(t,u+1).
    """

    log_alpha: np.ndarray
    log_beta: np.ndarray
    log_likelihood: float
    blank: np.ndarray
    label: np.ndarray
    fingerprint: str


@dataclass(frozen=True)
class LatticeGrad:
    """dL/dlogit for every blank and label logit of a lattice."""

    blank: np.ndarray
    label: np.ndarray

    def __add__(self, other: "LatticeGrad") -> "LatticeGrad":
        return LatticeGrad(self.blank + other.blank, self.label + other.label)

    def __mul__(self, factor: float) -> "LatticeGrad":
        return LatticeGrad(self.blank * factor, self.label * factor)

    __rmul__ = __mul__


def node_log_distributions(lattice: AlignmentLattice) -> tuple[np.ndarray, np.ndarray]:
    """Log P(blank) (T, U+1) and unpenalised log P(label) (T, U+1, V) at every node."""
    blank = lattice.blank_logits
    labels = lattice.label_logits
    if lattice.mode is LatticeMode.RNNT:
        scores = np.concatenate((blank[..., None], labels), axis=-1)
        lse = logsumexp(scores, axis=-1)
        return blank - lse, labels - lse[..., None]
    log_not_blank = log_sigmoid(-blank)
    return log_sigmoid(blank), log_not_blank[..., None] + labels - logsumexp(labels, axis=-1)[..., None]


def transition_logprobs(lattice: AlignmentLattice) -> tuple[np.ndarray, np.ndarray]:
    """Log-probabilities of the blank move and the reference-label move at each node.

    The label array is (T, U); entry (t, u) scores emitting y_{u+1} from (t, u).
    """
    log_blank, log_labels = node_log_distributions(lattice)
    log_emit = log_labels[:, np.arange(lattice.U), lattice.targets]
    if lattice.label_penalty is not None:
        log_emit = log_emit - lattice.label_penalty[:, None]
    return log_blank, log_emit


def _forward(log_blank: np.ndarray, log_emit: np.ndarray) -> np.ndarray:
    T, U1 = log_blank.shape
    alpha = np.full((T, U1), NEG_INF)
    alpha[0, 0] = 0.0
    for t in range(T):
        for u in range(U1):
            if t == 0 and u == 0:
                continue
            acc = NEG_INF
            if t > 0:
                acc = alpha[t - 1, u] + log_blank[t - 1, u]
            if u > 0:
                acc = np.logaddexp(acc, alpha[t, u - 1] + log_emit[t, u - 1])
            alpha[t, u] = acc
    return alpha


def _backward(log_blank: np.ndarray, log_emit: np.ndarray) -> np.ndarray:
    T, U1 = log_blank.shape
    beta = np.full((T, U1), NEG_INF)
    beta[T - 1, U1 - 1] = 0.0
    for t in range(T - 1, -1, -1):
        for u in range(U1 - 1, -1, -1):
            if t == T - 1 and u == U1 - 1:
                continue
            acc = NEG_INF
            if t < T - 1:
                acc = log_blank[t, u] + beta[t + 1, u]
            if u < U1 - 1:
                acc = np.logaddexp(acc, log_emit[t, u] + beta[t, u + 1])
            beta[t, u] = acc
    return beta


def transducer_loss(lattice: AlignmentLattice) -> tuple[float, Occupancy]:
    """Negative log-likelihood summed over every alignment, plus posteriors."""
    log_blank, log_emit = transition_logprobs(lattice)
    alpha = _forward(log_blank, log_emit)
    beta = _backward(log_blank, log_emit)
    T, U = lattice.T, lattice.U

    log_z = float(alpha[T - 1, U])
    if not np.isfinite(log_z):
        raise InvalidInputError("lattice has zero total path probability")
    if not np.isclose(log_z, beta[0, 0], rtol=1e-10, atol=1e-12):
        raise ConsistencyError(
            f"forward ({log_z!r}) and backward ({float(beta[0, 0])!r}) totals disagree"
        )

    blank_occ = np.zeros((T, U + 1))
    label_occ = np.zeros((T, U + 1))
    if T > 1:
        blank_occ[:-1] = np.exp(alpha[:-1] + log_blank[:-1] + beta[1:] - log_z)
    if U > 0:
        label_occ[:, :-1] = np.exp(alpha[:, :-1] + log_emit + beta[:, 1:] - log_z)

    occupancy = Occupancy(
        log_alpha=alpha,
        log_beta=beta,
        log_likelihood=log_z,
        blank=blank_occ,
        label=label_occ,
        fingerprint=lattice.fingerprint(),
    )
    return -log_z, occupancy


def transducer_grad(lattice: AlignmentLattice, occupancy: Occupancy) -> LatticeGrad:
    """Exact dL/dlogit from the transition posteriors."""
    if occupancy.fingerprint != lattice.fingerprint():
        raise ConsistencyError("occupancy was computed for a different (or mutated) lattice")

    gamma_blank = occupancy.blank
    gamma_label = occupancy.label
    u_index = np.arange(lattice.U)

    if lattice.mode is LatticeMode.RNNT:
        log_blank, log_labels = node_log_distributions(lattice)
        visits = gamma_blank + gamma_label
        grad_blank = visits * np.exp(log_blank) - gamma_blank
        grad_label = visits[..., None] * np.exp(log_labels)
    else:
        b = np.exp(log_sigmoid(lattice.blank_logits))
        labels = lattice.label_logits
        q = np.exp(labels - logsumexp(labels, axis=-1)[..., None])
        grad_blank = gamma_label * b - gamma_blank * (1.0 - b)
        grad_label = gamma_label[..., None] * q

    grad_label[:, u_index, lattice.targets] -= gamma_label[:, :-1]
    return LatticeGrad(blank=grad_blank, label=grad_label)


def frontier_log_masses(occupancy: Occupancy) -> np.ndarray:
    """Log of the total posterior crossing each cut of the lattice.

    Every alignment crosses each time cut t -> t+1 with exactly one blank and
    each label cut u -> u+1 with exactly one label, so each entry is 0 up to
    rounding.
    """
    with np.errstate(divide="ignore"):
        time_cuts = np.log(occupancy.blank[:-1].sum(axis=1))
        label_cuts = np.log(occupancy.label[:, :-1].sum(axis=0))
    return np.concatenate((time_cuts, label_cuts))
