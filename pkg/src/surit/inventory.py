"""Speaker inventory: the K candidate profiles supplied with each utterance."""

from dataclasses import dataclass

import numpy as np

from surit.errors import EmptyInventoryError, InvalidInputError, ShapeError, UnknownSpeakerError


@dataclass(frozen=True)
class SpeakerInventory:
    """K identity tags and their unit-norm profile embeddings (K x d_spk)."""

    labels: tuple[int, ...]
    embeddings: np.ndarray

    def __post_init__(self) -> None:
        if len(self.labels) == 0:
            raise EmptyInventoryError("speaker inventory is empty")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidInputError(f"inventory labels are not unique: {self.labels}")
        emb = np.asarray(self.embeddings, dtype=np.float64)
        if emb.ndim != 2 or emb.shape[0] != len(self.labels):
            raise ShapeError(
                f"embeddings must be ({len(self.labels)}, d), got {emb.shape}"
            )
        if not np.all(np.isfinite(emb)):
            raise InvalidInputError("inventory embeddings contain non-finite values")
        norms = np.linalg.norm(emb, axis=1)
        if not np.allclose(norms, 1.0, rtol=0.0, atol=1e-9):
            raise InvalidInputError("inventory embeddings must be unit norm")
        object.__setattr__(self, "embeddings", emb)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return int(self.embeddings.shape[1])

    def index_of(self, speaker: int) -> int:
        """Position of ``speaker`` in the inventory."""
        try:
            return self.labels.index(speaker)
        except ValueError:
            raise UnknownSpeakerError(
                f"speaker {speaker} is not in the inventory {list(self.labels)}"
            ) from None
