"""Feature pipeline: frame splicing and super-frame downsampling."""

import numpy as np

from surit.errors import InvalidInputError


def feature_pipeline(raw: np.ndarray, context: int = 3) -> np.ndarray:
    """Splice ``context`` consecutive frames, keep every ``context``-th super-frame.

    (T, d) -> (floor(T / context), context * d); trailing frames are dropped.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise InvalidInputError(f"features must be (T, d), got {raw.shape}")
    T, d = raw.shape
    if T < context:
        raise InvalidInputError(f"need at least {context} frames, got {T}")
    n_out = T // context
    return raw[: n_out * context].reshape(n_out, context * d).copy()


def model_frames(raw_frames: int, context: int = 3) -> int:
    """Map a raw frame count or offset onto the unmix frame rate."""
    return raw_frames // context
