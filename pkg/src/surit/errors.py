"""Exception hierarchy shared by every surit module.

Each error carries the process exit code the CLI maps it to.
"""

from pathlib import Path


class SuritError(Exception):
    """Base class for all surit errors."""

    exit_code = 1


class InvalidInputError(SuritError):
    """Input data is malformed (non-finite values, empty matrices, ...)."""


class ShapeError(SuritError):
    """Array dimensions do not line up."""


class InvalidLabelError(SuritError):
    """A reference label index lies outside the output vocabulary."""


class InvalidConfigError(SuritError):
    """A configuration value is outside its documented range."""


class EmptyInventoryError(SuritError):
    """A speaker inventory with no profiles was supplied."""


class UnknownSpeakerError(SuritError):
    """A target speaker is not part of the supplied inventory."""


class DuplicateSpeakerError(UnknownSpeakerError):
    """Both streams were assigned the same speaker."""


class EmptyInputError(SuritError):
    """An aggregate was requested over an empty collection."""


class TooLargeError(SuritError):
    """An instance exceeds the brute-force enumeration bound."""


class ResampleSourceError(SuritError):
    """The source utterance is too short for the delay rule; draw another one."""


class ConsistencyError(SuritError):
    """Cached results no longer match the object they were computed from."""


class MissingFileError(SuritError):
    """A required file or directory does not exist."""


class VerificationFailedError(SuritError):
    """One or more oracle checks failed."""

    exit_code = 2


class TrainingDivergenceError(SuritError):
    """A loss or gradient became non-finite during training."""

    exit_code = 3

    def __init__(self, message: str, checkpoint: Path | None = None):
        super().__init__(message)
        self.checkpoint = checkpoint
