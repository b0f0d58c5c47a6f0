"""Pydantic schemas for the on-disk dataset."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from surit.config import DataConfig


class SpeakerRecord(BaseModel):
    """One synthetic speaker: profile embedding and voice signature."""

    id: int = Field(..., ge=0)
    profile: list[float]
    voice_offset: list[float]


class CorpusRecord(BaseModel):
    """Everything needed to rebuild the generator state."""

    seed: int = Field(..., ge=0)
    data: DataConfig
    templates: list[list[float]]
    speakers: list[SpeakerRecord]


class ManifestRecord(BaseModel):
    """One mixture; features live in the split's raw float64 block."""

    model_config = ConfigDict(extra="forbid")

    utt_id: str
    S1: int = Field(..., ge=0)
    S2: int = Field(..., ge=0)
    delay: int = Field(..., ge=0)
    K: int = Field(..., ge=1)
    Y1: list[int]
    Y2: list[int]
    inventory: list[int]
    frames: int = Field(..., ge=1)
    offset: int = Field(..., ge=0)

    @model_validator(mode="after")
    def _check_speakers(self) -> "ManifestRecord":
        if self.S1 == self.S2:
            raise ValueError("S1 and S2 must differ")
        if self.S1 not in self.inventory or self.S2 not in self.inventory:
            raise ValueError("inventory must contain both target speakers")
        if len(self.inventory) != self.K:
            raise ValueError("K must equal the inventory size")
        return self
