"""Synthetic corpus generation, feature pipeline and dataset storage."""

from surit.data.features import feature_pipeline, model_frames
from surit.data.store import load_dataset, save_dataset
from surit.data.synth import (
    EVAL,
    TRAIN,
    MixtureSample,
    SyntheticCorpus,
    SyntheticDataset,
    SyntheticSpeaker,
    Utterance,
    build_corpus,
    generate_dataset,
    generate_mixture,
    mix,
    sample_eval_delay,
    sample_inventory,
    sample_training_delay,
    synth_utterance,
)

__all__ = [
    "EVAL",
    "TRAIN",
    "MixtureSample",
    "SyntheticCorpus",
    "SyntheticDataset",
    "SyntheticSpeaker",
    "Utterance",
    "build_corpus",
    "feature_pipeline",
    "generate_dataset",
    "generate_mixture",
    "load_dataset",
    "mix",
    "model_frames",
    "sample_eval_delay",
    "sample_inventory",
    "sample_training_delay",
    "save_dataset",
    "synth_utterance",
]
