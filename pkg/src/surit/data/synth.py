"""Synthetic two-talker corpus.

Each token id has a fixed random feature template; a speaker adds its own
voice offset to every frame. Two utterances from different speakers are
summed with the second shifted by a random onset delay, and every mixture
comes with a shuffled inventory holding both targets plus distractors.
"""

from dataclasses import dataclass, field

import numpy as np

from surit.config import DataConfig, ExperimentConfig
from surit.errors import (
    DuplicateSpeakerError,
    InvalidConfigError,
    InvalidInputError,
    ResampleSourceError,
    UnknownSpeakerError,
)
from surit.inventory import SpeakerInventory
from surit.logging_config import data_logger

TRAIN, EVAL = "train", "eval"
_SPLIT_CODES = {TRAIN: 0, EVAL: 1}


@dataclass(frozen=True, eq=False)
class SyntheticSpeaker:
    id: int
    profile: np.ndarray
    voice_offset: np.ndarray


@dataclass(frozen=True, eq=False)
class Utterance:
    speaker: int
    tokens: tuple[int, ...]
    features: np.ndarray

    @property
    def frames(self) -> int:
        return int(self.features.shape[0])


@dataclass(frozen=True, eq=False)
class MixtureSample:
    """Overlapped features X (T x d_feat); stream 1 is the first-spoken utterance."""

    utt_id: str
    X: np.ndarray
    Y1: tuple[int, ...]
    Y2: tuple[int, ...]
    S1: int
    S2: int
    delay: int
    inventory: SpeakerInventory | None = None

    def __post_init__(self) -> None:
        if self.S1 == self.S2:
            raise DuplicateSpeakerError(f"both streams belong to speaker {self.S1}")
        if self.delay < 0:
            raise InvalidInputError(f"delay must be >= 0, got {self.delay}")
        if self.inventory is not None:
            for speaker in (self.S1, self.S2):
                self.inventory.index_of(speaker)

    @property
    def T(self) -> int:
        return int(self.X.shape[0])


@dataclass(frozen=True, eq=False)
class SyntheticCorpus:
    """Generator state: token templates and the speaker pool."""

    seed: int
    data: DataConfig
    templates: np.ndarray
    speakers: list[SyntheticSpeaker] = field(default_factory=list)

    def speaker(self, speaker_id: int) -> SyntheticSpeaker:
        return self.speakers[speaker_id]


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    corpus: SyntheticCorpus
    train: list[MixtureSample]
    eval: list[MixtureSample]


def _unit(vector: np.ndarray) -> np.ndarray:
    return vector / np.linalg.norm(vector)


def build_corpus(data: DataConfig, seed: int) -> SyntheticCorpus:
    """Token templates plus ``pool_size`` speakers with random unit profiles."""
    rng = np.random.default_rng([seed, 7])
    templates = rng.normal(0.0, 1.0, size=(data.vocab_size, data.feat_dim))
    speakers = []
    for speaker_id in range(data.pool_size):
        profile = _unit(rng.normal(size=data.profile_dim))
        offset = rng.normal(0.0, data.voice_scale, size=data.feat_dim)
        speakers.append(SyntheticSpeaker(id=speaker_id, profile=profile, voice_offset=offset))
    return SyntheticCorpus(seed=seed, data=data, templates=templates, speakers=speakers)


def synth_utterance(
    speaker: SyntheticSpeaker,
    n_tokens: int,
    seed: int | np.random.SeedSequence,
    *,
    templates: np.ndarray,
    frames_per_token: int = 3,
    noise_std: float = 0.1,
) -> Utterance:
    """Uniform random tokens; R frames of template + voice offset + noise each."""
    vocab_size = templates.shape[0]
    if vocab_size < 2:
        raise InvalidConfigError("vocabulary needs at least 2 tokens")
    if frames_per_token < 1:
        raise InvalidConfigError("frames_per_token must be >= 1")
    rng = np.random.default_rng(seed)
    tokens = rng.integers(0, vocab_size, size=n_tokens)
    features = np.repeat(templates[tokens], frames_per_token, axis=0) + speaker.voice_offset
    if noise_std > 0.0:
        features = features + rng.normal(0.0, noise_std, size=features.shape)
    return Utterance(speaker=speaker.id, tokens=tuple(int(t) for t in tokens), features=features)


def mix(u1: Utterance, u2: Utterance, delay: int, utt_id: str = "") -> MixtureSample:
    """Sum u1 with u2 shifted right by ``delay`` frames, zero-padding both."""
    if delay < 0:
        raise InvalidInputError(f"delay must be >= 0, got {delay}")
    d = u1.features.shape[1]
    T = max(u1.frames, delay + u2.frames)
    X = np.zeros((T, d))
    X[: u1.frames] += u1.features
    X[delay : delay + u2.frames] += u2.features
    return MixtureSample(
        utt_id=utt_id, X=X, Y1=u1.tokens, Y2=u2.tokens, S1=u1.speaker, S2=u2.speaker, delay=delay
    )


def sample_training_delay(len1_frames: int, rng: np.random.Generator, min_delay_frames: int = 5) -> int:
    """Uniform integer in [min_delay_frames, len1_frames]."""
    if len1_frames < min_delay_frames:
        raise ResampleSourceError(
            f"first utterance has {len1_frames} frames, shorter than the {min_delay_frames}-frame minimum delay"
        )
    return int(rng.integers(min_delay_frames, len1_frames + 1))


def sample_eval_delay(len1_frames: int, rng: np.random.Generator) -> int:
    """Evaluation delays start at 0."""
    return int(rng.integers(0, len1_frames + 1))


def sample_inventory(
    targets: tuple[int, int],
    pool: list[SyntheticSpeaker],
    K: int,
    rng: np.random.Generator,
) -> SpeakerInventory:
    """Both targets plus K-2 distinct distractors, in shuffled order."""
    if K < 2:
        raise InvalidConfigError(f"inventory size must be >= 2, got {K}")
    if len(pool) < K:
        raise InvalidConfigError(f"speaker pool of {len(pool)} cannot fill an inventory of {K}")
    by_id = {speaker.id: speaker for speaker in pool}
    for target in targets:
        if target not in by_id:
            raise UnknownSpeakerError(f"target speaker {target} is not in the pool")
    if targets[0] == targets[1]:
        raise DuplicateSpeakerError(f"both targets are speaker {targets[0]}")

    others = [speaker.id for speaker in pool if speaker.id not in targets]
    distractors = rng.choice(others, size=K - 2, replace=False).tolist() if K > 2 else []
    labels = [int(s) for s in rng.permutation([*targets, *distractors])]
    embeddings = np.stack([by_id[label].profile for label in labels])
    return SpeakerInventory(labels=tuple(labels), embeddings=embeddings)


def generate_mixture(corpus: SyntheticCorpus, split: str, index: int) -> MixtureSample:
    """Fully determined by (corpus seed, split, index)."""
    data = corpus.data
    rng = np.random.default_rng([corpus.seed, _SPLIT_CODES[split], index])
    s1, s2 = (int(s) for s in rng.choice(data.pool_size, size=2, replace=False))

    def draw(speaker_id: int) -> Utterance:
        n_tokens = int(rng.integers(data.min_tokens, data.max_tokens + 1))
        return synth_utterance(
            corpus.speaker(speaker_id),
            n_tokens,
            int(rng.integers(2**63 - 1)),
            templates=corpus.templates,
            frames_per_token=data.frames_per_token,
            noise_std=data.noise_std,
        )

    u1 = draw(s1)
    if split == TRAIN:
        while True:
            try:
                delay = sample_training_delay(u1.frames, rng, data.min_delay_frames)
                break
            except ResampleSourceError:
                u1 = draw(s1)
        K = int(rng.integers(data.k_min, data.k_max + 1))
    else:
        delay = sample_eval_delay(u1.frames, rng)
        K = data.k_eval
    u2 = draw(s2)

    sample = mix(u1, u2, delay, utt_id=f"{split}-{index:06d}")
    inventory = sample_inventory((s1, s2), corpus.speakers, K, rng)
    return MixtureSample(
        utt_id=sample.utt_id,
        X=sample.X,
        Y1=sample.Y1,
        Y2=sample.Y2,
        S1=sample.S1,
        S2=sample.S2,
        delay=sample.delay,
        inventory=inventory,
    )


def generate_dataset(config: ExperimentConfig) -> SyntheticDataset:
    corpus = build_corpus(config.data, config.seed)
    train = [generate_mixture(corpus, TRAIN, i) for i in range(config.data.n_train)]
    held_out = [generate_mixture(corpus, EVAL, i) for i in range(config.data.n_eval)]
    data_logger.info(
        "Generated synthetic corpus",
        seed=config.seed,
        n_train=len(train),
        n_eval=len(held_out),
        pool_size=config.data.pool_size,
    )
    return SyntheticDataset(corpus=corpus, train=train, eval=held_out)
