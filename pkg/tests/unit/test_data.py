"""Unit tests for the synthetic corpus, feature pipeline and dataset storage."""

import numpy as np
import pytest

from surit.config import DataConfig
from surit.data import (
    EVAL,
    TRAIN,
    build_corpus,
    feature_pipeline,
    generate_mixture,
    load_dataset,
    mix,
    model_frames,
    sample_eval_delay,
    sample_inventory,
    sample_training_delay,
    synth_utterance,
)
from surit.data.synth import SyntheticSpeaker, Utterance
from surit.errors import (
    DuplicateSpeakerError,
    InvalidConfigError,
    InvalidInputError,
    MissingFileError,
    ResampleSourceError,
    UnknownSpeakerError,
)


def _speaker(speaker_id: int, d: int = 2) -> SyntheticSpeaker:
    profile = np.zeros(3)
    profile[speaker_id % 3] = 1.0
    return SyntheticSpeaker(id=speaker_id, profile=profile, voice_offset=np.full(d, 0.5 * speaker_id))


def _utterance(speaker: int, frames: int, d: int = 2, value: float = 1.0) -> Utterance:
    return Utterance(speaker=speaker, tokens=(0,), features=np.full((frames, d), value))


@pytest.mark.unit
class TestSynthUtterance:
    """Test utterance synthesis."""

    def test_noiseless_single_token(self):
        templates = np.array([[1.0, 2.0], [3.0, 4.0]])
        speaker = _speaker(1)
        u = synth_utterance(speaker, 1, 0, templates=templates, frames_per_token=1, noise_std=0.0)
        np.testing.assert_array_equal(u.features, templates[list(u.tokens)] + speaker.voice_offset)

    def test_frame_count(self):
        u = synth_utterance(_speaker(0), 3, 0, templates=np.eye(4, 2), frames_per_token=2)
        assert u.frames == 6
        assert len(u.tokens) == 3

    def test_deterministic(self):
        a = synth_utterance(_speaker(0), 4, 11, templates=np.eye(4, 2))
        b = synth_utterance(_speaker(0), 4, 11, templates=np.eye(4, 2))
        assert a.tokens == b.tokens
        np.testing.assert_array_equal(a.features, b.features)

    def test_vocabulary_too_small(self):
        with pytest.raises(InvalidConfigError):
            synth_utterance(_speaker(0), 2, 0, templates=np.ones((1, 2)))


@pytest.mark.unit
class TestMix:
    """Test overlapping two utterances."""

    def test_length(self):
        sample = mix(_utterance(0, 10), _utterance(1, 8), delay=4)
        assert sample.T == 12

    def test_overlap_region_sums(self):
        sample = mix(_utterance(0, 10, value=1.0), _utterance(1, 8, value=2.0), delay=4)
        np.testing.assert_array_equal(sample.X[:4], 1.0)
        np.testing.assert_array_equal(sample.X[4:10], 3.0)
        np.testing.assert_array_equal(sample.X[10:], 2.0)

    def test_no_overlap(self):
        sample = mix(_utterance(0, 3, value=1.0), _utterance(1, 2, value=2.0), delay=5)
        np.testing.assert_array_equal(sample.X[:3], 1.0)
        np.testing.assert_array_equal(sample.X[3:5], 0.0)
        np.testing.assert_array_equal(sample.X[5:], 2.0)

    def test_same_speaker_rejected(self):
        with pytest.raises(DuplicateSpeakerError):
            mix(_utterance(0, 3), _utterance(0, 3), delay=0)

    def test_negative_delay(self):
        with pytest.raises(InvalidInputError):
            mix(_utterance(0, 3), _utterance(1, 3), delay=-1)


@pytest.mark.unit
class TestDelays:
    """Test onset-delay sampling."""

    def test_degenerate_interval(self, rng):
        assert {sample_training_delay(5, rng, 5) for _ in range(50)} == {5}

    def test_training_bounds(self, rng):
        draws = np.array([sample_training_delay(12, rng, 5) for _ in range(10_000)])
        assert draws.min() == 5 and draws.max() == 12

    def test_short_source_needs_resample(self, rng):
        with pytest.raises(ResampleSourceError):
            sample_training_delay(4, rng, 5)

    def test_eval_starts_at_zero(self, rng):
        draws = np.array([sample_eval_delay(6, rng) for _ in range(10_000)])
        assert draws.min() == 0 and draws.max() == 6


@pytest.mark.unit
class TestInventory:
    """Test inventory sampling."""

    def test_two_targets_only(self, rng):
        pool = [_speaker(i) for i in range(5)]
        inventory = sample_inventory((3, 1), pool, 2, rng)
        assert sorted(inventory.labels) == [1, 3]

    def test_targets_always_present(self, rng):
        corpus = build_corpus(DataConfig(), 0)
        for _ in range(10_000 // 20):
            targets = tuple(int(s) for s in rng.choice(40, size=2, replace=False))
            inventory = sample_inventory(targets, corpus.speakers, 8, rng)
            assert inventory.size == 8
            assert set(targets) <= set(inventory.labels)
            assert len(set(inventory.labels)) == 8
            for label, row in zip(inventory.labels, inventory.embeddings, strict=True):
                np.testing.assert_array_equal(row, corpus.speaker(label).profile)

    def test_errors(self, rng):
        pool = [_speaker(i) for i in range(4)]
        with pytest.raises(InvalidConfigError):
            sample_inventory((0, 1), pool, 1, rng)
        with pytest.raises(InvalidConfigError):
            sample_inventory((0, 1), pool, 5, rng)
        with pytest.raises(UnknownSpeakerError):
            sample_inventory((0, 9), pool, 3, rng)
        with pytest.raises(DuplicateSpeakerError):
            sample_inventory((2, 2), pool, 3, rng)


@pytest.mark.unit
class TestFeatures:
    """Test frame splicing and downsampling."""

    def test_shape(self):
        assert feature_pipeline(np.zeros((9, 4))).shape == (3, 12)

    def test_trailing_frames_dropped(self):
        assert feature_pipeline(np.zeros((11, 4))).shape == (3, 12)

    def test_constant_input(self):
        np.testing.assert_array_equal(feature_pipeline(np.full((6, 2), 7.0)), 7.0)

    def test_hand_unrolled(self):
        raw = np.arange(12.0).reshape(6, 2)
        expected = np.array([[0, 1, 2, 3, 4, 5], [6, 7, 8, 9, 10, 11]], dtype=float)
        np.testing.assert_array_equal(feature_pipeline(raw, 3), expected)

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            feature_pipeline(np.zeros((2, 4)))

    def test_model_frames(self):
        assert model_frames(10) == 3
        assert model_frames(10, 2) == 5
        assert model_frames(0) == 0


@pytest.mark.unit
class TestCorpus:
    """Test mixture generation."""

    def test_mixture_is_deterministic(self, tiny_config):
        corpus = build_corpus(tiny_config.data, 5)
        a = generate_mixture(corpus, EVAL, 3)
        b = generate_mixture(build_corpus(tiny_config.data, 5), EVAL, 3)
        assert (a.Y1, a.Y2, a.S1, a.S2, a.delay) == (b.Y1, b.Y2, b.S1, b.S2, b.delay)
        np.testing.assert_array_equal(a.X, b.X)
        assert a.inventory.labels == b.inventory.labels

    def test_split_contracts(self):
        data = DataConfig(n_train=30, n_eval=30)
        corpus = build_corpus(data, 0)
        for i in range(30):
            train = generate_mixture(corpus, TRAIN, i)
            assert data.k_min <= train.inventory.size <= data.k_max
            assert train.delay >= data.min_delay_frames
            assert train.delay <= len(train.Y1) * data.frames_per_token
            held_out = generate_mixture(corpus, EVAL, i)
            assert held_out.inventory.size == data.k_eval
            assert 0 <= held_out.delay <= len(held_out.Y1) * data.frames_per_token
            for sample in (train, held_out):
                assert sample.S1 != sample.S2
                assert {sample.S1, sample.S2} <= set(sample.inventory.labels)

    def test_dataset_sizes(self, tiny_config, tiny_dataset):
        assert len(tiny_dataset.train) == tiny_config.data.n_train
        assert len(tiny_dataset.eval) == tiny_config.data.n_eval
        assert tiny_dataset.train[0].utt_id == "train-000000"


@pytest.mark.unit
class TestStore:
    """Test writing and reading dataset directories."""

    def test_round_trip(self, tiny_dataset, tiny_data_dir):
        loaded = load_dataset(tiny_data_dir)
        assert loaded.corpus.data == tiny_dataset.corpus.data
        np.testing.assert_array_equal(loaded.corpus.templates, tiny_dataset.corpus.templates)
        for original, restored in zip(tiny_dataset.eval, loaded.eval, strict=True):
            assert restored.utt_id == original.utt_id
            np.testing.assert_array_equal(restored.X, original.X)
            assert (restored.Y1, restored.Y2, restored.S1, restored.S2) == (
                original.Y1,
                original.Y2,
                original.S1,
                original.S2,
            )
            assert restored.delay == original.delay
            assert restored.inventory.labels == original.inventory.labels
            np.testing.assert_array_equal(restored.inventory.embeddings, original.inventory.embeddings)

    def test_files(self, tiny_data_dir):
        names = {p.name for p in tiny_data_dir.iterdir()}
        assert {"corpus.json", "train.jsonl", "train.f64", "eval.jsonl", "eval.f64"} <= names

    def test_missing_directory(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_dataset(tmp_path / "nothing")

    def test_truncated_features(self, tiny_data_dir):
        blob = tiny_data_dir / "eval.f64"
        blob.write_bytes(blob.read_bytes()[:-8])
        with pytest.raises(InvalidInputError):
            load_dataset(tiny_data_dir)
