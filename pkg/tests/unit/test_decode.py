"""Unit tests for greedy decoding and emission-latency statistics."""

import json

import numpy as np
import pytest

from surit.decode import (
    DecodeEvent,
    EventKind,
    event_records,
    greedy_decode_asr,
    greedy_decode_sid,
    latency_stats,
    write_events,
)
from surit.errors import EmptyInputError, InvalidInputError
from surit.lattice import NodeLogits


class TableTokenScorer:
    """Frame-indexed score table; the state counts emitted tokens."""

    def __init__(self, table: np.ndarray, after_emit: np.ndarray | None = None):
        self.table = table
        self.after_emit = after_emit

    @property
    def frames(self) -> int:
        return self.table.shape[0]

    def start(self):
        return 0

    def scores(self, t, state):
        if state and self.after_emit is not None:
            return self.after_emit[t]
        return self.table[t]

    def advance(self, state, token):
        return state + 1


class TableSpeakerScorer:
    def __init__(self, blank_probs, label_logits):
        self.blank_logits = np.log(np.asarray(blank_probs)) - np.log1p(-np.asarray(blank_probs))
        self.label_logits = np.asarray(label_logits, dtype=np.float64)

    @property
    def frames(self) -> int:
        return len(self.blank_logits)

    def node(self, t, emitted):
        return NodeLogits(self.blank_logits[t], self.label_logits[t])


@pytest.mark.unit
class TestGreedyAsr:
    """Test the frame-synchronous token search."""

    def test_blank_everywhere(self):
        table = np.tile([5.0, 0.0, 0.0], (4, 1))
        assert greedy_decode_asr(TableTokenScorer(table)) == []

    def test_single_emission_frame_is_one_based(self):
        table = np.tile([5.0, 0.0, 0.0], (4, 1))
        table[1] = [0.0, 6.0, 0.0]  # token 0 dominant at the second frame
        after = np.tile([5.0, 0.0, 0.0], (4, 1))
        events = greedy_decode_asr(TableTokenScorer(table, after_emit=after))
        assert events == [DecodeEvent(kind=EventKind.TOKEN, symbol=0, frame=2)]

    def test_ties_go_to_blank(self):
        table = np.tile([1.0, 1.0, 0.0], (3, 1))
        assert greedy_decode_asr(TableTokenScorer(table)) == []

    def test_symbols_per_frame_cap(self):
        table = np.array([[0.0, 3.0], [0.0, 3.0]])
        events = greedy_decode_asr(TableTokenScorer(table), max_symbols_per_frame=2)
        assert [(e.symbol, e.frame) for e in events] == [(0, 1), (0, 1), (0, 2), (0, 2)]

    def test_negative_cap_rejected(self):
        with pytest.raises(InvalidInputError):
            greedy_decode_asr(TableTokenScorer(np.zeros((1, 2))), max_symbols_per_frame=-1)

    def test_causal(self, rng):
        for _ in range(1000):
            T = int(rng.integers(1, 9))
            table = rng.normal(size=(T, 4))
            base = greedy_decode_asr(TableTokenScorer(table))
            t = int(rng.integers(0, T))
            perturbed = table.copy()
            perturbed[t + 1 :] = rng.normal(size=perturbed[t + 1 :].shape)
            events = greedy_decode_asr(TableTokenScorer(perturbed))
            assert [e for e in events if e.frame <= t + 1] == [e for e in base if e.frame <= t + 1]


@pytest.mark.unit
class TestGreedySid:
    """Test the once-only speaker decision."""

    def test_emits_when_label_branch_wins(self):
        blank = [0.9, 0.9, 0.9, 0.9, 0.2, 0.9]
        labels = np.zeros((6, 3))
        labels[4] = [0.0, np.log(18.0), 0.0]  # P(s_2) = 0.9 at frame 5
        result = greedy_decode_sid(TableSpeakerScorer(blank, labels))
        assert result.speakers == [1]
        assert result.t_e == 5
        assert result.emitted

    def test_no_emission(self):
        result = greedy_decode_sid(TableSpeakerScorer([0.99] * 7, np.zeros((7, 4))))
        assert result.events == []
        assert result.t_e == 7
        assert not result.emitted

    def test_single_speaker_inventory(self):
        result = greedy_decode_sid(TableSpeakerScorer([0.8, 0.3, 0.1], np.zeros((3, 1))))
        assert result.speakers == [0]
        assert result.t_e == 2

    def test_emits_at_most_once(self):
        result = greedy_decode_sid(TableSpeakerScorer([0.1] * 5, np.zeros((5, 2))))
        assert len(result.events) == 1
        assert result.t_e == 1


@pytest.mark.unit
class TestLatencyStats:
    """Test emission-latency summaries."""

    def test_single_utterance(self):
        stats = latency_stats([50], [100])
        assert (stats.mean_t_e, stats.mean_t_e_over_T) == (50.0, 0.5)

    def test_all_at_end(self):
        stats = latency_stats([10, 20, 7], [10, 20, 7])
        assert stats.mean_t_e_over_T == 1.0
        assert stats.p90_t_e_over_T == 1.0

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            latency_stats([], [])

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            latency_stats([1, 2], [3])

    def test_non_positive_length(self):
        with pytest.raises(InvalidInputError):
            latency_stats([0], [0])


@pytest.mark.unit
def test_event_log(tmp_path):
    events = [DecodeEvent(EventKind.TOKEN, 3, 1), DecodeEvent(EventKind.SPEAKER, 12, 4)]
    path = tmp_path / "events.jsonl"
    write_events(path, event_records("eval-000001", 2, events))
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert rows == [
        {"utt_id": "eval-000001", "stream": 2, "kind": "token", "symbol": 3, "frame": 1},
        {"utt_id": "eval-000001", "stream": 2, "kind": "speaker", "symbol": 12, "frame": 4},
    ]
