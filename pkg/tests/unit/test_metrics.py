"""Unit tests for WER, SER and the summary report."""

import io

import numpy as np
import pandas as pd
import pytest

from surit.errors import EmptyInputError, InvalidInputError
from surit.metrics import (
    SUMMARY_COLUMNS,
    EvalReport,
    LatencySummary,
    corpus_wer,
    edit_distance,
    permutation_wer,
    ser,
    speaker_errors,
    summary_csv,
)


def _reference_distance(a, b):
    table = np.zeros((len(a) + 1, len(b) + 1), dtype=int)
    table[:, 0] = np.arange(len(a) + 1)
    table[0, :] = np.arange(len(b) + 1)
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            table[i, j] = min(
                table[i - 1, j] + 1,
                table[i, j - 1] + 1,
                table[i - 1, j - 1] + (a[i - 1] != b[j - 1]),
            )
    return int(table[-1, -1])


@pytest.mark.unit
class TestEditDistance:
    """Test Levenshtein distance."""

    @pytest.mark.parametrize(
        "hyp,ref,expected",
        [
            ("", "", 0),
            ("abc", "abc", 0),
            ("", "abc", 3),
            ("abc", "", 3),
            ("kitten", "sitting", 3),
            ("ab", "ba", 2),
        ],
    )
    def test_examples(self, hyp, ref, expected):
        assert edit_distance(list(hyp), list(ref)) == expected

    def test_matches_full_table(self, rng):
        for _ in range(200):
            a = rng.integers(0, 3, size=rng.integers(0, 8)).tolist()
            b = rng.integers(0, 3, size=rng.integers(0, 8)).tolist()
            assert edit_distance(a, b) == _reference_distance(a, b)
            assert edit_distance(a, b) == edit_distance(b, a)


@pytest.mark.unit
class TestPermutationWer:
    """Test the two-stream assignment."""

    def test_swapped_streams_score_zero(self):
        count = permutation_wer([["c"], ["a", "b"]], [["a", "b"], ["c"]])
        assert count.errors == 0
        assert count.swapped
        assert count.fixed_errors == 4
        assert count.ref_words == 3

    def test_never_worse_than_fixed_order(self, rng):
        for _ in range(100):
            streams = [rng.integers(0, 4, size=rng.integers(0, 6)).tolist() for _ in range(4)]
            count = permutation_wer(streams[:2], streams[2:])
            assert count.errors <= count.fixed_errors

    def test_wrong_stream_count(self):
        with pytest.raises(InvalidInputError):
            permutation_wer([["a"]], [["a"], ["b"]])

    def test_corpus_rate(self):
        counts = [
            permutation_wer([["c"], ["a", "b"]], [["a", "b"], ["c"]]),
            permutation_wer([["a"], []], [["a", "x"], []]),
        ]
        assert corpus_wer(counts) == pytest.approx(1 / 5)
        assert corpus_wer(counts, fixed_order=True) == pytest.approx(5 / 5)

    def test_corpus_rate_needs_words(self):
        with pytest.raises(EmptyInputError):
            corpus_wer([])
        with pytest.raises(EmptyInputError):
            corpus_wer([permutation_wer([[], []], [[], []])])


@pytest.mark.unit
class TestSer:
    """Test the speaker error rate."""

    def test_swap_is_free(self):
        assert ser([[2]], [[1]], [[1]], [[2]]) == 0.0

    def test_one_wrong_speaker(self):
        assert ser([[1]], [[3]], [[1]], [[2]]) == 0.5

    def test_missing_decision(self):
        assert ser([[1]], [[]], [[1]], [[2]]) == 0.5

    def test_averages_over_two_n(self):
        assert ser([[1], [5]], [[2], [6]], [[1], [5]], [[2], [7]]) == pytest.approx(1 / 4)

    def test_per_utterance_errors(self):
        assert speaker_errors([4], [4], [1], [2]) == 2

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            ser([], [], [], [])

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            ser([[1]], [[2]], [[1], [1]], [[2]])


@pytest.mark.unit
def test_summary_csv():
    latency = LatencySummary(
        mean_t_e=12.0,
        mean_t_e_over_T=0.4,
        p50_t_e=11.0,
        p90_t_e=20.0,
        p50_t_e_over_T=0.35,
        p90_t_e_over_T=0.7,
        emission_rate=(1.0, 0.5),
    )
    reports = [
        EvalReport(system=name, n_utterances=2, wer=0.25, wer_fixed_order=0.5, ser=0.125, latency=latency, utterances=[])
        for name in ("surit", "baseline")
    ]
    frame = pd.read_csv(io.StringIO(summary_csv(reports)))
    assert list(frame.columns) == SUMMARY_COLUMNS
    assert frame["system"].tolist() == ["surit", "baseline"]
    assert frame.loc[0, "t_e_over_T"] == pytest.approx(0.4)
