"""Edit distance, two-stream permutation WER, speaker error rate and the evaluation report."""

import io
from collections.abc import Hashable, Sequence
from dataclasses import dataclass

import pandas as pd
from pydantic import BaseModel, Field

from surit.errors import EmptyInputError, InvalidInputError

SUMMARY_COLUMNS = ["system", "wer", "ser", "t_e", "t_e_over_T"]


def edit_distance(hyp: Sequence[Hashable], ref: Sequence[Hashable]) -> int:
    """Levenshtein distance with unit insert, delete and substitute costs."""
    if len(hyp) > len(ref):
        hyp, ref = ref, hyp
    row = list(range(len(hyp) + 1))
    for i, r in enumerate(ref):
        current = [i + 1]
        for j, h in enumerate(hyp):
            if h == r:
                current.append(row[j])
            else:
                current.append(1 + min(row[j], row[j + 1], current[-1]))
        row = current
    return row[-1]


@dataclass(frozen=True)
class WerCount:
    """Errors under the better assignment, plus the fixed (stream i -> reference i) count."""

    errors: int
    ref_words: int
    swapped: bool
    fixed_errors: int


def _two(streams: Sequence[Sequence[Hashable]], what: str) -> None:
    if len(streams) != 2:
        raise InvalidInputError(f"expected 2 {what}, got {len(streams)}")


def permutation_wer(hyps: Sequence[Sequence[Hashable]], refs: Sequence[Sequence[Hashable]]) -> WerCount:
    _two(hyps, "hypothesis streams")
    _two(refs, "reference streams")
    fixed = edit_distance(hyps[0], refs[0]) + edit_distance(hyps[1], refs[1])
    crossed = edit_distance(hyps[0], refs[1]) + edit_distance(hyps[1], refs[0])
    return WerCount(
        errors=min(fixed, crossed),
        ref_words=len(refs[0]) + len(refs[1]),
        swapped=crossed < fixed,
        fixed_errors=fixed,
    )


def corpus_wer(counts: Sequence[WerCount], *, fixed_order: bool = False) -> float:
    """Sum of errors over sum of reference words."""
    if not counts:
        raise EmptyInputError("no utterances to score")
    words = sum(c.ref_words for c in counts)
    if words == 0:
        raise EmptyInputError("references contain no words")
    errors = sum(c.fixed_errors if fixed_order else c.errors for c in counts)
    return errors / words


def speaker_errors(q1: Sequence[int], q2: Sequence[int], s1: Sequence[int], s2: Sequence[int]) -> int:
    """min(E(Q1,S1) + E(Q2,S2), E(Q2,S1) + E(Q1,S2)) for one utterance."""
    return min(
        edit_distance(q1, s1) + edit_distance(q2, s2),
        edit_distance(q2, s1) + edit_distance(q1, s2),
    )


def ser(
    Q1: Sequence[Sequence[int]],
    Q2: Sequence[Sequence[int]],
    S1: Sequence[Sequence[int]],
    S2: Sequence[Sequence[int]],
) -> float:
    """Speaker error rate over N utterances, normalised by 2N."""
    n = len(Q1)
    if n == 0:
        raise EmptyInputError("SER needs at least one utterance")
    if not len(Q2) == len(S1) == len(S2) == n:
        raise InvalidInputError("speaker hypothesis and reference lists differ in length")
    total = sum(speaker_errors(q1, q2, s1, s2) for q1, q2, s1, s2 in zip(Q1, Q2, S1, S2, strict=True))
    return total / (2 * n)


class UtteranceRecord(BaseModel):
    """Per-utterance scoring detail."""

    utt_id: str
    swapped: bool
    word_errors: int = Field(..., ge=0)
    fixed_word_errors: int = Field(..., ge=0)
    ref_words: int = Field(..., ge=0)
    speakers: tuple[list[int], list[int]]
    speaker_errors: int = Field(..., ge=0)
    t_e: int = Field(..., ge=0)
    frames: int = Field(..., ge=1)
    emitted: tuple[bool, bool]


class LatencySummary(BaseModel):
    mean_t_e: float
    mean_t_e_over_T: float
    p50_t_e: float
    p90_t_e: float
    p50_t_e_over_T: float
    p90_t_e_over_T: float
    emission_rate: tuple[float, float]


class EvalReport(BaseModel):
    system: str
    n_utterances: int = Field(..., ge=1)
    wer: float = Field(..., ge=0.0)
    wer_fixed_order: float = Field(..., ge=0.0)
    ser: float = Field(..., ge=0.0)
    latency: LatencySummary
    utterances: list[UtteranceRecord]

    def summary_row(self) -> dict[str, float | str]:
        return {
            "system": self.system,
            "wer": self.wer,
            "ser": self.ser,
            "t_e": self.latency.mean_t_e,
            "t_e_over_T": self.latency.mean_t_e_over_T,
        }


def summary_csv(reports: Sequence[EvalReport]) -> str:
    """Corpus summary, one row per system."""
    frame = pd.DataFrame([report.summary_row() for report in reports], columns=SUMMARY_COLUMNS)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False)
    return buffer.getvalue()
