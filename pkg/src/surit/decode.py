"""Streaming greedy decoding with per-emission frame stamps.

Decoders only see a scorer: an object that yields node scores for the
current frame and decoder state, one frame at a time. Frames in emitted
events are 1-based.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Any, Protocol

import numpy as np

from surit.errors import EmptyInputError, InvalidInputError
from surit.lattice import NodeLogits, hat_node_logprobs
from surit.utils.io import write_jsonl

MAX_SYMBOLS_PER_FRAME = 5


class EventKind(StrEnum):
    TOKEN = "token"
    SPEAKER = "speaker"


@dataclass(frozen=True)
class DecodeEvent:
    kind: EventKind
    symbol: int
    frame: int


class TokenScorer(Protocol):
    """Scores for an RNN-T head: index 0 is blank, index v+1 is token v."""

    @property
    def frames(self) -> int: ...

    def start(self) -> Any: ...

    def scores(self, t: int, state: Any) -> np.ndarray: ...

    def advance(self, state: Any, token: int) -> Any: ...


class SpeakerScorer(Protocol):
    """HAT node logits at frame t, before (``emitted=False``) or after the speaker label."""

    @property
    def frames(self) -> int: ...

    def node(self, t: int, emitted: bool) -> NodeLogits: ...


def greedy_decode_asr(scorer: TokenScorer, max_symbols_per_frame: int = MAX_SYMBOLS_PER_FRAME) -> list[DecodeEvent]:
    """Argmax search; blank wins ties and is forced after ``max_symbols_per_frame`` labels."""
    if max_symbols_per_frame < 0:
        raise InvalidInputError("max_symbols_per_frame must be >= 0")
    events: list[DecodeEvent] = []
    state = scorer.start()
    for t in range(scorer.frames):
        for _ in range(max_symbols_per_frame):
            scores = scorer.scores(t, state)
            best = int(np.argmax(scores[1:])) + 1
            if scores[0] >= scores[best]:
                break
            token = best - 1
            events.append(DecodeEvent(kind=EventKind.TOKEN, symbol=token, frame=t + 1))
            state = scorer.advance(state, token)
    return events


@dataclass(frozen=True)
class SpeakerDecode:
    """At most one speaker event; ``t_e`` is its frame, or T when nothing was emitted."""

    events: list[DecodeEvent]
    t_e: int
    frames: int

    @property
    def emitted(self) -> bool:
        return bool(self.events)

    @property
    def speakers(self) -> list[int]:
        return [event.symbol for event in self.events]


def greedy_decode_sid(scorer: SpeakerScorer) -> SpeakerDecode:
    """Emit the best inventory index once (1 - b) * max_k P(k) exceeds b.

    Symbols are inventory positions; after the emission only blank is allowed.
    """
    T = scorer.frames
    for t in range(T):
        log_blank, log_labels = hat_node_logprobs(scorer.node(t, emitted=False))
        best = int(np.argmax(log_labels))
        if log_labels[best] > log_blank:
            event = DecodeEvent(kind=EventKind.SPEAKER, symbol=best, frame=t + 1)
            return SpeakerDecode(events=[event], t_e=t + 1, frames=T)
    return SpeakerDecode(events=[], t_e=T, frames=T)


@dataclass(frozen=True)
class LatencyStats:
    n: int
    mean_t_e: float
    mean_t_e_over_T: float
    p50_t_e: float
    p90_t_e: float
    p50_t_e_over_T: float
    p90_t_e_over_T: float


def latency_stats(t_e: Sequence[float], lengths: Sequence[int]) -> LatencyStats:
    """Means and quantiles of first-stream emission frames and their ratio to T."""
    if len(t_e) == 0:
        raise EmptyInputError("no utterances to summarise")
    if len(t_e) != len(lengths):
        raise InvalidInputError(f"{len(t_e)} emission frames for {len(lengths)} lengths")
    frames = np.asarray(t_e, dtype=np.float64)
    T = np.asarray(lengths, dtype=np.float64)
    if np.any(T <= 0):
        raise InvalidInputError("utterance lengths must be positive")
    ratio = frames / T
    return LatencyStats(
        n=len(frames),
        mean_t_e=float(frames.mean()),
        mean_t_e_over_T=float(ratio.mean()),
        p50_t_e=float(np.percentile(frames, 50)),
        p90_t_e=float(np.percentile(frames, 90)),
        p50_t_e_over_T=float(np.percentile(ratio, 50)),
        p90_t_e_over_T=float(np.percentile(ratio, 90)),
    )


def event_records(utt_id: str, stream: int, events: Iterable[DecodeEvent]) -> list[dict[str, Any]]:
    return [
        {"utt_id": utt_id, "stream": stream, "kind": event.kind.value, "symbol": event.symbol, "frame": event.frame}
        for event in events
    ]


def write_events(path: Path, records: Iterable[dict[str, Any]]) -> None:
    """One JSON object per line: utt_id, stream, kind, symbol, frame."""
    write_jsonl(path, records)
