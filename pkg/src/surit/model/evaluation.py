"""Decode held-out mixtures and score them."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from surit.config import ExperimentConfig
from surit.data.synth import MixtureSample
from surit.decode import (
    DecodeEvent,
    SpeakerDecode,
    event_records,
    greedy_decode_asr,
    greedy_decode_sid,
    latency_stats,
)
from surit.errors import EmptyInputError, InvalidInputError
from surit.logging_config import eval_logger
from surit.metrics import (
    EvalReport,
    LatencySummary,
    UtteranceRecord,
    corpus_wer,
    permutation_wer,
    ser,
    speaker_errors,
)
from surit.model.losses import sample_inputs
from surit.model.network import unmix
from surit.model.scorers import AsrStreamScorer, SidStreamScorer
from surit.neural.params import ModelParams


@dataclass(frozen=True)
class UtteranceDecode:
    utt_id: str
    tokens: tuple[list[DecodeEvent], list[DecodeEvent]]
    speakers: tuple[SpeakerDecode, SpeakerDecode]


def decode_sample(params: ModelParams, config: ExperimentConfig, sample: MixtureSample) -> UtteranceDecode:
    """Greedy ASR and SID decoding of both unmixed streams."""
    if sample.inventory is None:
        raise InvalidInputError(f"sample {sample.utt_id} carries no speaker inventory")
    X, _ = sample_inputs(sample, config.model.splice_context)
    streams = unmix(params, X)
    tokens = tuple(greedy_decode_asr(AsrStreamScorer(params, H)) for H in (streams.H1, streams.H2))
    speakers = tuple(
        greedy_decode_sid(SidStreamScorer(params, H, sample.inventory)) for H in (streams.H1, streams.H2)
    )
    return UtteranceDecode(utt_id=sample.utt_id, tokens=tokens, speakers=speakers)


def decode_records(decoded: UtteranceDecode, sample: MixtureSample) -> list[dict]:
    """Event rows for the JSON-lines log; speaker symbols are mapped to speaker ids."""
    rows = []
    for stream in (0, 1):
        rows += event_records(decoded.utt_id, stream + 1, decoded.tokens[stream])
        speaker_events = [
            DecodeEvent(kind=e.kind, symbol=sample.inventory.labels[e.symbol], frame=e.frame)
            for e in decoded.speakers[stream].events
        ]
        rows += event_records(decoded.utt_id, stream + 1, speaker_events)
    return rows


def evaluate(
    params: ModelParams,
    config: ExperimentConfig,
    samples: Sequence[MixtureSample],
    system: str = "surit",
    events: list[dict] | None = None,
) -> EvalReport:
    """Permutation WER, SER and first-stream emission latency over ``samples``.

    When ``events`` is given, every decode event is appended to it.
    """
    if not samples:
        raise EmptyInputError("evaluation set is empty")

    counts, records = [], []
    Q1, Q2, S1, S2 = [], [], [], []
    t_e, lengths = [], []
    emitted = np.zeros(2)
    for sample in samples:
        decoded = decode_sample(params, config, sample)
        hyps = [[e.symbol for e in stream] for stream in decoded.tokens]
        count = permutation_wer(hyps, [sample.Y1, sample.Y2])
        counts.append(count)

        labels = sample.inventory.labels
        q1, q2 = ([labels[k] for k in d.speakers] for d in decoded.speakers)
        Q1.append(q1)
        Q2.append(q2)
        S1.append([sample.S1])
        S2.append([sample.S2])
        emitted += [d.emitted for d in decoded.speakers]

        first = decoded.speakers[0]
        t_e.append(first.t_e)
        lengths.append(first.frames)
        records.append(
            UtteranceRecord(
                utt_id=sample.utt_id,
                swapped=count.swapped,
                word_errors=count.errors,
                fixed_word_errors=count.fixed_errors,
                ref_words=count.ref_words,
                speakers=(q1, q2),
                speaker_errors=speaker_errors(q1, q2, [sample.S1], [sample.S2]),
                t_e=first.t_e,
                frames=first.frames,
                emitted=(decoded.speakers[0].emitted, decoded.speakers[1].emitted),
            )
        )
        if events is not None:
            events.extend(decode_records(decoded, sample))

    stats = latency_stats(t_e, lengths)
    report = EvalReport(
        system=system,
        n_utterances=len(samples),
        wer=corpus_wer(counts),
        wer_fixed_order=corpus_wer(counts, fixed_order=True),
        ser=ser(Q1, Q2, S1, S2),
        latency=LatencySummary(
            mean_t_e=stats.mean_t_e,
            mean_t_e_over_T=stats.mean_t_e_over_T,
            p50_t_e=stats.p50_t_e,
            p90_t_e=stats.p90_t_e,
            p50_t_e_over_T=stats.p50_t_e_over_T,
            p90_t_e_over_T=stats.p90_t_e_over_T,
            emission_rate=tuple(float(x) for x in emitted / len(samples)),
        ),
        utterances=records,
    )
    eval_logger.info(
        "Evaluation finished",
        system=system,
        n=report.n_utterances,
        wer=round(report.wer, 4),
        ser=round(report.ser, 4),
        t_e_over_T=round(report.latency.mean_t_e_over_T, 4),
    )
    return report
