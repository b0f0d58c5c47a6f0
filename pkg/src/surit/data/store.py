"""Dataset persistence.

Layout of a dataset directory:
    corpus.json             templates, speaker profiles and voice offsets
    <split>.jsonl           one ManifestRecord per mixture
    <split>.f64             raw little-endian float64 feature blocks
"""

import json
from pathlib import Path

import numpy as np

from surit.data.schemas import CorpusRecord, ManifestRecord, SpeakerRecord
from surit.data.synth import EVAL, TRAIN, MixtureSample, SyntheticCorpus, SyntheticDataset, SyntheticSpeaker
from surit.errors import InvalidInputError, MissingFileError
from surit.inventory import SpeakerInventory
from surit.utils.io import atomic_write_bytes, atomic_write_text, read_jsonl, write_jsonl


def _corpus_record(corpus: SyntheticCorpus) -> CorpusRecord:
    return CorpusRecord(
        seed=corpus.seed,
        data=corpus.data,
        templates=corpus.templates.tolist(),
        speakers=[
            SpeakerRecord(id=s.id, profile=s.profile.tolist(), voice_offset=s.voice_offset.tolist())
            for s in corpus.speakers
        ],
    )


def save_dataset(dataset: SyntheticDataset, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "corpus.json", _corpus_record(dataset.corpus).model_dump_json(indent=1) + "\n")
    for split, samples in ((TRAIN, dataset.train), (EVAL, dataset.eval)):
        records = []
        blocks = []
        offset = 0
        for sample in samples:
            block = np.ascontiguousarray(sample.X, dtype="<f8").tobytes()
            records.append(
                ManifestRecord(
                    utt_id=sample.utt_id,
                    S1=sample.S1,
                    S2=sample.S2,
                    delay=sample.delay,
                    K=sample.inventory.size,
                    Y1=list(sample.Y1),
                    Y2=list(sample.Y2),
                    inventory=list(sample.inventory.labels),
                    frames=sample.T,
                    offset=offset,
                ).model_dump()
            )
            blocks.append(block)
            offset += len(block)
        atomic_write_bytes(out_dir / f"{split}.f64", b"".join(blocks))
        write_jsonl(out_dir / f"{split}.jsonl", records)


def load_corpus(data_dir: Path) -> SyntheticCorpus:
    path = data_dir / "corpus.json"
    if not path.exists():
        raise MissingFileError(f"no corpus.json in {data_dir}")
    record = CorpusRecord.model_validate(json.loads(path.read_text(encoding="utf-8")))
    speakers = [
        SyntheticSpeaker(id=s.id, profile=np.array(s.profile), voice_offset=np.array(s.voice_offset))
        for s in record.speakers
    ]
    return SyntheticCorpus(
        seed=record.seed, data=record.data, templates=np.array(record.templates), speakers=speakers
    )


def load_split(data_dir: Path, split: str, corpus: SyntheticCorpus) -> list[MixtureSample]:
    manifest = data_dir / f"{split}.jsonl"
    blob_path = data_dir / f"{split}.f64"
    if not manifest.exists() or not blob_path.exists():
        raise MissingFileError(f"split {split!r} is missing from {data_dir}")
    blob = blob_path.read_bytes()
    d = corpus.data.feat_dim
    samples = []
    for raw in read_jsonl(manifest):
        record = ManifestRecord.model_validate(raw)
        count = record.frames * d
        if record.offset + 8 * count > len(blob):
            raise InvalidInputError(f"feature block of {record.utt_id} runs past the end of {blob_path}")
        X = np.frombuffer(blob, dtype="<f8", count=count, offset=record.offset).astype(np.float64)
        profiles = np.stack([corpus.speaker(label).profile for label in record.inventory])
        samples.append(
            MixtureSample(
                utt_id=record.utt_id,
                X=X.reshape(record.frames, d),
                Y1=tuple(record.Y1),
                Y2=tuple(record.Y2),
                S1=record.S1,
                S2=record.S2,
                delay=record.delay,
                inventory=SpeakerInventory(labels=tuple(record.inventory), embeddings=profiles),
            )
        )
    return samples


def load_dataset(data_dir: Path) -> SyntheticDataset:
    if not data_dir.is_dir():
        raise MissingFileError(f"dataset directory not found: {data_dir}")
    corpus = load_corpus(data_dir)
    return SyntheticDataset(
        corpus=corpus,
        train=load_split(data_dir, TRAIN, corpus),
        eval=load_split(data_dir, EVAL, corpus),
    )
