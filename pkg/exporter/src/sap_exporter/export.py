"""The export job: dataset in, SAPATTN1 files + CoNLL-U corpus out.

Sentences that cannot be exported faithfully (too long, un-alignable
tokenization, degenerate parses) are dropped and logged, never clipped:
|exported| + |skipped| always equals the number of input sentences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .align import word_spans
from .errors import AlignmentFailure, BackendUnavailable, SentenceSkipped
from .records import attention_bytes, conllu_block, validate_tree


@dataclass(frozen=True)
class ExportJob:
    model: str
    dataset: str
    split: str = "train"
    out_dir: str = "export"
    max_sentences: int | None = None
    max_seq_len: int = 128

    def __post_init__(self):
        if self.max_seq_len < 3:
            raise ValueError("max_seq_len must leave room for special tokens")
        if self.max_sentences is not None and self.max_sentences < 1:
            raise ValueError("max_sentences must be positive")


@dataclass
class Manifest:
    exported: list[dict] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    def to_json_dict(self, job: ExportJob) -> dict:
        return {
            "model": job.model,
            "dataset": job.dataset,
            "split": job.split,
            "max_seq_len": job.max_seq_len,
            "exported": self.exported,
            "skipped": self.skipped,
        }


def load_sentences(dataset: str, split: str, limit: int | None) -> list[str]:
    """Sentences from a text file (one per line) or a datasets identifier."""
    path = Path(dataset)
    if path.exists():
        lines = [
            line.strip()
            for line in path.read_text(encoding="utf-8").splitlines()
        ]
        sentences = [line for line in lines if line]
    else:
        try:
            from datasets import load_dataset
        except ImportError as exc:
            raise BackendUnavailable(
                f"{dataset!r} is not a file and the datasets package is not "
                "installed (install sap-exporter[datasets])"
            ) from exc
        data = load_dataset(dataset, split=split)
        column = next(
            (c for c in ("sentence", "text") if c in data.column_names), None
        )
        if column is None:
            raise BackendUnavailable(
                f"dataset {dataset!r} has no sentence/text column"
            )
        sentences = [str(row[column]).strip() for row in data]
        sentences = [s for s in sentences if s]
    if limit is not None:
        sentences = sentences[:limit]
    return sentences


def export(job: ExportJob, parser=None, encoder=None) -> Manifest:
    """Run the dataset through parser and encoder; write all artifacts.

    parser: callable text -> list[ParsedWord]; defaults to SpacyParser.
    encoder: callable text -> EncodedSentence; defaults to a
    HuggingFaceEncoder over job.model.
    """
    if parser is None:
        from .parsing import SpacyParser

        parser = SpacyParser()
    if encoder is None:
        from .encoding import HuggingFaceEncoder

        encoder = HuggingFaceEncoder(job.model, job.model)
    sentences = load_sentences(job.dataset, job.split, job.max_sentences)
    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = Manifest()
    blocks: list[str] = []
    for index, text in enumerate(sentences, start=1):
        sentence_id = f"s{index:05d}"
        try:
            record = _export_one(sentence_id, text, parser, encoder, job)
        except SentenceSkipped as skip:
            manifest.skipped.append({"id": sentence_id, "reason": skip.reason})
            continue
        (out_dir / f"{sentence_id}.attn").write_bytes(record["bytes"])
        blocks.append(record["conllu"])
        manifest.exported.append(
            {
                "id": sentence_id,
                "attention_file": f"{sentence_id}.attn",
                "words": record["words"],
                "model_tokens": record["model_tokens"],
            }
        )
    (out_dir / "corpus.conllu").write_text("".join(blocks), encoding="utf-8")
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest.to_json_dict(job), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return manifest


def _export_one(sentence_id, text, parser, encoder, job):
    try:
        words = parser(text)
    except SentenceSkipped:
        raise
    except Exception as exc:
        raise SentenceSkipped("parser-error", str(exc)) from exc
    validate_tree(words)
    try:
        encoded = encoder(text)
    except Exception as exc:
        raise SentenceSkipped("encoder-error", str(exc)) from exc
    if encoded.token_count > job.max_seq_len:
        raise SentenceSkipped(
            "too-long", f"{encoded.token_count} > {job.max_seq_len} model tokens"
        )
    try:
        spans = word_spans(
            [(w.start, w.end) for w in words], encoded.offsets, encoded.special
        )
    except AlignmentFailure as exc:
        raise SentenceSkipped("unalignable", str(exc)) from exc
    return {
        "bytes": attention_bytes(sentence_id, encoded.values, spans),
        "conllu": conllu_block(sentence_id, text, words),
        "words": len(words),
        "model_tokens": encoded.token_count,
    }
