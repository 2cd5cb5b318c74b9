"""Attention thresholding and per-head violation counters.

A head accumulates weighted "violations": low attention on a top-k
dependency arc, or high attention on a non-top-k arc. Heads with large
counters attend least to the syntax that matters and become prune
candidates.

Attention is reduced from model tokens to words before any comparison:
the word-level value is the mean over the query word's rows of the sum
over the key word's columns, which keeps word-level rows stochastic. All
accumulation is exact: counters are integers and floating-point sums go
through math.fsum, so results do not depend on iteration schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .depstats import DepRanking, total_weighted_occurrences
from .errors import (
    DegenerateCorpusError,
    ShapeMismatchError,
    ValidationError,
)
from .formats import AttentionRecord, DepArc, ParsedSentence, validate_pair

DIRECTIONS = ("dep2head", "head2dep", "max")

Corpus = list[tuple[ParsedSentence, AttentionRecord]]


@dataclass(frozen=True, eq=False)
class HeadScoreTable:
    """Exact per-head violation counters plus the corpus constants.

    counts has shape (layers, heads) and dtype int64; total_weight is S,
    the weight-sum over all scored arcs, and threshold is the global
    attention threshold the counters were computed against.
    """

    counts: np.ndarray
    total_weight: int
    threshold: float

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or min(counts.shape) < 1:
            raise ValidationError(f"counts must be a 2-D table, got shape {counts.shape}")
        if np.any(counts < 0) or np.any(counts > self.total_weight):
            raise ValidationError("counters must satisfy 0 <= cnt <= total weight")
        if not math.isfinite(self.threshold) or not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold {self.threshold} outside [0, 1]")
        object.__setattr__(self, "counts", counts)

    @property
    def layers(self) -> int:
        return self.counts.shape[0]

    @property
    def heads_per_layer(self) -> int:
        return self.counts.shape[1]

    def count_of(self, layer: int, head: int) -> int:
        return int(self.counts[layer, head])

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeadScoreTable):
            return NotImplemented
        return (
            np.array_equal(self.counts, other.counts)
            and self.total_weight == other.total_weight
            and self.threshold == other.threshold
        )

    def to_json_dict(self) -> dict:
        return {
            "layers": self.layers,
            "heads_per_layer": self.heads_per_layer,
            "total_weight": self.total_weight,
            "threshold": self.threshold,
            "counts": [int(c) for c in self.counts.reshape(-1)],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "HeadScoreTable":
        layers = int(doc["layers"])
        heads = int(doc["heads_per_layer"])
        counts = np.asarray(doc["counts"], dtype=np.int64).reshape(layers, heads)
        return cls(counts, int(doc["total_weight"]), float(doc["threshold"]))


@dataclass(frozen=True, eq=False)
class ArcAttention:
    """Word-level attention for one arc across every head (layers x heads)."""

    arc: DepArc
    values: np.ndarray

    def value_at(self, layer: int, head: int) -> float:
        return float(self.values[layer, head])


def word_attention(
    record: AttentionRecord, layer: int, head: int, query_word: int, key_word: int
) -> float:
    """Word-level attention from query_word to key_word (1-based words).

    Mean over the query word's model-token rows of the summed key-word
    columns. Sums are exact (math.fsum), so any faithful implementation
    of this definition produces bit-identical values.
    """
    if not (0 <= layer < record.layers and 0 <= head < record.heads_per_layer):
        raise ShapeMismatchError(
            f"head ({layer}, {head}) outside a {record.layers}x{record.heads_per_layer} model"
        )
    qs, qe = record.alignment.span_for(query_word)
    ks, ke = record.alignment.span_for(key_word)
    block = record.values[layer, head, qs:qe, ks:ke]
    row_sums = [math.fsum(float(v) for v in row) for row in block]
    value = math.fsum(row_sums) / len(row_sums)
    if value > 1.0 + 1e-6:
        raise ValidationError(
            f"word-level attention {value} exceeds 1; record rows are not stochastic"
        )
    return value


def arc_attention(
    record: AttentionRecord,
    layer: int,
    head: int,
    arc: DepArc,
    direction: str = "max",
) -> float:
    """Word-level attention of one head for one dependency arc."""
    if arc.is_root:
        raise ValidationError("root arcs have no attention counterpart")
    if direction not in DIRECTIONS:
        raise ValidationError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if direction == "dep2head":
        return word_attention(record, layer, head, arc.dep_index, arc.head_index)
    if direction == "head2dep":
        return word_attention(record, layer, head, arc.head_index, arc.dep_index)
    return max(
        word_attention(record, layer, head, arc.dep_index, arc.head_index),
        word_attention(record, layer, head, arc.head_index, arc.dep_index),
    )


def arc_attention_table(
    record: AttentionRecord, arc: DepArc, direction: str = "max"
) -> ArcAttention:
    """arc_attention evaluated for every head of the record."""
    values = np.zeros((record.layers, record.heads_per_layer), dtype=np.float64)
    for layer in range(record.layers):
        for head in range(record.heads_per_layer):
            if (layer, head) in record.masked_heads:
                continue
            values[layer, head] = arc_attention(record, layer, head, arc, direction)
    return ArcAttention(arc, values)


def _check_corpus(corpus: Corpus) -> tuple[int, int]:
    if not corpus:
        raise DegenerateCorpusError("empty corpus")
    layers = corpus[0][1].layers
    heads = corpus[0][1].heads_per_layer
    for sentence, record in corpus:
        validate_pair(sentence, record)
        if record.layers != layers or record.heads_per_layer != heads:
            raise ShapeMismatchError(
                f"record {record.sentence_id!r} is "
                f"{record.layers}x{record.heads_per_layer}, expected {layers}x{heads}"
            )
    return layers, heads


def compute_threshold(corpus: Corpus) -> float:
    """Global attention threshold: the mean word-level attention value.

    Averages every off-diagonal ordered word pair of every unmasked head
    across the corpus. Masked heads carry no attention and diagonal
    (self) pairs have no dependency counterpart, so both are excluded.
    Iteration runs in sentence-id order, then layer, head, query word,
    key word; the fsum accumulation makes the result independent of that
    order anyway.
    """
    _check_corpus(corpus)
    ordered = sorted(corpus, key=lambda pair: pair[1].sentence_id)
    pair_count = 0
    for _sentence, record in ordered:
        words = record.word_count
        unmasked = record.layers * record.heads_per_layer - len(record.masked_heads)
        pair_count += unmasked * words * (words - 1)
    if pair_count == 0:
        raise DegenerateCorpusError("corpus has no word pairs to average")

    def values():
        for _sentence, record in ordered:
            words = record.word_count
            for layer in range(record.layers):
                for head in range(record.heads_per_layer):
                    if (layer, head) in record.masked_heads:
                        continue
                    for qw in range(1, words + 1):
                        for kw in range(1, words + 1):
                            if qw != kw:
                                yield word_attention(record, layer, head, qw, kw)

    return math.fsum(values()) / pair_count


def score_heads(
    corpus: Corpus,
    ranking: DepRanking,
    threshold: float,
    direction: str = "max",
) -> HeadScoreTable:
    """Accumulate weighted violation counters for every head.

    For each non-root arc and each unmasked head: a top-k arc whose
    attention falls strictly below the threshold, or a non-top-k arc
    strictly above it, adds the arc label's weight to that head's
    counter. Values equal to the threshold contribute nothing.
    """
    layers, heads = _check_corpus(corpus)
    if direction not in DIRECTIONS:
        raise ValidationError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    counts = np.zeros((layers, heads), dtype=np.int64)
    total = total_weighted_occurrences([s for s, _r in corpus], ranking)
    for sentence, record in corpus:
        for arc in sentence.non_root_arcs():
            weight = ranking.scoring_weight(arc.label)
            important = ranking.is_top_k(arc.label)
            for layer in range(layers):
                for head in range(heads):
                    if (layer, head) in record.masked_heads:
                        continue
                    value = arc_attention(record, layer, head, arc, direction)
                    if important:
                        if value < threshold:
                            counts[layer, head] += weight
                    elif value > threshold:
                        counts[layer, head] += weight
    return HeadScoreTable(counts, total, threshold)


def iter_arc_attention_rows(corpus: Corpus, direction: str = "max"):
    """Per-arc, per-head attention rows for external plotting (JSON-able)."""
    _check_corpus(corpus)
    for sentence, record in sorted(corpus, key=lambda pair: pair[1].sentence_id):
        for arc in sentence.non_root_arcs():
            table = arc_attention_table(record, arc, direction)
            for layer in range(record.layers):
                for head in range(record.heads_per_layer):
                    if (layer, head) in record.masked_heads:
                        continue
                    yield {
                        "sentence_id": sentence.sentence_id,
                        "head_index": arc.head_index,
                        "dep_index": arc.dep_index,
                        "label": arc.label,
                        "layer": layer,
                        "head": head,
                        "value": table.value_at(layer, head),
                    }
