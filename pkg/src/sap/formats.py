"""External data formats and the domain types they carry.

Three formats cross the package boundary:

* CoNLL-U dependency corpora (UD v2 text format, the ID/FORM/HEAD/DEPREL
  columns).
* ``SAPATTN1`` binary attention files: one per sentence, holding the
  layers x heads x tokens x tokens attention tensor in 32-bit floats plus
  a JSON header with the sentence id and word-to-model-token alignment.
* Prune masks as deterministic JSON.

All readers take bytes or a binary file-like object and return validated
immutable values; all writers return bytes. read(write(x)) == x for every
valid value of each format.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentSpanError,
    BadMagicError,
    ConlluParseError,
    FormatError,
    HeaderError,
    MaskFormatError,
    PairMismatchError,
    RowSumError,
    TruncatedPayloadError,
    ValidationError,
)

ATTENTION_MAGIC = b"SAPATTN1"
ROW_SUM_TOLERANCE = 1e-4


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    """One word of a parsed sentence; indices are 1-based."""

    index: int
    surface: str

    def __post_init__(self):
        if self.index < 1:
            raise ValidationError(f"token index must be >= 1, got {self.index}")
        if not self.surface:
            raise ValidationError("token surface must be non-empty")


@dataclass(frozen=True)
class DepArc:
    """A labeled dependency arc; head_index 0 marks the root arc."""

    head_index: int
    dep_index: int
    label: str

    def __post_init__(self):
        if self.head_index < 0 or self.dep_index < 1:
            raise ValidationError(
                f"bad arc indices ({self.head_index} -> {self.dep_index})"
            )
        if self.dep_index == self.head_index:
            raise ValidationError(f"self-loop arc at token {self.dep_index}")
        if not self.label or self.label != self.label.lower():
            raise ValidationError(f"arc label must be non-empty lowercase: {self.label!r}")

    @property
    def is_root(self) -> bool:
        return self.head_index == 0


@dataclass(frozen=True)
class ParsedSentence:
    """Tokens plus labeled dependency arcs for one sentence."""

    sentence_id: str
    tokens: tuple[Token, ...]
    arcs: tuple[DepArc, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        # canonical arc order so equal sentences compare equal
        object.__setattr__(
            self,
            "arcs",
            tuple(sorted(self.arcs, key=lambda a: (a.dep_index, a.head_index, a.label))),
        )
        if not self.tokens:
            raise ValidationError(f"sentence {self.sentence_id!r} has no tokens")
        indices = [t.index for t in self.tokens]
        if indices != list(range(1, len(indices) + 1)):
            raise ValidationError(
                f"sentence {self.sentence_id!r}: token indices must be 1..N contiguous"
            )
        n = len(self.tokens)
        roots = 0
        for arc in self.arcs:
            if arc.dep_index > n or arc.head_index > n:
                raise ValidationError(
                    f"sentence {self.sentence_id!r}: arc "
                    f"({arc.head_index} -> {arc.dep_index}) leaves the sentence"
                )
            if arc.is_root:
                roots += 1
        if roots != 1:
            raise ValidationError(
                f"sentence {self.sentence_id!r}: expected exactly one root arc, got {roots}"
            )

    def __len__(self) -> int:
        return len(self.tokens)

    def non_root_arcs(self) -> tuple[DepArc, ...]:
        """Arcs that have an attention counterpart (root excluded)."""
        return tuple(a for a in self.arcs if not a.is_root)


@dataclass(frozen=True)
class WordAlignment:
    """Half-open model-token spans, one per word, in word order."""

    spans: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(tuple(s) for s in self.spans))
        if not self.spans:
            raise AlignmentSpanError("alignment needs at least one span")
        prev_end = 0
        for i, (start, end) in enumerate(self.spans):
            if start < 0 or end <= start:
                raise AlignmentSpanError(f"span {i} = [{start}, {end}) is empty or negative")
            if start < prev_end:
                raise AlignmentSpanError(f"span {i} overlaps or reorders its predecessor")
            prev_end = end

    def __len__(self) -> int:
        return len(self.spans)

    @property
    def max_end(self) -> int:
        return self.spans[-1][1]

    def span_for(self, word_index: int) -> tuple[int, int]:
        """Span of the 1-based word index; raises if the word has none."""
        if not 1 <= word_index <= len(self.spans):
            raise AlignmentSpanError(f"no alignment span for word {word_index}")
        return self.spans[word_index - 1]


@dataclass(frozen=True, eq=False)
class AttentionRecord:
    """Per-sentence attention tensor with word alignment.

    values has shape (layers, heads, n, n) and dtype float32; rows of
    unmasked heads are softmax rows (sum to 1 within ROW_SUM_TOLERANCE),
    rows of masked heads are exactly zero.
    """

    sentence_id: str
    values: np.ndarray
    alignment: WordAlignment
    masked_heads: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 4:
            raise ValidationError(f"attention tensor must be 4-D, got shape {values.shape}")
        layers, heads, n, n2 = values.shape
        if min(layers, heads, n) < 1 or n != n2:
            raise ValidationError(f"bad attention tensor shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("attention values must be finite")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ValidationError("attention values must lie in [0, 1]")
        masked = frozenset((int(l), int(h)) for l, h in self.masked_heads)
        for l, h in masked:
            if not (0 <= l < layers and 0 <= h < heads):
                raise ValidationError(f"masked head ({l}, {h}) out of range")
        row_sums = values.astype(np.float64).sum(axis=3)
        for l in range(layers):
            for h in range(heads):
                if (l, h) in masked:
                    if np.any(values[l, h] != 0.0):
                        raise ValidationError(
                            f"masked head ({l}, {h}) must carry an all-zero map"
                        )
                elif np.any(np.abs(row_sums[l, h] - 1.0) > ROW_SUM_TOLERANCE):
                    bad = int(np.argmax(np.abs(row_sums[l, h] - 1.0)))
                    raise RowSumError(
                        f"head ({l}, {h}) row {bad} sums to {row_sums[l, h, bad]:.6f}"
                    )
        if self.alignment.max_end > n:
            raise AlignmentSpanError(
                f"alignment spans reach {self.alignment.max_end} but the record has {n} tokens"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masked_heads", masked)

    @property
    def layers(self) -> int:
        return self.values.shape[0]

    @property
    def heads_per_layer(self) -> int:
        return self.values.shape[1]

    @property
    def model_token_count(self) -> int:
        return self.values.shape[2]

    @property
    def word_count(self) -> int:
        return len(self.alignment)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttentionRecord):
            return NotImplemented
        return (
            self.sentence_id == other.sentence_id
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
            and self.alignment == other.alignment
            and self.masked_heads == other.masked_heads
        )


@dataclass(frozen=True)
class PruneMask:
    """Set of pruned (layer, head) pairs plus fully pruned layers."""

    layers: int
    heads_per_layer: int
    pruned_heads: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    pruned_layers: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.layers < 1 or self.heads_per_layer < 1:
            raise ValidationError("mask needs at least one layer and one head")
        heads = frozenset((int(l), int(h)) for l, h in self.pruned_heads)
        layers = frozenset(int(l) for l in self.pruned_layers)
        for l, h in heads:
            if not (0 <= l < self.layers and 0 <= h < self.heads_per_layer):
                raise ValidationError(f"pruned head ({l}, {h}) out of range")
        for l in layers:
            if not 0 <= l < self.layers:
                raise ValidationError(f"pruned layer {l} out of range")
            missing = [h for h in range(self.heads_per_layer) if (l, h) not in heads]
            if missing:
                raise ValidationError(
                    f"layer {l} marked pruned but heads {missing} are not in the mask"
                )
        object.__setattr__(self, "pruned_heads", heads)
        object.__setattr__(self, "pruned_layers", layers)

    @classmethod
    def empty(cls, layers: int, heads_per_layer: int) -> "PruneMask":
        return cls(layers, heads_per_layer)

    def is_pruned(self, layer: int, head: int) -> bool:
        return (layer, head) in self.pruned_heads

    @property
    def sparsity(self) -> float:
        return len(self.pruned_heads) / (self.layers * self.heads_per_layer)

    def with_heads(self, heads) -> "PruneMask":
        """A copy with extra pruned heads (pruned_layers untouched)."""
        return PruneMask(
            self.layers,
            self.heads_per_layer,
            self.pruned_heads | frozenset(heads),
            self.pruned_layers,
        )


def validate_pair(sentence: ParsedSentence, record: AttentionRecord) -> None:
    """Check that a sentence and an attention record describe the same input."""
    if sentence.sentence_id != record.sentence_id:
        raise PairMismatchError(
            f"sentence id {sentence.sentence_id!r} != record id {record.sentence_id!r}"
        )
    if len(sentence) != record.word_count:
        raise PairMismatchError(
            f"sentence {sentence.sentence_id!r} has {len(sentence)} words but the "
            f"record aligns {record.word_count}"
        )


# ---------------------------------------------------------------------------
# CoNLL-U
# ---------------------------------------------------------------------------


def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def read_conllu(source) -> list[ParsedSentence]:
    """Parse CoNLL-U text into sentences.

    Only the ID, FORM, HEAD and DEPREL columns are consumed. Multiword
    token ranges ("3-4") and empty nodes ("5.1") are skipped; DEPREL
    subtypes after ":" are stripped so real UD corpora share one label
    vocabulary with base-label statistics.
    """
    text = _as_text(source)
    sentences: list[ParsedSentence] = []
    rows: list[tuple[int, int, str, int, str]] = []  # (line_no, id, form, head, label)
    sent_id: str | None = None

    def flush(last_line: int):
        nonlocal rows, sent_id
        if not rows:
            sent_id = None
            return
        seen: dict[int, int] = {}
        for line_no, tok_id, _form, _head, _label in rows:
            if tok_id in seen:
                raise ConlluParseError(line_no, f"duplicate token id {tok_id}")
            seen[tok_id] = line_no
        ids = sorted(seen)
        if ids != list(range(1, len(ids) + 1)):
            raise ConlluParseError(
                rows[0][0], f"token ids are not contiguous from 1: {ids}"
            )
        roots = [r for r in rows if r[3] == 0]
        if len(roots) != 1:
            raise ConlluParseError(
                rows[0][0], f"expected exactly one root token, found {len(roots)}"
            )
        for line_no, tok_id, _form, head, _label in rows:
            if head != 0 and head not in seen:
                raise ConlluParseError(line_no, f"head {head} points at no token")
            if head == tok_id:
                raise ConlluParseError(line_no, f"token {tok_id} is its own head")
        name = sent_id if sent_id is not None else f"s{len(sentences) + 1}"
        tokens = tuple(Token(tok_id, form) for _ln, tok_id, form, _h, _l in sorted(rows, key=lambda r: r[1]))
        arcs = tuple(
            DepArc(head, tok_id, label)
            for _ln, tok_id, _form, head, label in sorted(rows, key=lambda r: r[1])
        )
        try:
            sentences.append(ParsedSentence(name, tokens, arcs))
        except ValidationError as exc:  # pragma: no cover - guarded above
            raise ConlluParseError(last_line, str(exc)) from exc
        rows = []
        sent_id = None

    line_no = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush(line_no)
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("sent_id") and "=" in body:
                sent_id = body.split("=", 1)[1].strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluParseError(line_no, f"expected 10 columns, got {len(cols)}")
        raw_id = cols[0]
        if "-" in raw_id or "." in raw_id:
            continue  # multiword range / empty node
        if not raw_id.isdigit():
            raise ConlluParseError(line_no, f"malformed token id {raw_id!r}")
        tok_id = int(raw_id)
        form = cols[1]
        if not form:
            raise ConlluParseError(line_no, "empty FORM column")
        head_text = cols[6]
        try:
            head = int(head_text)
        except ValueError:
            raise ConlluParseError(line_no, f"non-numeric HEAD {head_text!r}") from None
        if head < 0:
            raise ConlluParseError(line_no, f"negative HEAD {head}")
        label = cols[7].split(":", 1)[0].strip().lower()
        if not label:
            raise ConlluParseError(line_no, "empty DEPREL column")
        rows.append((line_no, tok_id, form, head, label))
    flush(line_no + 1)
    return sentences


def write_conllu(sentences) -> bytes:
    """Emit sentences as CoNLL-U.

    Every token must be the dependent of exactly one arc (the tree shape
    CoNLL-U requires); columns this package does not track are written
    as "_".
    """
    out = io.StringIO()
    for sentence in sentences:
        by_dep: dict[int, DepArc] = {}
        for arc in sentence.arcs:
            if arc.dep_index in by_dep:
                raise FormatError(
                    f"sentence {sentence.sentence_id!r}: token {arc.dep_index} "
                    "has two heads; cannot emit CoNLL-U"
                )
            by_dep[arc.dep_index] = arc
        missing = [t.index for t in sentence.tokens if t.index not in by_dep]
        if missing:
            raise FormatError(
                f"sentence {sentence.sentence_id!r}: tokens {missing} have no arc; "
                "cannot emit CoNLL-U"
            )
        out.write(f"# sent_id = {sentence.sentence_id}\n")
        out.write(f"# text = {' '.join(t.surface for t in sentence.tokens)}\n")
        for token in sentence.tokens:
            arc = by_dep[token.index]
            out.write(
                f"{token.index}\t{token.surface}\t_\t_\t_\t_\t{arc.head_index}\t{arc.label}\t_\t_\n"
            )
        out.write("\n")
    return out.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# SAPATTN1 attention files
# ---------------------------------------------------------------------------


def _read_exact(stream, count: int, what: str) -> bytes:
    data = stream.read(count)
    if len(data) != count:
        raise TruncatedPayloadError(
            f"expected {count} bytes for {what}, got {len(data)}"
        )
    return data


def read_attention(source) -> AttentionRecord:
    """Read one SAPATTN1 file into a validated AttentionRecord.

    Layout: magic "SAPATTN1"; little-endian u32 layers, heads, tokens; a
    u32 length-prefixed UTF-8 JSON header (sentence_id, spans, and the
    masked-head list); then layers*heads*tokens*tokens little-endian
    float32 values in [layer][head][query][key] order.
    """
    stream = io.BytesIO(source) if isinstance(source, (bytes, bytearray)) else source
    magic = stream.read(len(ATTENTION_MAGIC))
    if magic != ATTENTION_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    layers, heads, n = struct.unpack("<III", _read_exact(stream, 12, "shape fields"))
    (header_len,) = struct.unpack("<I", _read_exact(stream, 4, "header length"))
    header_bytes = _read_exact(stream, header_len, "JSON header")
    try:
        header = json.loads(header_bytes.decode("utf-8"))
        sentence_id = header["sentence_id"]
        spans = [(int(s), int(e)) for s, e in header["spans"]]
        masked = frozenset((int(l), int(h)) for l, h in header.get("masked_heads", []))
    except (ValueError, KeyError, TypeError) as exc:
        raise HeaderError(f"unusable header: {exc}") from exc
    if not isinstance(sentence_id, str):
        raise HeaderError("sentence_id must be a string")
    count = layers * heads * n * n
    payload = _read_exact(stream, 4 * count, "attention payload")
    if stream.read(1):
        raise FormatError("trailing bytes after attention payload")
    values = (
        np.frombuffer(payload, dtype="<f4", count=count)
        .reshape(layers, heads, n, n)
        .copy()
    )
    return AttentionRecord(sentence_id, values, WordAlignment(spans), masked)


def write_attention(record: AttentionRecord) -> bytes:
    """Serialize an AttentionRecord; exact inverse of read_attention."""
    header = json.dumps(
        {
            "sentence_id": record.sentence_id,
            "spans": [list(s) for s in record.alignment.spans],
            "masked_heads": sorted(list(p) for p in record.masked_heads),
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    out = io.BytesIO()
    out.write(ATTENTION_MAGIC)
    out.write(
        struct.pack(
            "<III", record.layers, record.heads_per_layer, record.model_token_count
        )
    )
    out.write(struct.pack("<I", len(header)))
    out.write(header)
    out.write(record.values.astype("<f4").tobytes(order="C"))
    return out.getvalue()


# ---------------------------------------------------------------------------
# Prune-mask JSON
# ---------------------------------------------------------------------------


def write_mask(mask: PruneMask) -> bytes:
    """Serialize a mask as deterministic JSON (sorted keys, sorted arrays)."""
    doc = {
        "layers": mask.layers,
        "heads_per_layer": mask.heads_per_layer,
        "pruned_heads": sorted([l, h] for l, h in mask.pruned_heads),
        "pruned_layers": sorted(mask.pruned_layers),
    }
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def read_mask(source) -> PruneMask:
    """Parse mask JSON; mask invariants are re-validated on the way in."""
    text = _as_text(source)
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise MaskFormatError(f"mask is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MaskFormatError("mask JSON must be an object")
    try:
        layers = int(doc["layers"])
        heads_per_layer = int(doc["heads_per_layer"])
        pruned_heads = frozenset((int(l), int(h)) for l, h in doc["pruned_heads"])
        pruned_layers = frozenset(int(l) for l in doc["pruned_layers"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MaskFormatError(f"mask JSON is missing or mistyping fields: {exc}") from exc
    return PruneMask(layers, heads_per_layer, pruned_heads, pruned_layers)
