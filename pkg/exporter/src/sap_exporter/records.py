"""Emitters for the interchange formats, with pre-write validation.

These implement the wire contracts directly (SAPATTN1 binary layout and
the CoNLL-U column subset) so the exporter stays decoupled from the
consumer package; the exporter's test suite round-trips every emitted
file through the consumer's readers.
"""

from __future__ import annotations

import io
import json
import struct

import numpy as np

from .errors import SentenceSkipped
from .parsing import ParsedWord

ATTENTION_MAGIC = b"SAPATTN1"
ROW_SUM_TOLERANCE = 1e-4


def validate_attention(values: np.ndarray, spans) -> None:
    """The checks the consumer will make, applied before writing."""
    if values.ndim != 4 or values.shape[2] != values.shape[3]:
        raise SentenceSkipped("bad-tensor", f"shape {values.shape}")
    if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
        raise SentenceSkipped("bad-tensor", "values outside [0, 1]")
    sums = values.astype(np.float64).sum(axis=3)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE):
        raise SentenceSkipped("bad-tensor", "attention rows are not stochastic")
    n = values.shape[2]
    previous_end = 0
    for start, end in spans:
        if not (0 <= start < end <= n) or start < previous_end:
            raise SentenceSkipped("bad-span", f"[{start}, {end}) with n={n}")
        previous_end = end


def attention_bytes(sentence_id: str, values: np.ndarray, spans) -> bytes:
    """One SAPATTN1 file: magic, u32 shape triple, JSON header, floats."""
    values = np.ascontiguousarray(values, dtype="<f4")
    validate_attention(values, spans)
    layers, heads, n, _ = values.shape
    header = json.dumps(
        {
            "masked_heads": [],
            "sentence_id": sentence_id,
            "spans": [[int(s), int(e)] for s, e in spans],
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    out = io.BytesIO()
    out.write(ATTENTION_MAGIC)
    out.write(struct.pack("<III", layers, heads, n))
    out.write(struct.pack("<I", len(header)))
    out.write(header)
    out.write(values.tobytes(order="C"))
    return out.getvalue()


def validate_tree(words: list[ParsedWord]) -> None:
    if not words:
        raise SentenceSkipped("empty-parse")
    roots = sum(1 for w in words if w.head == 0)
    if roots != 1:
        raise SentenceSkipped("bad-parse", f"{roots} roots")
    for i, word in enumerate(words, start=1):
        if not word.text or any(c in word.text for c in "\t\n\r"):
            raise SentenceSkipped("unwritable-form", repr(word.text))
        if word.head == i or not 0 <= word.head <= len(words):
            raise SentenceSkipped("bad-parse", f"word {i} heads {word.head}")
        if not word.deprel or word.deprel != word.deprel.lower():
            raise SentenceSkipped("bad-parse", f"label {word.deprel!r}")


def conllu_block(sentence_id: str, text: str, words: list[ParsedWord]) -> str:
    """One CoNLL-U sentence block (ID, FORM, HEAD, DEPREL; rest blank)."""
    validate_tree(words)
    lines = [f"# sent_id = {sentence_id}", f"# text = {text}"]
    for i, word in enumerate(words, start=1):
        lines.append(
            f"{i}\t{word.text}\t_\t_\t_\t_\t{word.head}\t{word.deprel}\t_\t_"
        )
    return "\n".join(lines) + "\n\n"
