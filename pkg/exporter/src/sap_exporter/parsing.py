"""Dependency parser backends.

A parser maps raw sentence text to words with character offsets and a
labeled dependency tree. Words carry 1-based head indices (0 = root)
and lowercase base UD labels, which is exactly what the CoNLL-U
emitter needs; the character offsets drive subword alignment.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BackendUnavailable


@dataclass(frozen=True)
class ParsedWord:
    text: str
    start: int  # character offsets into the sentence text
    end: int
    head: int  # 1-based word index, 0 for the root word
    deprel: str


def base_label(label: str) -> str:
    """Lowercase UD base label (subtypes after ':' stripped)."""
    return label.split(":", 1)[0].strip().lower()


class SpacyParser:
    """Off-the-shelf dependency parses via a spaCy pipeline."""

    def __init__(self, model: str = "en_core_web_sm"):
        try:
            import spacy
        except ImportError as exc:
            raise BackendUnavailable(
                "spaCy is not installed; install sap-exporter[spacy] and the "
                f"pipeline {model!r}, or inject another parser"
            ) from exc
        try:
            self._nlp = spacy.load(model)
        except OSError as exc:
            raise BackendUnavailable(
                f"spaCy pipeline {model!r} is not available: {exc}"
            ) from exc

    def __call__(self, text: str) -> list[ParsedWord]:
        doc = self._nlp(text)
        words = []
        for token in doc:
            if token.dep_.lower() == "root" or token.head is token:
                head = 0
                label = "root"
            else:
                head = token.head.i + 1
                label = base_label(token.dep_)
            words.append(
                ParsedWord(
                    text=token.text,
                    start=token.idx,
                    end=token.idx + len(token.text),
                    head=head,
                    deprel=label,
                )
            )
        return words
