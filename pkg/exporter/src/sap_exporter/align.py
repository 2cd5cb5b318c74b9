"""Word-to-subword alignment from shared character offsets.

Every parser word must own a contiguous, non-empty run of non-special
model tokens, and every non-special model token must belong to exactly
one word. Anything else (a subword crossing a word boundary, a stray
token between words) is an alignment failure and the sentence is
skipped: correctness over coverage.
"""

from __future__ import annotations

from .errors import AlignmentFailure


def word_spans(word_offsets, token_offsets, special) -> list[tuple[int, int]]:
    """Half-open model-token span per word, aligned by char offsets."""
    n = len(token_offsets)
    owner = [None] * n  # word index owning each token
    spans: list[tuple[int, int]] = []
    for w, (ws, we) in enumerate(word_offsets):
        if we <= ws:
            raise AlignmentFailure(f"word {w} has an empty character range")
        start = end = None
        for t in range(n):
            if special[t]:
                continue
            ts, te = token_offsets[t]
            if te <= ws or ts >= we:
                continue
            if ts < ws or te > we:
                raise AlignmentFailure(
                    f"model token chars [{ts},{te}) cross the boundary of "
                    f"word chars [{ws},{we})"
                )
            if start is None:
                start = t
            elif t != end:
                raise AlignmentFailure(f"word {w} maps to non-contiguous model tokens")
            end = t + 1
            owner[t] = w
        if start is None:
            raise AlignmentFailure(f"word chars [{ws},{we}) own no model tokens")
        spans.append((start, end))
    for t in range(n):
        if not special[t] and owner[t] is None:
            ts, te = token_offsets[t]
            raise AlignmentFailure(
                f"model token chars [{ts},{te}) belong to no parser word"
            )
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        if s2 < e1:
            raise AlignmentFailure("word spans overlap or reorder")
    return spans
