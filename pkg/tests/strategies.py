"""Hypothesis strategies for domain values."""

import hypothesis.strategies as st
import numpy as np

from sap.formats import AttentionRecord, DepArc, ParsedSentence, PruneMask, Token, WordAlignment
from sap.ranker import HeadScoreTable

LABEL_POOL = ("nsubj", "obj", "det", "amod", "advmod", "case", "nmod", "obl", "mark", "cc")
WORD_POOL = ("the", "cat", "dolphins", "washed", "up", "dead", "beaches", "africa")


@st.composite
def parsed_sentences(draw, index=1, min_tokens=2, max_tokens=6, labels=LABEL_POOL):
    """A random single-rooted dependency tree."""
    size = draw(st.integers(min_tokens, max_tokens))
    tokens = tuple(
        Token(i + 1, draw(st.sampled_from(WORD_POOL))) for i in range(size)
    )
    root = draw(st.integers(1, size))
    arcs = [DepArc(0, root, "root")]
    attached = [root]
    for tok in draw(st.permutations([t for t in range(1, size + 1) if t != root])):
        head = draw(st.sampled_from(attached))
        arcs.append(DepArc(head, tok, draw(st.sampled_from(labels))))
        attached.append(tok)
    return ParsedSentence(f"s{index:04d}", tokens, tuple(arcs))


@st.composite
def records_for(draw, sentence, layers, heads, with_masks=False):
    """An attention record aligned with the given sentence."""
    spans = []
    cursor = 0
    for _ in range(len(sentence)):
        width = draw(st.integers(1, 2))
        spans.append((cursor, cursor + width))
        cursor += width
    n = cursor
    masked = frozenset()
    if with_masks and layers * heads > 1:
        masked = frozenset(
            draw(
                st.sets(
                    st.tuples(
                        st.integers(0, layers - 1), st.integers(0, heads - 1)
                    ),
                    max_size=layers * heads - 1,
                )
            )
        )
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    logits = rng.normal(size=(layers, heads, n, n))
    shifted = logits - logits.max(axis=3, keepdims=True)
    exp = np.exp(shifted)
    values = exp / exp.sum(axis=3, keepdims=True)
    for layer, head in masked:
        values[layer, head] = 0.0
    return AttentionRecord(
        sentence.sentence_id, values.astype(np.float32), WordAlignment(tuple(spans)), masked
    )


@st.composite
def corpora(draw, max_sentences=4, max_layers=3, max_heads=3, with_masks=False, max_tokens=5):
    layers = draw(st.integers(1, max_layers))
    heads = draw(st.integers(1, max_heads))
    count = draw(st.integers(1, max_sentences))
    pairs = []
    for i in range(count):
        sentence = draw(parsed_sentences(index=i + 1, max_tokens=max_tokens))
        record = draw(records_for(sentence, layers, heads, with_masks=with_masks))
        pairs.append((sentence, record))
    return pairs


@st.composite
def score_tables(draw, max_layers=4, max_heads=4, max_total=500):
    layers = draw(st.integers(1, max_layers))
    heads = draw(st.integers(1, max_heads))
    total = draw(st.integers(1, max_total))
    counts = np.array(
        [
            [draw(st.integers(0, total)) for _ in range(heads)]
            for _ in range(layers)
        ],
        dtype=np.int64,
    )
    threshold = draw(
        st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)
    )
    return HeadScoreTable(counts, total, threshold)


@st.composite
def prune_masks(draw, max_layers=4, max_heads=4):
    layers = draw(st.integers(1, max_layers))
    heads = draw(st.integers(1, max_heads))
    pruned = draw(
        st.sets(
            st.tuples(st.integers(0, layers - 1), st.integers(0, heads - 1)),
            max_size=layers * heads,
        )
    )
    full_layers = frozenset(
        layer
        for layer in range(layers)
        if all((layer, head) in pruned for head in range(heads))
    )
    listed = draw(st.sets(st.sampled_from(sorted(full_layers)))) if full_layers else set()
    return PruneMask(layers, heads, frozenset(pruned), frozenset(listed))
