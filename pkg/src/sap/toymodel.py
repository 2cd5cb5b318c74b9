"""Desk-scale multi-head self-attention encoder with head masking.

Small enough to run in tests, real enough to exercise every pipeline
stage: it produces row-stochastic attention maps over subword pieces,
word-to-piece alignments, a scalar classification metric for oracle
work, and a seeded template grammar that fabricates dependency trees so
the whole pipeline runs with zero external inputs.

All randomness flows through the Philox counter-based generator keyed on
(seed, stream), which is reproducible across platforms and runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeMismatchError, VocabError
from .formats import (
    AttentionRecord,
    DepArc,
    ParsedSentence,
    PruneMask,
    Token,
    WordAlignment,
)

_STREAM_WEIGHTS = 0
_STREAM_TASK = 1
_STREAM_GRAMMAR = 2

# Pieces per word: words this long or longer split into two model tokens,
# so alignments are non-trivial without a learned tokenizer.
_SPLIT_LENGTH = 6

DEFAULT_LABEL_POOL = (
    "nsubj",
    "obj",
    "det",
    "amod",
    "advmod",
    "nmod",
    "case",
    "obl",
    "mark",
    "conj",
)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


@dataclass(frozen=True)
class ToyConfig:
    layers: int
    heads: int
    d_model: int
    d_head: int
    vocab: tuple[str, ...]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "vocab", tuple(self.vocab))
        if min(self.layers, self.heads, self.d_model, self.d_head) < 1:
            raise ConfigError("all model dimensions must be >= 1")
        if self.d_model != self.heads * self.d_head:
            raise ConfigError(
                f"d_model ({self.d_model}) must equal heads*d_head "
                f"({self.heads}*{self.d_head})"
            )
        if not self.vocab or len(set(self.vocab)) != len(self.vocab):
            raise ConfigError("vocab must be non-empty and free of duplicates")
        if any(not w for w in self.vocab):
            raise ConfigError("vocab words must be non-empty")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


def word_pieces(word: str) -> tuple[str, ...]:
    """Model tokens for one word; long words split into two pieces."""
    if len(word) < _SPLIT_LENGTH:
        return (word,)
    half = (len(word) + 1) // 2
    return (word[:half], "##" + word[half:])


def piece_vocab(config: ToyConfig) -> tuple[str, ...]:
    pieces: list[str] = []
    seen: set[str] = set()
    for word in config.vocab:
        for piece in word_pieces(word):
            if piece not in seen:
                seen.add(piece)
                pieces.append(piece)
    return tuple(pieces)


def tokenize(config: ToyConfig, words) -> tuple[list[int], WordAlignment]:
    """Map words to model-token ids plus their alignment spans."""
    index = {piece: i for i, piece in enumerate(piece_vocab(config))}
    known = set(config.vocab)
    ids: list[int] = []
    spans: list[tuple[int, int]] = []
    for word in words:
        if word not in known:
            raise VocabError(f"word {word!r} is not in the model vocabulary")
        start = len(ids)
        for piece in word_pieces(word):
            ids.append(index[piece])
        spans.append((start, len(ids)))
    if not spans:
        raise ConfigError("cannot run the model on an empty sentence")
    return ids, WordAlignment(tuple(spans))


@dataclass(frozen=True, eq=False)
class ToyWeights:
    embeddings: np.ndarray  # (pieces, d_model)
    wq: np.ndarray  # (layers, d_model, d_model)
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    bo: np.ndarray  # (layers, d_model)
    w_cls: np.ndarray  # (d_model, 2)
    b_cls: np.ndarray  # (2,)


def init_weights(config: ToyConfig) -> ToyWeights:
    """Draw all parameters from the seeded counter-based generator."""
    rng = _rng(config.seed, _STREAM_WEIGHTS)
    pieces = len(piece_vocab(config))
    d = config.d_model
    scale = 1.0 / math.sqrt(d)
    return ToyWeights(
        embeddings=rng.normal(0.0, 1.0, size=(pieces, d)),
        wq=rng.normal(0.0, scale, size=(config.layers, d, d)),
        wk=rng.normal(0.0, scale, size=(config.layers, d, d)),
        wv=rng.normal(0.0, scale, size=(config.layers, d, d)),
        wo=rng.normal(0.0, scale, size=(config.layers, d, d)),
        bo=rng.normal(0.0, scale, size=(config.layers, d)),
        w_cls=rng.normal(0.0, scale, size=(d, 2)),
        b_cls=rng.normal(0.0, scale, size=(2,)),
    )


@dataclass(frozen=True, eq=False)
class ForwardResult:
    record: AttentionRecord
    logits: np.ndarray  # (2,)
    head_concat: tuple[np.ndarray, ...]  # per layer: (n, d_model) pre-projection


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def forward(
    config: ToyConfig,
    weights: ToyWeights,
    words,
    mask: PruneMask | None = None,
    sentence_id: str = "s1",
) -> ForwardResult:
    """Run the encoder over one sentence.

    Masked heads contribute zero to the concatenated head output and
    carry all-zero attention maps flagged as masked in the returned
    record; unmasked maps are softmax rows.
    """
    if mask is None:
        mask = PruneMask.empty(config.layers, config.heads)
    if mask.layers != config.layers or mask.heads_per_layer != config.heads:
        raise ShapeMismatchError(
            f"mask is {mask.layers}x{mask.heads_per_layer}, model is "
            f"{config.layers}x{config.heads}"
        )
    ids, alignment = tokenize(config, words)
    n = len(ids)
    d_head = config.d_head
    x = weights.embeddings[ids].astype(np.float64)
    values = np.zeros((config.layers, config.heads, n, n), dtype=np.float64)
    concat_by_layer: list[np.ndarray] = []
    for layer in range(config.layers):
        q = x @ weights.wq[layer]
        k = x @ weights.wk[layer]
        v = x @ weights.wv[layer]
        concat = np.zeros((n, config.d_model), dtype=np.float64)
        for head in range(config.heads):
            lo, hi = head * d_head, (head + 1) * d_head
            if mask.is_pruned(layer, head):
                continue  # zero output, all-zero attention rows
            scores = (q[:, lo:hi] @ k[:, lo:hi].T) / math.sqrt(d_head)
            attn = _softmax_rows(scores)
            values[layer, head] = attn
            concat[:, lo:hi] = attn @ v[:, lo:hi]
        concat_by_layer.append(concat)
        x = x + concat @ weights.wo[layer] + weights.bo[layer]
    pooled = x.mean(axis=0)
    logits = pooled @ weights.w_cls + weights.b_cls
    record = AttentionRecord(
        sentence_id,
        values.astype(np.float32),
        alignment,
        masked_heads=mask.pruned_heads,
    )
    return ForwardResult(record, logits, tuple(concat_by_layer))


@dataclass(frozen=True)
class ToyTask:
    """Binary classification: is the trigger word near the anchor word?"""

    sentences: tuple[tuple[str, ...], ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(tuple(s) for s in self.sentences))
        object.__setattr__(self, "labels", tuple(int(l) for l in self.labels))
        if len(self.sentences) != len(self.labels):
            raise ConfigError("one label per sentence required")
        if any(label not in (0, 1) for label in self.labels):
            raise ConfigError("labels must be 0 or 1")


def make_task(
    config: ToyConfig,
    size: int = 32,
    window: int = 2,
    min_words: int = 4,
    max_words: int = 8,
) -> ToyTask:
    """Seeded task generation; labels alternate so classes stay balanced.

    Label 1 sentences place vocab[1] within `window` positions of
    vocab[0]; label 0 sentences omit the trigger or push it out of the
    window. Filler words never include anchor or trigger.
    """
    if len(config.vocab) < 3:
        raise ConfigError("task generation needs a vocab of at least 3 words")
    if size < 2 or min_words < 3 or max_words < min_words:
        raise ConfigError("bad task size parameters")
    rng = _rng(config.seed, _STREAM_TASK)
    anchor, trigger = config.vocab[0], config.vocab[1]
    filler = list(config.vocab[2:])
    sentences: list[tuple[str, ...]] = []
    labels: list[int] = []
    for i in range(size):
        label = 1 - (i % 2)
        m = int(rng.integers(min_words, max_words + 1))
        words = [str(rng.choice(filler)) for _ in range(m)]
        a = int(rng.integers(0, m))
        words[a] = anchor
        if label == 1:
            near = [j for j in range(m) if j != a and abs(j - a) <= window]
            words[int(rng.choice(near))] = trigger
        else:
            far = [j for j in range(m) if abs(j - a) > window]
            if far and rng.random() < 0.5:
                words[int(rng.choice(far))] = trigger
        sentences.append(tuple(words))
        labels.append(label)
    return ToyTask(tuple(sentences), tuple(labels))


def evaluate(
    config: ToyConfig,
    weights: ToyWeights,
    task: ToyTask,
    mask: PruneMask | None = None,
) -> float:
    """Deterministic accuracy of the (masked) model on the task."""
    correct = 0
    for words, label in zip(task.sentences, task.labels):
        result = forward(config, weights, words, mask)
        if int(np.argmax(result.logits)) == label:
            correct += 1
    return correct / len(task.labels)


class ToyOracle:
    """EvalOracle adapter: mask -> task accuracy of the toy model."""

    parallel_safe = True

    def __init__(self, config: ToyConfig, weights: ToyWeights, task: ToyTask):
        self.config = config
        self.weights = weights
        self.task = task

    def __call__(self, mask: PruneMask) -> float:
        return evaluate(self.config, self.weights, self.task, mask)


def generate_corpus(
    config: ToyConfig,
    sentences: int,
    min_words: int = 3,
    max_words: int = 6,
    label_pool=DEFAULT_LABEL_POOL,
) -> list[ParsedSentence]:
    """Fabricate dependency trees from a seeded template grammar.

    Trees are built by attaching each token to a previously attached one,
    so every sentence is a single-rooted tree; labels are drawn with a
    harmonic bias so rankings have a clear head and a long tail.
    """
    if sentences < 1 or min_words < 2 or max_words < min_words:
        raise ConfigError("bad corpus size parameters")
    rng = _rng(config.seed, _STREAM_GRAMMAR)
    pool = list(label_pool)
    probs = np.array([1.0 / (i + 1) for i in range(len(pool))])
    probs /= probs.sum()
    corpus: list[ParsedSentence] = []
    for i in range(sentences):
        m = int(rng.integers(min_words, max_words + 1))
        surfaces = [str(rng.choice(config.vocab)) for _ in range(m)]
        tokens = tuple(Token(j + 1, surfaces[j]) for j in range(m))
        root = int(rng.integers(1, m + 1))
        arcs = [DepArc(0, root, "root")]
        attached = [root]
        order = [t for t in range(1, m + 1) if t != root]
        rng.shuffle(order)
        for tok in order:
            head = int(attached[int(rng.integers(0, len(attached)))])
            label = str(rng.choice(pool, p=probs))
            arcs.append(DepArc(head, tok, label))
            attached.append(tok)
        corpus.append(ParsedSentence(f"s{i + 1:04d}", tokens, tuple(arcs)))
    return corpus


def corpus_records(
    config: ToyConfig,
    weights: ToyWeights,
    corpus,
    mask: PruneMask | None = None,
) -> list[tuple[ParsedSentence, AttentionRecord]]:
    """Run the model over a generated corpus, pairing records by id."""
    pairs = []
    for sentence in corpus:
        words = [t.surface for t in sentence.tokens]
        result = forward(config, weights, words, mask, sentence_id=sentence.sentence_id)
        pairs.append((sentence, result.record))
    return pairs
