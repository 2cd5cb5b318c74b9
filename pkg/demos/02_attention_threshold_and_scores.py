"""Attention thresholding and per-head violation counters.

The toy encoder stands in for a real transformer: it emits per-sentence
attention tensors plus word alignments, and the template grammar emits
matching dependency trees, so the whole scoring stage runs end to end
with no external inputs.

Run: python demos/02_attention_threshold_and_scores.py
"""

from sap import compute_ranking, compute_threshold, score_heads
from sap.ranker import arc_attention
from sap.toymodel import ToyConfig, corpus_records, generate_corpus, init_weights

VOCAB = tuple(f"w{i:02d}" if i % 2 == 0 else f"wordform{i:02d}" for i in range(12))

config = ToyConfig(layers=2, heads=3, d_model=12, d_head=4, vocab=VOCAB, seed=7)
weights = init_weights(config)
corpus = generate_corpus(config, sentences=10)
pairs = corpus_records(config, weights, corpus)

print(f"{len(pairs)} sentences; model is {config.layers} layers x {config.heads} heads")
sample = pairs[0][1]
print(f"first record: {sample.model_token_count} model tokens for "
      f"{sample.word_count} words (long words split into two pieces)")

# The threshold is the global mean of word-level attention over every
# off-diagonal word pair, every head, every sentence.
theta = compute_threshold(pairs)
print(f"\nglobal attention threshold = {theta:.6f}")

# Look at one arc: word-level attention per head, against the threshold.
sentence, record = pairs[0]
arc = sentence.non_root_arcs()[0]
print(f"\narc {arc.head_index}->{arc.dep_index} ({arc.label}) per head:")
for layer in range(config.layers):
    for head in range(config.heads):
        value = arc_attention(record, layer, head, arc)
        flag = "below" if value < theta else "above"
        print(f"  head ({layer},{head}): {value:.4f}  ({flag} threshold)")

# Counters: a top-k arc below the threshold, or a penalty arc above it,
# adds the arc label's weight to the head's counter. High counters mean
# the head ignores important syntax.
ranking = compute_ranking(corpus, k=3)
table = score_heads(pairs, ranking, theta)
print(f"\nviolation counters (S = {table.total_weight}):")
for layer in range(table.layers):
    row = "  ".join(f"{table.count_of(layer, h):>4}" for h in range(table.heads_per_layer))
    print(f"  layer {layer}:  {row}")
