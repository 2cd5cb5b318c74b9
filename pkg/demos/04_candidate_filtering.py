"""Candidate filtering: re-rank prune candidates by measured damage and
prune until the tolerance threshold is hit.

Run: python demos/04_candidate_filtering.py
"""

from sap import filter_prune, rank_candidates
from sap.toymodel import ToyConfig, ToyOracle, init_weights, make_task

VOCAB = tuple(f"w{i:02d}" if i % 2 == 0 else f"wordform{i:02d}" for i in range(12))

config = ToyConfig(layers=2, heads=3, d_model=12, d_head=4, vocab=VOCAB, seed=0)
weights = init_weights(config)
task = make_task(config, size=40)
oracle = ToyOracle(config, weights, task)

candidates = [(l, h) for l in range(config.layers) for h in range(config.heads)]

# Phase 1: evaluate each candidate alone and sort by how little damage
# it does. One oracle call per candidate plus one for the dense model.
order, report = rank_candidates(
    candidates, oracle, layers=config.layers, heads_per_layer=config.heads
)
print(f"dense accuracy = {report.dense_metric}")
print(f"{'head':>7}  {'solo':>6}  {'degradation':>11}")
for record in report.candidates:
    print(f"{str(record.head):>7}  {record.solo_metric:>6}  {record.degradation:>11}")

# Phase 2: prune cumulatively in that order, re-evaluating each step,
# and stop once accuracy drops below 90% of dense.
mask, report = filter_prune(
    candidates, oracle, tolerance_fraction=0.9,
    layers=config.layers, heads_per_layer=config.heads,
)
floor = 0.9 * report.dense_metric
print(f"\ntolerance floor = {floor}")
for step in report.steps:
    verdict = "keep pruned" if step.accepted else "rolled back, stop"
    print(f"  prune {step.head}: accuracy {step.metric}  -> {verdict}")
print(f"\nstop reason: {report.stop_reason}")
print(f"final mask: {sorted(mask.pruned_heads)} "
      f"(sparsity {mask.sparsity:.3f})")
print(f"oracle requests: {report.oracle_requests}, "
      f"actual evaluations: {report.oracle_calls} (memoized repeat saved one)")
