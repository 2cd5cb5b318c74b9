"""From counters to masks: the ratio criterion, sparsity targeting and
layer collapse.

Run: python demos/03_prune_masks.py
"""

import numpy as np

from sap import prune_by_ratio, prune_to_sparsity, collapse_layers, write_mask
from sap.ranker import HeadScoreTable

# A hand-built score table: S = 4644, three heads with very high
# counters, the rest comfortably below.
counts = np.array(
    [[4371, 3704, 3529, 1800], [3482, 2100, 900, 40], [2750, 2300, 410, 5]]
)
table = HeadScoreTable(counts, total_weight=4644, threshold=0.01)

# Eq-style criterion: a head is pruned when cnt >= S * R.
for ratio in (0.9, 0.75, 0.5):
    mask = prune_by_ratio(table, ratio)
    print(f"R = {ratio:<5} cut = {table.total_weight * ratio:>7.1f}  "
          f"prunes {len(mask.pruned_heads):>2} heads: {sorted(mask.pruned_heads)}")

# Sparsity targeting picks the highest counters directly and reports the
# largest R that would have pruned at least that many heads.
mask, effective = prune_to_sparsity(table, 0.5)
print(f"\ntarget sparsity 0.5 -> {len(mask.pruned_heads)} heads, "
      f"effective R = {effective:.4f}")

# Layer collapse: once enough of a layer's heads are gone, remove the
# whole layer. fraction=0.75 of 4 heads means 3 pruned heads suffice.
collapsed = collapse_layers(mask, fraction=0.75)
print(f"collapse at 0.75: layers fully pruned = {sorted(collapsed.pruned_layers)}")
print(f"mask sparsity after collapse = {collapsed.sparsity:.3f}")

print("\nserialized mask JSON:")
print(write_mask(collapsed).decode(), end="")
