"""Turn head-score tables into prune masks.

A head is pruned when its violation counter reaches the fraction R of
the corpus total S (cnt >= S*R). Sparsity targeting picks the highest
counters directly, which is equivalent to sweeping R downward because
the pruned set only grows as R shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DegenerateCorpusError
from .formats import PruneMask
from .ranker import HeadScoreTable


@dataclass(frozen=True)
class PruneConfig:
    """Selection settings: exactly one of ratio / target_sparsity drives."""

    ratio: float | None = None
    target_sparsity: float | None = None
    layer_collapse_fraction: float = 1.0

    def __post_init__(self):
        if (self.ratio is None) == (self.target_sparsity is None):
            raise ConfigError("set exactly one of ratio and target_sparsity")
        if self.ratio is not None and not 0.0 < self.ratio <= 1.0:
            raise ConfigError(f"ratio must be in (0, 1], got {self.ratio}")
        if self.target_sparsity is not None and not 0.0 <= self.target_sparsity < 1.0:
            raise ConfigError(
                f"target_sparsity must be in [0, 1), got {self.target_sparsity}"
            )
        if not 0.0 < self.layer_collapse_fraction <= 1.0:
            raise ConfigError(
                f"layer_collapse_fraction must be in (0, 1], got {self.layer_collapse_fraction}"
            )


def apply_config(table: HeadScoreTable, config: PruneConfig) -> tuple[PruneMask, float]:
    """Run the configured selection, then layer collapse.

    Returns the mask and the (effective) ratio that produced it.
    """
    if config.ratio is not None:
        mask = prune_by_ratio(table, config.ratio)
        effective = config.ratio
    else:
        mask, effective = prune_to_sparsity(table, config.target_sparsity)
    return collapse_layers(mask, config.layer_collapse_fraction), effective


def ranked_heads(table: HeadScoreTable) -> list[tuple[int, int]]:
    """Heads in scan order: descending counter, ties by ascending (layer, head)."""
    heads = [
        (layer, head)
        for layer in range(table.layers)
        for head in range(table.heads_per_layer)
    ]
    heads.sort(key=lambda lh: (-table.count_of(*lh), lh))
    return heads


def prune_by_ratio(table: HeadScoreTable, ratio: float) -> PruneMask:
    """Prune every head whose counter reaches S * ratio."""
    if not 0.0 < ratio <= 1.0:
        raise ConfigError(f"ratio must be in (0, 1], got {ratio}")
    if table.total_weight == 0:
        raise DegenerateCorpusError("total weight S is 0; the table carries no signal")
    cut = table.total_weight * ratio
    pruned = frozenset(
        (layer, head)
        for layer in range(table.layers)
        for head in range(table.heads_per_layer)
        if table.count_of(layer, head) >= cut
    )
    return PruneMask(table.layers, table.heads_per_layer, pruned)


def prune_to_sparsity(
    table: HeadScoreTable, target_sparsity: float
) -> tuple[PruneMask, float]:
    """Prune the ceil(target * L * H) highest-counter heads.

    Also reports the effective ratio: the largest R for which
    prune_by_ratio would prune at least that many heads (1.0 when the
    target rounds to zero heads).
    """
    if not 0.0 <= target_sparsity < 1.0:
        raise ConfigError(f"target_sparsity must be in [0, 1), got {target_sparsity}")
    if table.total_weight == 0:
        raise DegenerateCorpusError("total weight S is 0; the table carries no signal")
    head_count = table.layers * table.heads_per_layer
    quota = math.ceil(target_sparsity * head_count)
    order = ranked_heads(table)
    selected = order[:quota]
    if quota == 0:
        effective_ratio = 1.0
    else:
        effective_ratio = table.count_of(*order[quota - 1]) / table.total_weight
    mask = PruneMask(table.layers, table.heads_per_layer, frozenset(selected))
    return mask, effective_ratio


def collapse_layers(mask: PruneMask, fraction: float = 1.0) -> PruneMask:
    """Prune whole layers once enough of their heads are gone.

    A layer whose pruned-head count reaches ceil(fraction * H) has all
    its heads pruned and is listed in pruned_layers. Idempotent; never
    removes a head.
    """
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    needed = math.ceil(fraction * mask.heads_per_layer)
    per_layer: dict[int, int] = {}
    for layer, _head in mask.pruned_heads:
        per_layer[layer] = per_layer.get(layer, 0) + 1
    collapsed = frozenset(
        layer for layer, count in per_layer.items() if count >= needed
    )
    heads = set(mask.pruned_heads)
    for layer in collapsed:
        heads.update((layer, head) for head in range(mask.heads_per_layer))
    return PruneMask(
        mask.layers,
        mask.heads_per_layer,
        frozenset(heads),
        mask.pruned_layers | collapsed,
    )
