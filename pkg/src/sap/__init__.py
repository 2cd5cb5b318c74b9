"""Syntactic attention pruning toolkit.

Scores transformer attention heads by how well they track the most
frequent syntactic dependencies of a corpus, then derives retrain-free
prune masks, optionally refined by oracle-driven candidate filtering.
"""

from .cfilter import CFReport, SubprocessOracle, filter_prune, rank_candidates
from .depstats import DepRanking, compute_ranking, total_weighted_occurrences
from .formats import (
    AttentionRecord,
    DepArc,
    ParsedSentence,
    PruneMask,
    Token,
    WordAlignment,
    read_attention,
    read_conllu,
    read_mask,
    validate_pair,
    write_attention,
    write_conllu,
    write_mask,
)
from .pruner import (
    PruneConfig,
    apply_config,
    collapse_layers,
    prune_by_ratio,
    prune_to_sparsity,
)
from .ranker import (
    HeadScoreTable,
    arc_attention,
    compute_threshold,
    score_heads,
    word_attention,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionRecord",
    "CFReport",
    "DepArc",
    "DepRanking",
    "HeadScoreTable",
    "ParsedSentence",
    "PruneConfig",
    "PruneMask",
    "SubprocessOracle",
    "Token",
    "WordAlignment",
    "apply_config",
    "arc_attention",
    "collapse_layers",
    "compute_ranking",
    "compute_threshold",
    "filter_prune",
    "prune_by_ratio",
    "prune_to_sparsity",
    "rank_candidates",
    "read_attention",
    "read_conllu",
    "read_mask",
    "score_heads",
    "total_weighted_occurrences",
    "validate_pair",
    "word_attention",
    "write_attention",
    "write_conllu",
    "write_mask",
]
