"""Corpus-level dependency statistics and the rank-based weight scheme.

Dependency types are ranked by total occurrence count across the corpus
(root arcs excluded). The top-k ranks carry weights k..1; every rank r
below the cutoff carries the penalty weight r - k, so the first non-top
type gets 1 and weights grow as types get rarer.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import DegenerateCorpusError, RankingError, UnknownLabelError
from .formats import ParsedSentence


@dataclass(frozen=True)
class DepRanking:
    """Dependency types ordered by weighted frequency.

    ordered_types is sorted by descending occurrence count, ties broken
    lexicographically by label, so the ranking is a pure function of the
    corpus content regardless of sentence order.
    """

    k: int
    ordered_types: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "ordered_types", tuple(map(tuple, self.ordered_types)))
        if self.k < 1:
            raise RankingError(f"k must be >= 1, got {self.k}")
        if self.k > len(self.ordered_types):
            raise RankingError(
                f"k = {self.k} exceeds the {len(self.ordered_types)} distinct dependency types"
            )
        if any(count < 0 for _label, count in self.ordered_types):
            raise RankingError("occurrence counts must be non-negative")
        ranks = {label: r for r, (label, _count) in enumerate(self.ordered_types, start=1)}
        if len(ranks) != len(self.ordered_types):
            raise RankingError("duplicate label in ranking")
        object.__setattr__(self, "_rank_by_label", ranks)

    @property
    def num_types(self) -> int:
        return len(self.ordered_types)

    def rank_of(self, label: str) -> int:
        try:
            return self._rank_by_label[label]
        except KeyError:
            raise UnknownLabelError(f"label {label!r} is not in the ranking") from None

    def is_top_k(self, label: str) -> bool:
        """Whether the label ranks within the top-k; unseen labels never do."""
        rank = self._rank_by_label.get(label)
        return rank is not None and rank <= self.k

    def weight_for_rank(self, rank: int) -> int:
        if rank < 1:
            raise RankingError(f"rank must be >= 1, got {rank}")
        if rank <= self.k:
            return self.k - rank + 1
        return rank - self.k

    def weight_of(self, label: str) -> int:
        """Composite rank weight of a label known to the ranking."""
        return self.weight_for_rank(self.rank_of(label))

    def scoring_weight(self, label: str) -> int:
        """Weight used at scoring time.

        Labels absent from the ranking corpus are by definition infrequent
        and are treated as rank num_types + 1, the heaviest penalty.
        """
        rank = self._rank_by_label.get(label)
        if rank is None:
            rank = self.num_types + 1
        return self.weight_for_rank(rank)

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "num_types": self.num_types,
            "types": [
                {
                    "label": label,
                    "count": count,
                    "rank": rank,
                    "weight": self.weight_for_rank(rank),
                }
                for rank, (label, count) in enumerate(self.ordered_types, start=1)
            ],
        }


def compute_ranking(corpus: list[ParsedSentence], k: int) -> DepRanking:
    """Count non-root arcs per dependency type and rank them."""
    if not corpus:
        raise DegenerateCorpusError("cannot rank dependencies of an empty corpus")
    counts = Counter(
        arc.label for sentence in corpus for arc in sentence.non_root_arcs()
    )
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return DepRanking(k, tuple(ordered))


def total_weighted_occurrences(corpus, ranking: DepRanking) -> int:
    """S: the weight-sum over every non-root arc of the corpus.

    Exact integer arithmetic; uses scoring weights so that a corpus that
    is not the ranking corpus still yields a total that bounds every
    per-head counter.
    """
    return sum(
        ranking.scoring_weight(arc.label)
        for sentence in corpus
        for arc in sentence.non_root_arcs()
    )
