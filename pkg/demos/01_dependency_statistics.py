"""Dependency statistics: from a parsed corpus to ranked, weighted types.

Run: python demos/01_dependency_statistics.py
"""

from sap import compute_ranking, read_conllu, total_weighted_occurrences

# A tiny corpus in CoNLL-U. Only ID, FORM, HEAD and DEPREL matter here;
# subtypes like nsubj:pass are folded into their base label on read.
CORPUS = b"""\
# sent_id = s1
1\tdolphins\t_\t_\t_\t_\t3\tnsubj\t_\t_
2\twere\t_\t_\t_\t_\t3\taux:pass\t_\t_
3\twashed\t_\t_\t_\t_\t0\troot\t_\t_
4\tup\t_\t_\t_\t_\t3\tcompound\t_\t_
5\tdead\t_\t_\t_\t_\t3\tamod\t_\t_

# sent_id = s2
1\tturtles\t_\t_\t_\t_\t2\tnsubj\t_\t_
2\trested\t_\t_\t_\t_\t0\troot\t_\t_
3\ton\t_\t_\t_\t_\t4\tcase\t_\t_
4\tbeaches\t_\t_\t_\t_\t2\tobl\t_\t_
5\tsandy\t_\t_\t_\t_\t4\tamod\t_\t_

# sent_id = s3
1\twhales\t_\t_\t_\t_\t2\tnsubj\t_\t_
2\tswam\t_\t_\t_\t_\t0\troot\t_\t_
3\tslowly\t_\t_\t_\t_\t2\tadvmod\t_\t_
4\tnearby\t_\t_\t_\t_\t2\tadvmod\t_\t_
"""

corpus = read_conllu(CORPUS)
print(f"parsed {len(corpus)} sentences, "
      f"{sum(len(s.non_root_arcs()) for s in corpus)} non-root arcs")

# Rank dependency types by frequency. With k=2 the two most frequent
# types count as "important": they get weights k..1, everything below
# gets growing penalty weights 1, 2, 3, ...
ranking = compute_ranking(corpus, k=2)
print(f"\n{'rank':>4}  {'label':<10} {'count':>5}  {'weight':>6}  group")
for rank, (label, count) in enumerate(ranking.ordered_types, start=1):
    group = "top-k" if rank <= ranking.k else "penalty"
    print(f"{rank:>4}  {label:<10} {count:>5}  {ranking.weight_for_rank(rank):>6}  {group}")

# S is the corpus-wide weight total; per-head violation counters can
# never exceed it, which is what makes cnt >= S*R a meaningful cutoff.
total = total_weighted_occurrences(corpus, ranking)
print(f"\ntotal weighted occurrences S = {total}")

# Labels never seen in the ranking corpus score as the worst rank:
print(f"unseen label 'preconj' would score weight {ranking.scoring_weight('preconj')}")
