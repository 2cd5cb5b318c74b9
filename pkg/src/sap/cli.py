"""Command-line driver wiring all pipeline stages.

Subcommands: stats, rank, prune, filter, sweep-k, and toy gen / toy eval
for self-contained fixtures. Every command writes deterministic JSON
artifacts (sorted keys) so reruns on identical inputs are byte-identical.
Error classes map to distinct exit codes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cfilter, depstats, pruner, ranker, toymodel
from .errors import (
    ConfigError,
    ConlluParseError,
    DegenerateCorpusError,
    FormatError,
    OracleError,
    PairMismatchError,
    RankingError,
    SapError,
    ShapeMismatchError,
    ValidationError,
    VocabError,
)
from .formats import read_attention, read_conllu, read_mask, write_attention, write_conllu, write_mask

_EXIT_CODES = (
    (ConlluParseError, 3),
    (FormatError, 4),
    (DegenerateCorpusError, 5),
    (RankingError, 6),
    (ShapeMismatchError, 7),
    (PairMismatchError, 7),
    (OracleError, 8),
    (ValidationError, 9),
    (VocabError, 10),
    (ConfigError, 10),
    (SapError, 1),
)


def _exit_code(exc: SapError) -> int:
    for cls, code in _EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


def _dump_json(doc, path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_bytes(text.encode("utf-8"))


def _read_corpus(path: str):
    with open(path, "rb") as handle:
        return read_conllu(handle)


def _collect_attention_paths(args_attention) -> list[Path]:
    paths: list[Path] = []
    for raw in args_attention:
        p = Path(raw)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.attn")))
        else:
            paths.append(p)
    if not paths:
        raise ConfigError("no attention files found")
    return paths


def _load_pairs(corpus_path: str, attention_args) -> ranker.Corpus:
    """Pair sentences and attention records 1:1 by sentence id."""
    sentences = {s.sentence_id: s for s in _read_corpus(corpus_path)}
    pairs = []
    seen = set()
    for path in _collect_attention_paths(attention_args):
        with open(path, "rb") as handle:
            record = read_attention(handle)
        if record.sentence_id not in sentences:
            raise PairMismatchError(
                f"{path}: no sentence {record.sentence_id!r} in the corpus"
            )
        if record.sentence_id in seen:
            raise PairMismatchError(
                f"{path}: duplicate attention record for {record.sentence_id!r}"
            )
        seen.add(record.sentence_id)
        pairs.append((sentences[record.sentence_id], record))
    missing = sorted(set(sentences) - seen)
    if missing:
        raise PairMismatchError(
            f"sentences without attention records: {', '.join(missing[:5])}"
            + ("..." if len(missing) > 5 else "")
        )
    return pairs


def _ranking_doc(corpus, k: int) -> dict:
    ranking = depstats.compute_ranking(corpus, k)
    doc = ranking.to_json_dict()
    doc["total_weight"] = depstats.total_weighted_occurrences(corpus, ranking)
    return doc


def cmd_stats(args) -> int:
    corpus = _read_corpus(args.corpus)
    _dump_json(_ranking_doc(corpus, args.k), args.out)
    return 0


def cmd_rank(args) -> int:
    pairs = _load_pairs(args.corpus, args.attention)
    ranking = depstats.compute_ranking([s for s, _ in pairs], args.k)
    threshold = (
        args.threshold if args.threshold is not None else ranker.compute_threshold(pairs)
    )
    table = ranker.score_heads(pairs, ranking, threshold, args.direction)
    _dump_json(table.to_json_dict(), args.out)
    if args.arc_dump:
        with open(args.arc_dump, "w", encoding="utf-8") as handle:
            for row in ranker.iter_arc_attention_rows(pairs, args.direction):
                handle.write(json.dumps(row, sort_keys=True) + "\n")
    return 0


def _load_table(path: str) -> ranker.HeadScoreTable:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except ValueError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return ranker.HeadScoreTable.from_json_dict(doc)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: missing score-table field: {exc}") from exc


def _prune_config(args) -> pruner.PruneConfig:
    return pruner.PruneConfig(
        ratio=args.ratio,
        target_sparsity=args.sparsity,
        layer_collapse_fraction=args.collapse,
    )


def _candidate_mask(table, config: pruner.PruneConfig):
    """Selection without layer collapse (candidates for filtering)."""
    if config.ratio is not None:
        return pruner.prune_by_ratio(table, config.ratio)
    mask, _effective = pruner.prune_to_sparsity(table, config.target_sparsity)
    return mask


def _mask_report(table, mask, effective_ratio, config) -> dict:
    order = [
        [l, h] for l, h in pruner.ranked_heads(table) if (l, h) in mask.pruned_heads
    ]
    return {
        "pruned_heads": order,
        "pruned_layers": sorted(mask.pruned_layers),
        "sparsity": mask.sparsity,
        "cut": None if config.ratio is None else table.total_weight * config.ratio,
        "effective_ratio": effective_ratio,
        "total_weight": table.total_weight,
    }


def cmd_prune(args) -> int:
    table = _load_table(args.scores)
    config = _prune_config(args)
    mask, effective_ratio = pruner.apply_config(table, config)
    Path(args.out).write_bytes(write_mask(mask))
    _dump_json(_mask_report(table, mask, effective_ratio, config), args.report)
    return 0


def cmd_filter(args) -> int:
    table = _load_table(args.scores)
    candidates = sorted(_candidate_mask(table, _prune_config(args)).pruned_heads)
    oracle = cfilter.SubprocessOracle(args.oracle_cmd, timeout=args.oracle_timeout)
    mask, report = cfilter.filter_prune(
        candidates,
        oracle,
        args.tolerance,
        layers=table.layers,
        heads_per_layer=table.heads_per_layer,
        layer_collapse_fraction=args.collapse,
    )
    Path(args.out).write_bytes(write_mask(mask))
    _dump_json(report.to_json_dict(), args.report)
    return 0


def cmd_sweep_k(args) -> int:
    pairs = _load_pairs(args.corpus, args.attention)
    sentences = [s for s, _ in pairs]
    threshold = (
        args.threshold if args.threshold is not None else ranker.compute_threshold(pairs)
    )
    oracle = (
        cfilter.SubprocessOracle(args.oracle_cmd, timeout=args.oracle_timeout)
        if args.oracle_cmd
        else None
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = _prune_config(args)
    entries = []
    best = None
    for k in range(args.k_min, args.k_max + 1):
        ranking = depstats.compute_ranking(sentences, k)
        table = ranker.score_heads(pairs, ranking, threshold, args.direction)
        mask, effective_ratio = pruner.apply_config(table, config)
        mask_path = out_dir / f"mask_k{k}.json"
        mask_path.write_bytes(write_mask(mask))
        entry = {
            "k": k,
            "distinct_counter_values": len(set(table.counts.reshape(-1).tolist())),
            "sparsity": mask.sparsity,
            "effective_ratio": effective_ratio,
            "mask": mask_path.name,
        }
        if oracle is not None:
            metric = oracle(mask)
            entry["metric"] = metric
            if best is None or metric > best[1]:
                best = (k, metric)
        entries.append(entry)
    doc = {"threshold": threshold, "entries": entries}
    if best is not None:
        doc["best_k"] = best[0]
    _dump_json(doc, str(out_dir / "sweep.json"))
    return 0


def _toy_vocab(size: int) -> tuple[str, ...]:
    # Alternate short and long surface forms so some words map to two
    # model tokens and alignments stay non-trivial.
    words = []
    for i in range(size):
        words.append(f"w{i:02d}" if i % 2 == 0 else f"wordform{i:02d}")
    return tuple(words)


def _toy_config(args) -> toymodel.ToyConfig:
    return toymodel.ToyConfig(
        layers=args.layers,
        heads=args.heads,
        d_model=args.heads * args.d_head,
        d_head=args.d_head,
        vocab=_toy_vocab(args.vocab_size),
        seed=args.seed,
    )


def cmd_toy_gen(args) -> int:
    config = _toy_config(args)
    weights = toymodel.init_weights(config)
    corpus = toymodel.generate_corpus(
        config, args.sentences, args.min_words, args.max_words
    )
    pairs = toymodel.corpus_records(config, weights, corpus)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "corpus.conllu").write_bytes(write_conllu(corpus))
    for _sentence, record in pairs:
        (out_dir / f"{record.sentence_id}.attn").write_bytes(write_attention(record))
    _dump_json(
        {
            "seed": args.seed,
            "sentences": args.sentences,
            "layers": args.layers,
            "heads": args.heads,
            "d_head": args.d_head,
            "vocab_size": args.vocab_size,
            "min_words": args.min_words,
            "max_words": args.max_words,
        },
        str(out_dir / "gen.json"),
    )
    return 0


def cmd_toy_eval(args) -> int:
    config = _toy_config(args)
    weights = toymodel.init_weights(config)
    task = toymodel.make_task(config, size=args.task_size)
    with open(args.mask, "rb") as handle:
        mask = read_mask(handle)
    accuracy = toymodel.evaluate(config, weights, task, mask)
    sys.stdout.write(f"{accuracy}\n")
    return 0


def _add_selection_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ratio", type=float, default=None, help="prune ratio R in (0, 1]")
    parser.add_argument(
        "--sparsity", type=float, default=None, help="target head sparsity in [0, 1)"
    )
    parser.add_argument(
        "--collapse",
        type=float,
        default=1.0,
        help="layer-collapse fraction in (0, 1] (default: collapse only full layers)",
    )


def _add_toy_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--heads", type=int, default=2)
    parser.add_argument("--d-head", type=int, default=8)
    parser.add_argument("--vocab-size", type=int, default=12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sap",
        description="Prune transformer attention heads by their alignment with "
        "frequency-ranked syntactic dependencies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="rank dependency types by weighted frequency")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("rank", help="score every head against the dependency ranking")
    p.add_argument("--corpus", required=True)
    p.add_argument("--attention", nargs="+", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--direction", choices=ranker.DIRECTIONS, default="max")
    p.add_argument(
        "--threshold",
        type=float,
        default=None,
        help="override the computed global attention threshold",
    )
    p.add_argument("--arc-dump", default=None, help="write per-arc attention JSON lines here")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("prune", help="derive a prune mask from a score table")
    p.add_argument("--scores", required=True)
    _add_selection_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("filter", help="candidate filtering with an evaluation oracle")
    p.add_argument("--scores", required=True)
    _add_selection_flags(p)
    p.add_argument("--oracle-cmd", required=True, help="command template with {mask}")
    p.add_argument("--oracle-timeout", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=0.9)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("sweep-k", help="run the pipeline for a range of k values")
    p.add_argument("--corpus", required=True)
    p.add_argument("--attention", nargs="+", required=True)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=10)
    p.add_argument("--direction", choices=ranker.DIRECTIONS, default="max")
    p.add_argument("--threshold", type=float, default=None)
    _add_selection_flags(p)
    p.add_argument("--oracle-cmd", default=None)
    p.add_argument("--oracle-timeout", type=float, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep_k)

    toy = sub.add_parser("toy", help="deterministic toy-model fixtures")
    toy_sub = toy.add_subparsers(dest="toy_command", required=True)

    p = toy_sub.add_parser("gen", help="generate a synthetic corpus + attention files")
    _add_toy_model_flags(p)
    p.add_argument("--sentences", type=int, default=20)
    p.add_argument("--min-words", type=int, default=3)
    p.add_argument("--max-words", type=int, default=6)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_toy_gen)

    p = toy_sub.add_parser("eval", help="print toy-task accuracy under a mask")
    _add_toy_model_flags(p)
    p.add_argument("--task-size", type=int, default=32)
    p.add_argument("--mask", required=True)
    p.set_defaults(func=cmd_toy_eval)

    return parser


def _check_paths(args) -> None:
    """Reject missing inputs and unwritable output locations up front."""
    for attr in ("corpus", "scores", "mask"):
        value = getattr(args, attr, None)
        if value is not None and not Path(value).exists():
            raise ConfigError(f"--{attr} path does not exist: {value}")
    for value in getattr(args, "attention", None) or []:
        if not Path(value).exists():
            raise ConfigError(f"--attention path does not exist: {value}")
    for attr in ("out", "report", "arc_dump"):
        value = getattr(args, attr, None)
        if value is not None and not Path(value).parent.exists():
            raise ConfigError(f"directory for --{attr.replace('_', '-')} does not exist: {value}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _check_paths(args)
        return args.func(args)
    except SapError as exc:
        sys.stderr.write(f"sap: {type(exc).__name__}: {exc}\n")
        return _exit_code(exc)
    except OSError as exc:
        sys.stderr.write(f"sap: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
