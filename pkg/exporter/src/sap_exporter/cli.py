"""Command-line front end mirroring the ExportJob fields."""

from __future__ import annotations

import argparse
import sys

from .errors import BackendUnavailable, ExportError
from .export import ExportJob, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sap-export",
        description="Dump per-sentence attention tensors (SAPATTN1) and "
        "dependency parses (CoNLL-U) for a dataset.",
    )
    parser.add_argument("--model", required=True, help="HuggingFace model id or path")
    parser.add_argument(
        "--dataset",
        required=True,
        help="text file with one sentence per line, or a datasets identifier",
    )
    parser.add_argument("--split", default="train")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--max-sentences", type=int, default=None)
    parser.add_argument("--max-seq-len", type=int, default=128)
    parser.add_argument(
        "--spacy-model",
        default="en_core_web_sm",
        help="spaCy pipeline used for dependency parses",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        model=args.model,
        dataset=args.dataset,
        split=args.split,
        out_dir=args.out,
        max_sentences=args.max_sentences,
        max_seq_len=args.max_seq_len,
    )
    try:
        from .parsing import SpacyParser

        parser = SpacyParser(args.spacy_model)
        manifest = export(job, parser=parser)
    except BackendUnavailable as exc:
        sys.stderr.write(f"sap-export: {exc}\n")
        return 2
    except ExportError as exc:
        sys.stderr.write(f"sap-export: {exc}\n")
        return 1
    total = len(manifest.exported) + len(manifest.skipped)
    sys.stderr.write(
        f"sap-export: {len(manifest.exported)} exported, "
        f"{len(manifest.skipped)} skipped of {total} sentences\n"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
