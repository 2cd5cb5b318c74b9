"""The whole pipeline through the CLI, file formats included.

Generates a synthetic corpus + attention files, ranks dependency types,
scores heads, prunes by ratio, then runs candidate filtering with the
toy evaluator wired in as a subprocess oracle.

Run: python demos/05_full_pipeline_cli.py
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def sap(*args):
    argv = [sys.executable, "-m", "sap.cli", *map(str, args)]
    print("$ sap " + " ".join(map(str, args)))
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(proc.stderr)
    return proc.stdout


with tempfile.TemporaryDirectory() as tmp:
    work = Path(tmp)

    # 1. fixtures: corpus.conllu + one SAPATTN1 file per sentence
    sap("toy", "gen", "--out", work / "data", "--seed", 11, "--sentences", 12)
    files = sorted(p.name for p in (work / "data").iterdir())
    print(f"  wrote {len(files)} files: {files[:3]} ...\n")

    # 2. dependency statistics
    sap("stats", "--corpus", work / "data" / "corpus.conllu", "--k", 3,
        "--out", work / "ranking.json")
    ranking = json.loads((work / "ranking.json").read_text())
    top = [t["label"] for t in ranking["types"][:3]]
    print(f"  top-3 dependency types: {top}, S = {ranking['total_weight']}\n")

    # 3. head scores
    sap("rank", "--corpus", work / "data" / "corpus.conllu",
        "--attention", work / "data", "--k", 3, "--out", work / "table.json")
    table = json.loads((work / "table.json").read_text())
    print(f"  threshold = {table['threshold']:.5f}, counters = {table['counts']}\n")

    # 4. mask by ratio
    out = sap("prune", "--scores", work / "table.json", "--ratio", 0.5,
              "--out", work / "mask.json")
    print("  report:", " ".join(out.split()), "\n")

    # 5. candidate filtering with the toy evaluator as subprocess oracle
    oracle = f"{sys.executable} -m sap.cli toy eval --seed 11 --mask {{mask}}"
    sap("filter", "--scores", work / "table.json", "--ratio", 0.5,
        "--oracle-cmd", oracle, "--tolerance", 0.9,
        "--out", work / "cf_mask.json", "--report", work / "cf_report.json")
    report = json.loads((work / "cf_report.json").read_text())
    mask = json.loads((work / "cf_mask.json").read_text())
    print(f"  CF stopped: {report['stop_reason']}; "
          f"final mask prunes {len(mask['pruned_heads'])} heads")

    # 6. sweep k=1..6 and pick the best-scoring mask
    sap("sweep-k", "--corpus", work / "data" / "corpus.conllu",
        "--attention", work / "data", "--k-min", 1, "--k-max", 6,
        "--sparsity", 0.25, "--oracle-cmd", oracle, "--out", work / "sweep")
    sweep = json.loads((work / "sweep" / "sweep.json").read_text())
    print(f"  best k = {sweep['best_k']} of "
          f"{[e['k'] for e in sweep['entries']]}")
