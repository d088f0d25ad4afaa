#!/usr/bin/env python3
"""Drive the suffix-length, ranking-feature, and pool-size sweeps in one go.

Writes one tidy TSV per axis into --out-dir. Point --url at a running
model server for real-model runs, or leave the default toy backend for a
fast smoke pass over the bundled fixture dataset.

Usage:
    python scripts/run_ablation_sweeps.py --dataset tests/data/toy_eval.tsv --out-dir runs/
    python scripts/run_ablation_sweeps.py --dataset tsar_en_test.tsv --url http://localhost:8400 \
        --lang eng_Latn --embeddings cc.en.300.vec --freq freq_en.tsv --out-dir runs/
"""

from __future__ import annotations

import argparse
import pathlib
import subprocess
import sys

AXES = ["suffix_length", "k_candidates", "ranking_features"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--url", help="model server URL; omit for the toy backend")
    parser.add_argument("--lang")
    parser.add_argument("--embeddings")
    parser.add_argument("--freq")
    parser.add_argument("--workers", default="4")
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    base = [sys.executable, "-m", "lexsimp.cli", "sweep", args.dataset, "--workers", args.workers]
    if args.url:
        base += ["--backend", "remote", "--url", args.url]
    if args.lang:
        base += ["--lang", args.lang]

    ranked = bool(args.embeddings and args.freq)
    if ranked:
        base += ["--embeddings", args.embeddings, "--freq", args.freq]

    for axis in AXES:
        if axis == "ranking_features" and not ranked:
            print(f"skipping {axis}: needs --embeddings and --freq", file=sys.stderr)
            continue
        cmd = list(base) + ["--axis", axis, "--out", str(out_dir / f"sweep_{axis}.tsv")]
        if axis != "ranking_features" and not ranked:
            cmd.append("--no-ranking")
        print("+", " ".join(cmd), file=sys.stderr)
        result = subprocess.run(cmd)
        if result.returncode != 0:
            return result.returncode
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
