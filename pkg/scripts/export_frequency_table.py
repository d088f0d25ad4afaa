#!/usr/bin/env python3
"""Emit a word<TAB>zipf TSV from an installed frequency provider.

The ranker consumes plain two-column TSV files; this helper builds one
from the `wordfreq` package (install separately) for any language it
covers, either for an explicit word list or for the provider's top-N list.

Usage:
    python scripts/export_frequency_table.py --lang en --top 50000 > freq_en.tsv
    python scripts/export_frequency_table.py --lang es --words words.txt > freq_es.tsv
"""

from __future__ import annotations

import argparse
import sys


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lang", required=True, help="language code understood by wordfreq")
    parser.add_argument("--top", type=int, default=50000, help="emit the top-N most frequent words")
    parser.add_argument("--words", help="file with one word per line (overrides --top)")
    args = parser.parse_args()

    try:
        from wordfreq import top_n_list, zipf_frequency
    except ImportError:
        print(
            "the 'wordfreq' package is not installed; `pip install wordfreq` first",
            file=sys.stderr,
        )
        return 1

    if args.words:
        with open(args.words, encoding="utf-8") as fh:
            words = [line.strip() for line in fh if line.strip()]
    else:
        words = top_n_list(args.lang, args.top)

    for word in words:
        zipf = zipf_frequency(word, args.lang)
        if zipf > 0:
            sys.stdout.write(f"{word}\t{zipf}\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
