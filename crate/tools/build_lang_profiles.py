"""Regenerate crates/core/data/profiles/*.txt.

Trigram weights are accumulated from the `wordfreq` word-frequency tables
(pip download wordfreq; unpack the wheel): every word contributes its
frequency to each of its space-padded, lowercased character trigrams.
The top PROFILE_SIZE trigrams are written in rank order, one per line,
with "_" standing for the padding space.

    python3 tools/build_lang_profiles.py /path/to/wordfreq/data
"""

import collections
import gzip
import pathlib
import sys

import msgpack

PROFILE_SIZE = 2000
LANGS = ["de", "en", "es", "fr", "pt"]


def trigram_weights(path):
    buckets = msgpack.load(gzip.open(path), raw=False)
    weights = collections.Counter()
    # buckets[0] is the header; bucket i holds words of frequency 10^(-i/100)
    for i, bucket in enumerate(buckets[1:]):
        freq = 10 ** (-i / 100)
        for word in bucket:
            if not all(ch.isalpha() for ch in word):
                continue
            padded = " " + word.lower() + " "
            for j in range(len(padded) - 2):
                weights[padded[j : j + 3]] += freq
    return weights


def main():
    data = pathlib.Path(sys.argv[1])
    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/data/profiles"
    for code in LANGS:
        weights = trigram_weights(data / f"large_{code}.msgpack.gz")
        ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))[:PROFILE_SIZE]
        lines = "".join(g.replace(" ", "_") + "\n" for g, _ in ranked)
        (out / f"{code}.txt").write_text(lines, encoding="utf-8")
        print(code, len(ranked))


if __name__ == "__main__":
    main()
