#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The covmis Authors
"""Writes data/fixtures/covmis_stance_fixture.jsonl.

Stand-in for the published label file: 2631 pairs over 111 items with the
published per-query-type label counts. Fact-check URL pairs are the
automatically labeled Against pairs. Ids and item assignment are synthetic.
"""

import json
import random
import sys
from pathlib import Path

# (query_type, favor, against, neither)
COUNTS = [
    ("title", 195, 38, 3),
    ("news_url", 336, 42, 104),
    ("factcheck_url", 0, 604, 0),
    ("keywords", 745, 363, 201),
]
ITEMS = 111


def main(out: Path) -> None:
    rng = random.Random(20260101)
    rows = []
    for qt, *per_label in COUNTS:
        for label, n in zip(("favor", "against", "neither"), per_label):
            rows.extend((qt, label) for _ in range(n))
    rng.shuffle(rows)
    with out.open("w", encoding="utf-8", newline="\n") as f:
        for i, (qt, label) in enumerate(rows):
            rec = {
                "misinfo_id": f"m{(i % ITEMS) + 1:03d}",
                "tweet_id": f"t{i + 1:06d}",
                "query_type": qt,
                "label": label,
                "auto_labeled": qt == "factcheck_url",
            }
            f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    root = Path(__file__).resolve().parent.parent
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else root / "data/fixtures/covmis_stance_fixture.jsonl")
