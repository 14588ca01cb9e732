"""Batch exporter: one score-table JSON file per document.

Writes the same table shape the /score endpoint returns, wrapped with
the document id and window size, so downstream consumers can read
scores from disk instead of holding a live service connection. A
per-document failure is reported and skipped; the rest still export.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

from .config import SidecarError, add_model_args, settings_from_args
from .corpus import load_documents
from .models import ModelBundle


def safe_filename(doc_id: str) -> str:
    return re.sub(r"[^-._a-zA-Z0-9]", "_", doc_id) + ".json"


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lm-sidecar-export",
        description="score every document in a corpus and write tables to disk",
    )
    parser.add_argument("--docs", required=True, help="JSONL of {id, sentences}")
    parser.add_argument("--C", type=int, default=3, help="window size in sentences")
    parser.add_argument("--output", required=True, help="directory for score tables")
    add_model_args(parser)
    args = parser.parse_args(argv)
    if args.C < 1:
        parser.error(f"--C must be >= 1, got {args.C}")

    try:
        settings = settings_from_args(args)
        docs = load_documents(Path(args.docs))
    except (SidecarError, OSError) as e:
        print(str(e), file=sys.stderr)
        return 2

    bundle = ModelBundle(settings)
    try:
        bundle.load()
    except Exception as e:
        print(f"model load failed: {e}", file=sys.stderr)
        return 1

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, str] = {}
    failures: list[str] = []
    for doc in docs:
        name = safe_filename(doc.id)
        if name in written:
            failures.append(
                f"failed: {doc.id}: filename {name} collides with {written[name]}"
            )
            continue
        try:
            entries = bundle.score_windows(doc.sentences, args.C)
        except SidecarError as e:
            failures.append(f"failed: {doc.id}: {e}")
            continue
        payload = {"doc_id": doc.id, "C": args.C, "entries": entries}
        (out / name).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        written[name] = doc.id

    print(f"{len(written)} score tables -> {out}")
    for line in failures:
        print(line, file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
