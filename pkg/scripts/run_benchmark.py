#!/usr/bin/env python3
"""Synthetic stitched-corpus benchmark for all segmentation methods.

Generates a corpus with known gold boundaries, trains a trigram scoring
provider on in-topic sentence pairs, runs every method on every
document, and prints the macro-averaged metric table.  Artifacts
(predictions, failures, CSV and JSON reports) land in --output.

Example:
    python3 scripts/run_benchmark.py --output /tmp/bench --n-docs 20
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from topicseg import save_documents
from topicseg.harness import (
    METRIC_COLUMNS,
    ExperimentSpec,
    SyntheticSpec,
    build_lexicon,
    generate_synthetic,
    make_disjoint_sources,
    parse_method,
    run_experiment,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--output", required=True, help="artifact directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-docs", type=int, default=20)
    parser.add_argument("--n-topics", type=int, default=3)
    parser.add_argument("--k", type=int, default=6, help="segments per document")
    parser.add_argument("--L", type=float, default=5.0, help="mean segment length")
    parser.add_argument("--dispersion", type=float, default=2.0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    topics, sources = make_disjoint_sources(
        n_topics=args.n_topics,
        sentences_per_topic=10,
        tokens_per_sentence=5,
        vocab_size=12,
        seed=args.seed,
    )
    corpus = generate_synthetic(SyntheticSpec(
        topics=topics,
        sources=sources,
        k_range=(args.k, args.k),
        mean_len=args.L,
        dispersion=args.dispersion,
        n_docs=args.n_docs,
        seed=args.seed,
    ))
    save_documents(corpus.documents, out / "docs.jsonl")
    save_documents(corpus.training_docs, out / "train.jsonl")
    lexicon = {"vocab": list(topics) + ["NO-TOPIC"],
               "keywords": build_lexicon(sources)}
    (out / "lexicon.json").write_text(
        json.dumps(lexicon, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    entries = [
        {"method": "uniform", "k": args.k, "topics": "uniform"},
        {"method": "local-pmi", "k": args.k},
        {"method": "dp-length-pmi", "k": args.k, "alpha": 0.8, "L": args.L},
        {"method": "dp-topic", "k": args.k, "alpha": 0.2, "beta": 0.2,
         "L": args.L},
    ]
    spec = ExperimentSpec(
        documents=out / "docs.jsonl",
        provider={"type": "ngram", "train": "train.jsonl", "order": 3,
                  "delta": 0.1},
        scorer={"type": "lexicon", "path": "lexicon.json"},
        methods=tuple(parse_method(e, True) for e in entries),
        avg_segment_tokens=args.L * 5,
        output=out / "run",
        seed=args.seed,
        workers=args.workers,
        base=out,
    )
    result = run_experiment(spec)

    width = max(len(m.label) for m in spec.methods)
    print(f"{'method':<{width}}  " + "  ".join(f"{m:>6}" for m in METRIC_COLUMNS))
    for label in sorted(result.macro):
        cells = [
            f"{result.macro[label][m]:6.3f}" if m in result.macro[label]
            else " " * 6
            for m in METRIC_COLUMNS
        ]
        print(f"{label:<{width}}  " + "  ".join(cells))
    for r in result.failures:
        print(f"failed: {r.doc_id} {r.label}: {r.error}", file=sys.stderr)
    print(f"artifacts in {out / 'run'}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
