#!/usr/bin/env python3
"""Grid-search the boundary-vs-length weight on a synthetic dev split.

Generates a stitched corpus, then sweeps alpha for the dp-length-pmi
method on a held-out development fraction and reports the best value
per metric.  Full rows land in --output/sweep/sweep.csv.

Example:
    python3 scripts/sweep_alpha.py --output /tmp/alpha-sweep
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from topicseg import save_documents
from topicseg.harness import (
    SweepSpec,
    SyntheticSpec,
    generate_synthetic,
    make_disjoint_sources,
    sweep,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--output", required=True, help="artifact directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-docs", type=int, default=16)
    parser.add_argument(
        "--alphas", type=float, nargs="+",
        default=[0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
    )
    parser.add_argument("--dev-fraction", type=float, default=0.5)
    args = parser.parse_args(argv)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    topics, sources = make_disjoint_sources(
        n_topics=3, sentences_per_topic=10, tokens_per_sentence=5,
        vocab_size=12, seed=args.seed,
    )
    corpus = generate_synthetic(SyntheticSpec(
        topics=topics, sources=sources, k_range=(4, 6), mean_len=5.0,
        dispersion=2.0, n_docs=args.n_docs, seed=args.seed,
    ))
    save_documents(corpus.documents, out / "docs.jsonl")
    save_documents(corpus.training_docs, out / "train.jsonl")

    spec = SweepSpec(
        documents=out / "docs.jsonl",
        provider={"type": "ngram", "train": "train.jsonl", "order": 3,
                  "delta": 0.1},
        scorer=None,
        grid={"method": ["dp-length-pmi"], "alpha": args.alphas},
        avg_segment_tokens=25.0,
        output=out / "sweep",
        seed=args.seed,
        dev_fraction=args.dev_fraction,
        base=out,
    )
    result = sweep(spec)
    for metric, info in sorted(result.best.items()):
        print(f"best {metric}: {info['value']} at {info['params']}")
    print(f"rows in {out / 'sweep' / 'sweep.csv'}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
