"""Command-line interface: segment, run, eval, sweep, synth, export-scores.

Exit codes: 0 success, 1 partial failure (some cells failed but the run
completed), 2 invalid input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any

from .corpus import load_documents, save_documents
from .harness import (
    CELL_ERRORS,
    METRIC_COLUMNS,
    HarnessError,
    SyntheticSpec,
    build_lexicon,
    build_provider,
    build_scorer,
    default_vocabulary,
    evaluate_files,
    export_score_tables,
    generate_synthetic,
    load_experiment_spec,
    load_sweep_spec,
    make_disjoint_sources,
    parse_method,
    run_cell,
    run_experiment,
    sweep,
    write_report,
)
from .segmenter import METHODS

logger = logging.getLogger(__name__)

INVALID_INPUT = CELL_ERRORS + (HarnessError, OSError, json.JSONDecodeError)


def _load_json_config(path: str | None) -> tuple[dict[str, Any] | None, Path]:
    if path is None:
        return None, Path(".")
    p = Path(path)
    obj = json.loads(p.read_text(encoding="utf-8"))
    return obj, p.parent


def cmd_segment(args: argparse.Namespace) -> int:
    docs = load_documents(args.docs)
    if args.doc_id is not None:
        docs = [d for d in docs if d.id == args.doc_id]
        if not docs:
            raise HarnessError(f"no document with id {args.doc_id!r} in {args.docs}")
    elif len(docs) != 1:
        raise HarnessError(
            f"{args.docs} holds {len(docs)} documents; pick one with --doc-id"
        )
    doc = docs[0]
    provider_cfg, provider_base = _load_json_config(args.provider)
    scorer_cfg, scorer_base = _load_json_config(args.scorer)
    provider = build_provider(provider_cfg, provider_base) if provider_cfg else None
    scorer = build_scorer(scorer_cfg, scorer_base)
    entry: dict[str, Any] = {"method": args.method}
    for key in ("alpha", "beta", "L", "k", "max_span"):
        value = getattr(args, key)
        if value is not None:
            entry[key] = value
    if args.topics is not None:
        entry["topics"] = args.topics
    method = parse_method(entry, scorer is not None)
    vocab = scorer.vocab if scorer is not None else default_vocabulary()
    result = run_cell(
        doc,
        method,
        provider,
        scorer,
        args.C,
        args.nt,
        args.avg_segment_tokens,
        args.seed,
        vocab,
    )
    if result.error is not None:
        print(f"error: {result.error}", file=sys.stderr)
        return 1
    line = json.dumps(result.prediction, sort_keys=True)
    if args.output:
        Path(args.output).write_text(line + "\n", encoding="utf-8")
    else:
        print(line)
    if result.metrics:
        print(
            json.dumps({"doc_id": doc.id, "metrics": result.metrics}, sort_keys=True),
            file=sys.stderr,
        )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    spec = load_experiment_spec(args.spec)
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    result = run_experiment(spec)
    print(
        f"{len(result.results)} cells, {len(result.failures)} failures -> {result.output}"
    )
    return result.exit_code


def cmd_eval(args: argparse.Namespace) -> int:
    results, macro = evaluate_files(args.ref, args.hyp, nt=args.nt)
    if args.output:
        write_report(Path(args.output), results, macro, include_predictions=False)
    else:
        header = ("doc_id", "method") + METRIC_COLUMNS
        print(",".join(header))
        for r in results:
            if r.error is not None:
                continue
            cells = [repr(r.metrics[m]) if m in r.metrics else "" for m in METRIC_COLUMNS]
            print(",".join([r.doc_id, r.label] + cells))
        for label in sorted(macro):
            cells = [
                repr(macro[label][m]) if m in macro[label] else ""
                for m in METRIC_COLUMNS
            ]
            print(",".join(["MACRO", label] + cells))
    failures = [r for r in results if r.error is not None]
    for r in failures:
        print(f"failed: {r.doc_id} {r.label}: {r.error}", file=sys.stderr)
    return 1 if failures else 0


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_sweep_spec(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    result = sweep(spec)
    for metric, info in sorted(result.best.items()):
        print(f"best {metric}: {info['value']} at {info['params']}")
    return result.exit_code


def cmd_synth(args: argparse.Namespace) -> int:
    topics, sources = make_disjoint_sources(
        n_topics=args.n_topics,
        sentences_per_topic=args.sentences_per_topic,
        tokens_per_sentence=args.tokens_per_sentence,
        vocab_size=args.vocab_size,
        seed=args.seed,
    )
    k_range = (args.k_min, args.k_max if args.k_max is not None else args.k_min)
    spec = SyntheticSpec(
        topics=topics,
        sources=sources,
        k_range=k_range,
        mean_len=args.L,
        dispersion=args.dispersion,
        n_docs=args.n_docs,
        seed=args.seed,
        oracle_mode=args.oracle,
    )
    corpus = generate_synthetic(spec)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    save_documents(corpus.documents, out / "docs.jsonl")
    save_documents(corpus.training_docs, out / "train.jsonl")
    lexicon = {
        "vocab": list(topics) + ["NO-TOPIC"],
        "keywords": build_lexicon(sources),
    }
    with open(out / "lexicon.json", "w", encoding="utf-8") as fh:
        json.dump(lexicon, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "vocab.txt", "w", encoding="utf-8") as fh:
        for label in list(topics) + ["NO-TOPIC"]:
            fh.write(label + "\n")
    if corpus.markov is not None:
        params = {
            "sentences": list(corpus.markov.sentences),
            "initial": list(corpus.markov.initial),
            "transition": [list(row) for row in corpus.markov.transition],
        }
        with open(out / "markov.json", "w", encoding="utf-8") as fh:
            json.dump(params, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"{len(corpus.documents)} documents, {len(corpus.training_docs)} training streams -> {out}")
    return 0


def cmd_export_scores(args: argparse.Namespace) -> int:
    provider_cfg, provider_base = _load_json_config(args.provider)
    if provider_cfg is None:
        raise HarnessError("export-scores needs --provider")
    provider = build_provider(provider_cfg, provider_base)
    docs = load_documents(args.docs)
    written, failures = export_score_tables(provider, docs, args.C, args.output)
    print(f"{len(written)} score tables -> {args.output}")
    for doc_id, error in failures:
        print(f"failed: {doc_id}: {error}", file=sys.stderr)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicseg",
        description="Topical segmentation: PMI boundary scoring, DP decoding, evaluation.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment one document with one method")
    p.add_argument("--docs", required=True, help="JSONL documents file")
    p.add_argument("--doc-id", help="document id when the file holds several")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--provider", help="provider config JSON file")
    p.add_argument("--scorer", help="topic scorer config JSON file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--max-span", dest="max_span", type=int)
    p.add_argument("--C", type=int, default=3)
    p.add_argument("--nt", type=int, default=2)
    p.add_argument("--avg-segment-tokens", type=float, default=485.0)
    p.add_argument("--topics", choices=("scorer", "uniform", "none"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="write the prediction line here instead of stdout")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("run", help="run an experiment spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score predictions against references")
    p.add_argument("--ref", required=True, help="JSONL documents with references")
    p.add_argument("--hyp", required=True, help="predictions JSONL")
    p.add_argument("--nt", type=int, default=2)
    p.add_argument("--output", help="directory for report.csv/report.json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="grid-search hyperparameters on the dev split")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic stitched corpus")
    p.add_argument("--n-topics", type=int, default=2)
    p.add_argument("--sentences-per-topic", type=int, default=6)
    p.add_argument("--tokens-per-sentence", type=int, default=5)
    p.add_argument("--vocab-size", type=int, default=12)
    p.add_argument("--n-docs", type=int, default=20)
    p.add_argument("--k-min", type=int, default=6)
    p.add_argument("--k-max", type=int)
    p.add_argument("--L", type=float, default=5.0)
    p.add_argument("--dispersion", type=float, default=2.0)
    p.add_argument("--oracle", action="store_true", help="Markov-chain oracle mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export-scores", help="precompute score tables to files")
    p.add_argument("--docs", required=True)
    p.add_argument("--provider", required=True, help="provider config JSON file")
    p.add_argument("--C", type=int, default=3)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_export_scores)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except INVALID_INPUT as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
