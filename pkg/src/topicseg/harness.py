"""Experiment runner, hyperparameter sweep, synthetic corpora, score export.

Everything here is a pure function of (inputs, flags, seed): results are
emitted in sorted order with stable float formatting, so identical runs
produce byte-identical artifacts regardless of worker count.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .corpus import (
    CorpusError,
    Document,
    Segmentation,
    TopicSequence,
    TopicVocabulary,
    default_vocabulary,
    estimate_k,
    load_documents,
    load_vocabulary,
    round_half_away,
)
from .metrics import (
    MetricError,
    boundary_f1,
    boundary_similarity,
    edit_distance,
    gestalt_similarity,
    seg_similarity,
    window_diff,
)
from .scoring import (
    FileProvider,
    NGramProvider,
    RemoteProvider,
    ScoreEntry,
    ScoreProvider,
    ScoreTable,
    ScoringError,
    build_score_table,
)
from .segmenter import (
    BoundaryCost,
    SegmenterConfig,
    SegmenterError,
    dp_length_objective,
    dp_topic_objective,
    segment_dp_length,
    segment_dp_topic,
    segment_local,
    segment_uniform,
)
from .topics import (
    LexiconScorer,
    MatrixScorer,
    RemoteScorer,
    TopicError,
    TopicScorer,
    assign_topics,
    sample_uniform_topics,
)

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ("F1", "WD", "S-sim", "B-sim", "SM", "Edit")
# larger is better for all but these two
MINIMIZED_METRICS = {"WD", "Edit"}

CELL_ERRORS = (CorpusError, ScoringError, SegmenterError, TopicError, MetricError)


class HarnessError(Exception):
    """Malformed experiment, sweep, or synthetic specification."""


def derive_seed(*parts: Any) -> int:
    """Stable 64-bit seed from arbitrary key parts; independent of hash randomization."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


# ---------------------------------------------------------------------------
# synthetic corpora


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a stitched corpus with known gold boundaries and topics.

    Each document concatenates segments; segment lengths are Gaussian draws
    around mean_len (dispersion 0 pins them to the mean), and each segment's
    sentences come from its topic's source pool. In oracle mode documents are
    instead emitted by a first-order Markov chain over the pooled sentence
    inventory that restarts independently at every gold boundary.
    """

    topics: tuple[str, ...]
    sources: Mapping[str, tuple[str, ...]]
    k_range: tuple[int, int]
    mean_len: float
    dispersion: float
    n_docs: int
    seed: int
    oracle_mode: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "topics", tuple(self.topics))
        object.__setattr__(
            self, "sources", {t: tuple(v) for t, v in dict(self.sources).items()}
        )
        if len(self.topics) < 2:
            raise HarnessError("need at least 2 topics")
        if len(set(self.topics)) != len(self.topics):
            raise HarnessError("duplicate topic labels")
        for t in self.topics:
            if not self.sources.get(t):
                raise HarnessError(f"topic {t!r} has an empty source pool")
        lo, hi = self.k_range
        if not 1 <= lo <= hi:
            raise HarnessError(f"invalid k_range {self.k_range}")
        if not self.mean_len > 0:
            raise HarnessError(f"mean_len must be positive, got {self.mean_len}")
        if self.dispersion < 0:
            raise HarnessError(f"dispersion must be >= 0, got {self.dispersion}")
        if self.n_docs < 1:
            raise HarnessError(f"n_docs must be >= 1, got {self.n_docs}")


@dataclass(frozen=True)
class MarkovParams:
    """First-order sentence chain: restart distribution and transition rows."""

    sentences: tuple[str, ...]
    initial: tuple[float, ...]
    transition: tuple[tuple[float, ...], ...]

    def index(self, sentence: str) -> int:
        return self.sentences.index(sentence)


@dataclass
class SyntheticCorpus:
    documents: list[Document]
    training_docs: list[Document]
    spec: SyntheticSpec
    markov: MarkovParams | None = None


def make_disjoint_sources(
    n_topics: int = 2,
    sentences_per_topic: int = 6,
    tokens_per_sentence: int = 5,
    vocab_size: int = 12,
    seed: int = 0,
) -> tuple[tuple[str, ...], dict[str, tuple[str, ...]]]:
    """Per-topic sentence pools over pairwise-disjoint token vocabularies."""
    rng = random.Random(seed)
    topics = tuple(f"T{t:02d}" for t in range(n_topics))
    sources: dict[str, tuple[str, ...]] = {}
    for ti, topic in enumerate(topics):
        vocab = [f"w{ti:02d}x{v:02d}" for v in range(vocab_size)]
        pool: list[str] = []
        seen: set[str] = set()
        while len(pool) < sentences_per_topic:
            sentence = " ".join(rng.choice(vocab) for _ in range(tokens_per_sentence))
            if sentence not in seen:
                seen.add(sentence)
                pool.append(sentence)
        sources[topic] = tuple(pool)
    return topics, sources


def build_lexicon(
    sources: Mapping[str, Sequence[str]], weight: float = 2.0
) -> dict[str, dict[str, float]]:
    """Keyword weights marking each topic's source tokens as its own."""
    lexicon: dict[str, dict[str, float]] = {}
    for topic in sorted(sources):
        tokens = sorted({t for s in sources[topic] for t in s.split()})
        lexicon[topic] = {t: weight for t in tokens}
    return lexicon


def _pair_coverage_docs(spec: SyntheticSpec) -> list[Document]:
    """Every ordered in-topic sentence pair as a tiny training document.

    Guarantees that any seam an LM can meet inside a generated segment was
    observed in training, so in-topic boundaries score high joint probability
    while cross-topic seams never do.
    """
    docs = []
    for ti, topic in enumerate(spec.topics):
        pool = spec.sources[topic]
        idx = 0
        for a in pool:
            for b in pool:
                docs.append(
                    Document.build(id=f"train-{ti:02d}-{idx:04d}", sentences=[a, b])
                )
                idx += 1
    return docs


def _sample_markov(spec: SyntheticSpec, rng: random.Random) -> MarkovParams:
    inventory: list[str] = []
    for topic in spec.topics:
        inventory.extend(spec.sources[topic])
    if len(set(inventory)) != len(inventory):
        raise HarnessError("oracle mode needs globally unique source sentences")

    def distribution(size: int) -> tuple[float, ...]:
        raw = [rng.uniform(0.2, 1.0) for _ in range(size)]
        total = sum(raw)
        return tuple(v / total for v in raw)

    m = len(inventory)
    return MarkovParams(
        sentences=tuple(inventory),
        initial=distribution(m),
        transition=tuple(distribution(m) for _ in range(m)),
    )


def generate_synthetic(spec: SyntheticSpec) -> SyntheticCorpus:
    """Deterministic stitched corpus with gold references; see SyntheticSpec."""
    rng = random.Random(spec.seed)
    markov = _sample_markov(spec, rng) if spec.oracle_mode else None
    documents: list[Document] = []
    for d in range(spec.n_docs):
        k = rng.randint(*spec.k_range)
        lengths = [
            max(1, round_half_away(rng.gauss(spec.mean_len, spec.dispersion)))
            for _ in range(k)
        ]
        walk = [rng.choice(spec.topics)]
        for _ in range(1, k):
            walk.append(rng.choice([t for t in spec.topics if t != walk[-1]]))
        sentences: list[str] = []
        if markov is not None:
            indices = range(len(markov.sentences))
            for length in lengths:
                prev = rng.choices(indices, weights=markov.initial)[0]
                sentences.append(markov.sentences[prev])
                for _ in range(1, length):
                    prev = rng.choices(indices, weights=markov.transition[prev])[0]
                    sentences.append(markov.sentences[prev])
        else:
            for topic, length in zip(walk, lengths):
                pool = spec.sources[topic]
                sentences.extend(rng.choice(pool) for _ in range(length))
        boundaries = []
        total = 0
        for length in lengths[:-1]:
            total += length
            boundaries.append(total)
        documents.append(
            Document.build(
                id=f"synth-{d:04d}",
                sentences=sentences,
                ref_boundaries=boundaries,
                ref_topics=walk,
            )
        )
    return SyntheticCorpus(
        documents=documents,
        training_docs=_pair_coverage_docs(spec),
        spec=spec,
        markov=markov,
    )


def markov_score_table(doc: Document, params: MarkovParams) -> ScoreTable:
    """Single-sentence-window scores under the true chain, for oracle-mode docs.

    logp_left/right are restart (marginal) log-probs; logp_joint is restart of
    the left sentence then one transition, so log-PMI reduces to
    log T(right | left) - log pi(right).
    """
    entries: dict[int, ScoreEntry] = {}
    for b in range(1, doc.n):
        i = params.index(doc.sentences[b - 1])
        j = params.index(doc.sentences[b])
        lp_left = math.log(params.initial[i])
        lp_right = math.log(params.initial[j])
        lp_joint = lp_left + math.log(params.transition[i][j])
        entries[b] = ScoreEntry(
            b=b, logp_joint=lp_joint, logp_left=lp_left, logp_right=lp_right
        )
    return ScoreTable(doc_id=doc.id, C=1, entries=entries)


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass(frozen=True)
class MethodSpec:
    """One experiment cell recipe: segmenter config plus topic source.

    topic_mode picks where per-segment labels come from for methods that do
    not decode them jointly: the configured scorer, seeded uniform sampling,
    or none. dp-topic always emits its own.
    """

    config: SegmenterConfig
    label: str
    topic_mode: str

    def __post_init__(self) -> None:
        if self.topic_mode not in ("scorer", "uniform", "none"):
            raise HarnessError(f"unknown topic mode {self.topic_mode!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    documents: Path
    provider: Mapping[str, Any]
    scorer: Mapping[str, Any] | None
    methods: tuple[MethodSpec, ...]
    avg_segment_tokens: float
    output: Path
    seed: int = 0
    C: int = 3
    nt: int = 2
    workers: int = 1
    base: Path = Path(".")

    def __post_init__(self) -> None:
        if not self.methods:
            raise HarnessError("methods list is empty")
        if len({m.label for m in self.methods}) != len(self.methods):
            raise HarnessError("method labels are not unique")
        if not self.avg_segment_tokens > 0:
            raise HarnessError("avg_segment_tokens must be positive")
        if self.C < 1:
            raise HarnessError(f"C must be >= 1, got {self.C}")
        if self.nt < 2:
            raise HarnessError(f"nt must be >= 2, got {self.nt}")
        if self.workers < 1:
            raise HarnessError(f"workers must be >= 1, got {self.workers}")


def parse_method(entry: Mapping[str, Any], scorer_configured: bool) -> MethodSpec:
    entry = dict(entry)
    if "method" not in entry:
        raise HarnessError("method entry missing 'method'")
    label = str(entry.pop("label", entry["method"]))
    topic_mode = entry.pop("topics", None)
    if topic_mode is None:
        if entry["method"] == "dp-topic" or scorer_configured:
            topic_mode = "scorer"
        elif entry["method"] == "uniform":
            topic_mode = "uniform"
        else:
            topic_mode = "none"
    try:
        config = SegmenterConfig(**entry)
    except TypeError as e:
        raise HarnessError(f"bad method entry: {e}") from None
    return MethodSpec(config=config, label=label, topic_mode=str(topic_mode))


def load_experiment_spec(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise HarnessError(f"{path}: malformed spec: {e}") from None
    for key in ("documents", "provider", "methods", "avg_segment_tokens", "output"):
        if key not in obj:
            raise HarnessError(f"{path}: spec missing field {key!r}")
    base = path.parent
    scorer = obj.get("scorer")
    return ExperimentSpec(
        documents=base / obj["documents"],
        provider=obj["provider"],
        scorer=scorer,
        methods=tuple(parse_method(m, scorer is not None) for m in obj["methods"]),
        avg_segment_tokens=float(obj["avg_segment_tokens"]),
        output=base / obj["output"],
        seed=int(obj.get("seed", 0)),
        C=int(obj.get("C", 3)),
        nt=int(obj.get("nt", 2)),
        workers=int(obj.get("workers", 1)),
        base=base,
    )


def build_provider(config: Mapping[str, Any], base: Path) -> ScoreProvider:
    kind = config.get("type")
    if kind == "ngram":
        if "train" not in config:
            raise HarnessError("ngram provider needs a 'train' documents path")
        train_docs = load_documents(base / config["train"])
        weights = config.get("weights")
        return NGramProvider.train(
            train_docs,
            order=int(config.get("order", 3)),
            delta=float(config.get("delta", 0.1)),
            weights=None if weights is None else tuple(float(w) for w in weights),
        )
    if kind == "file":
        if "dir" in config:
            return FileProvider.from_dir(base / config["dir"])
        if "paths" in config:
            return FileProvider.from_paths(base / p for p in config["paths"])
        raise HarnessError("file provider needs 'dir' or 'paths'")
    if kind == "remote":
        return RemoteProvider(
            str(config["base_url"]), timeout=float(config.get("timeout", 60.0))
        )
    raise HarnessError(f"unknown provider type {kind!r}")


def build_scorer(config: Mapping[str, Any] | None, base: Path) -> TopicScorer | None:
    if config is None:
        return None
    kind = config.get("type")
    if kind == "lexicon":
        return LexiconScorer.from_path(base / config["path"])
    if kind == "matrix":
        if "dir" in config:
            paths: Sequence[Path] = sorted((base / config["dir"]).glob("*.json"))
        else:
            paths = [base / p for p in config.get("paths", ())]
        return MatrixScorer.from_paths(paths)
    if kind == "remote":
        vocab = (
            load_vocabulary(base / config["vocab"])
            if "vocab" in config
            else default_vocabulary()
        )
        return RemoteScorer(
            str(config["base_url"]), vocab, timeout=float(config.get("timeout", 60.0))
        )
    raise HarnessError(f"unknown scorer type {kind!r}")


# ---------------------------------------------------------------------------
# cell execution


@dataclass
class CellResult:
    doc_id: str
    label: str
    prediction: dict[str, Any] | None
    metrics: dict[str, float]
    error: str | None = None


def score_cell(
    doc: Document, seg: Segmentation, topics: TopicSequence | None, nt: int
) -> dict[str, float]:
    out: dict[str, float] = {}
    if doc.ref_boundaries is not None:
        ref = doc.ref_boundaries
        out["F1"] = boundary_f1(ref, seg)
        out["WD"] = window_diff(ref, seg)
        out["S-sim"] = seg_similarity(ref, seg, nt)
        out["B-sim"] = boundary_similarity(ref, seg, nt)
    if doc.ref_topics is not None and topics is not None:
        out["SM"] = gestalt_similarity(doc.ref_topics, topics)
        out["Edit"] = edit_distance(doc.ref_topics, topics)
    return out


def run_cell(
    doc: Document,
    method: MethodSpec,
    provider: ScoreProvider | None,
    scorer: TopicScorer | None,
    C: int,
    nt: int,
    avg_segment_tokens: float,
    seed: int,
    vocab: TopicVocabulary,
) -> CellResult:
    """Segment one document with one method and score it against references."""
    cfg = method.config
    try:
        k = cfg.k if cfg.k is not None else min(doc.n, estimate_k(doc, avg_segment_tokens))
        if k > doc.n:
            raise SegmenterError(f"{doc.id}: k={k} exceeds {doc.n} sentences")
        L = cfg.resolved_L(doc.n, k)
        cost: BoundaryCost | None = None
        if cfg.method != "uniform":
            if provider is None:
                raise ScoringError(f"{doc.id}: method {cfg.method} needs a score provider")
            table = build_score_table(provider, doc, C)
            if cfg.method.endswith("-nsp"):
                cost = BoundaryCost.from_nsp(table, doc.n)
            else:
                cost = BoundaryCost.from_pmi(table, doc.n)
        topics: TopicSequence | None = None
        if cfg.method == "uniform":
            seg = segment_uniform(doc.n, k)
            total = 0.0
        elif cfg.method in ("local-pmi", "local-nsp"):
            seg = segment_local(cost, k)
            total = 0.0
            for b in seg.boundaries:
                total += cost[b]
        elif cfg.method in ("dp-length-pmi", "dp-length-nsp"):
            seg = segment_dp_length(
                cost, k, alpha=cfg.alpha, L=L, max_span=cfg.resolved_max_span(L)
            )
            total = dp_length_objective(cost, seg, cfg.alpha, L)
        elif cfg.method == "dp-topic":
            if scorer is None:
                raise TopicError(f"{doc.id}: dp-topic needs a topic scorer")
            seg, topics = segment_dp_topic(
                doc,
                cost,
                scorer,
                k,
                alpha=cfg.alpha,
                beta=cfg.beta,
                L=L,
                max_span=cfg.resolved_max_span(L),
            )
            total = dp_topic_objective(
                doc, cost, scorer, seg, topics, cfg.alpha, cfg.beta, L
            )
        else:
            raise SegmenterError(f"unhandled method {cfg.method!r}")
        if topics is None and method.topic_mode == "scorer":
            if scorer is None:
                raise TopicError(f"{doc.id}: topic mode 'scorer' needs a scorer")
            topics = assign_topics(doc, seg, scorer)
        elif topics is None and method.topic_mode == "uniform":
            topics = sample_uniform_topics(
                seg.k, vocab, derive_seed(seed, doc.id, method.label)
            )
        metrics = score_cell(doc, seg, topics, nt)
    except CELL_ERRORS as e:
        logger.warning("cell failed: doc=%s method=%s: %s", doc.id, method.label, e)
        return CellResult(doc.id, method.label, None, {}, error=str(e))
    prediction = {
        "doc_id": doc.id,
        "method": method.label,
        "boundaries": list(seg.boundaries),
        "topics": None if topics is None else list(topics.topics),
        "total_cost": total,
    }
    return CellResult(doc.id, method.label, prediction, metrics)


def _run_cells(
    docs: Sequence[Document],
    methods: Sequence[MethodSpec],
    provider: ScoreProvider | None,
    scorer: TopicScorer | None,
    C: int,
    nt: int,
    avg_segment_tokens: float,
    seed: int,
    vocab: TopicVocabulary,
    workers: int,
) -> list[CellResult]:
    cells = [(doc, m) for doc in docs for m in methods]

    def one(cell: tuple[Document, MethodSpec]) -> CellResult:
        doc, m = cell
        return run_cell(doc, m, provider, scorer, C, nt, avg_segment_tokens, seed, vocab)

    if workers == 1:
        results = [one(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, cells))
    return sorted(results, key=lambda r: (r.doc_id, r.label))


def macro_average(results: Sequence[CellResult]) -> dict[str, dict[str, float]]:
    """Per-method mean of every metric over the documents that reported it."""
    out: dict[str, dict[str, float]] = {}
    for label in sorted({r.label for r in results}):
        rows = [r for r in results if r.label == label and r.error is None]
        agg: dict[str, float] = {}
        for metric in METRIC_COLUMNS:
            values = [r.metrics[metric] for r in rows if metric in r.metrics]
            if values:
                agg[metric] = sum(values) / len(values)
        out[label] = agg
    return out


@dataclass
class RunResult:
    results: list[CellResult]
    macro: dict[str, dict[str, float]]
    output: Path

    @property
    def failures(self) -> list[CellResult]:
        return [r for r in self.results if r.error is not None]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def write_report(
    output: Path,
    results: Sequence[CellResult],
    macro: Mapping[str, Mapping[str, float]],
    include_predictions: bool = True,
) -> None:
    output.mkdir(parents=True, exist_ok=True)
    if include_predictions:
        with open(output / "predictions.jsonl", "w", encoding="utf-8") as fh:
            for r in results:
                if r.prediction is not None:
                    fh.write(json.dumps(r.prediction, sort_keys=True) + "\n")
    with open(output / "failures.jsonl", "w", encoding="utf-8") as fh:
        for r in results:
            if r.error is not None:
                fh.write(
                    json.dumps(
                        {"doc_id": r.doc_id, "method": r.label, "error": r.error},
                        sort_keys=True,
                    )
                    + "\n"
                )
    with open(output / "report.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("doc_id", "method") + METRIC_COLUMNS)
        for r in results:
            if r.error is not None:
                continue
            writer.writerow(
                [r.doc_id, r.label]
                + [repr(r.metrics[m]) if m in r.metrics else "" for m in METRIC_COLUMNS]
            )
        for label in sorted(macro):
            agg = macro[label]
            writer.writerow(
                ["MACRO", label]
                + [repr(agg[m]) if m in agg else "" for m in METRIC_COLUMNS]
            )
    report = {
        "rows": [
            {"doc_id": r.doc_id, "method": r.label, "metrics": r.metrics}
            for r in results
            if r.error is None
        ],
        "macro": {k: dict(v) for k, v in macro.items()},
        "failures": [
            {"doc_id": r.doc_id, "method": r.label, "error": r.error}
            for r in results
            if r.error is not None
        ],
    }
    with open(output / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(spec: ExperimentSpec) -> RunResult:
    """Segment every document with every method; write predictions and reports.

    A failing (document, method) cell is recorded and skipped, never fatal;
    the result's exit_code distinguishes clean (0) from partial (1) runs.
    """
    docs = load_documents(spec.documents)
    provider = build_provider(spec.provider, spec.base)
    scorer = build_scorer(spec.scorer, spec.base)
    vocab = scorer.vocab if scorer is not None else default_vocabulary()
    results = _run_cells(
        docs,
        spec.methods,
        provider,
        scorer,
        spec.C,
        spec.nt,
        spec.avg_segment_tokens,
        spec.seed,
        vocab,
        spec.workers,
    )
    macro = macro_average(results)
    write_report(spec.output, results, macro)
    logger.info(
        "run complete: %d cells, %d failures -> %s",
        len(results),
        sum(1 for r in results if r.error is not None),
        spec.output,
    )
    return RunResult(results=results, macro=macro, output=spec.output)


# ---------------------------------------------------------------------------
# evaluation of prediction files


def evaluate_files(
    ref_path: str | Path, hyp_path: str | Path, nt: int = 2
) -> tuple[list[CellResult], dict[str, dict[str, float]]]:
    """Score a predictions file against the references in a documents file."""
    refs = {doc.id: doc for doc in load_documents(ref_path)}
    results: list[CellResult] = []
    with open(hyp_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise HarnessError(f"{hyp_path}: line {lineno}: malformed JSON: {e}") from None
            for key in ("doc_id", "method", "boundaries"):
                if key not in obj:
                    raise HarnessError(f"{hyp_path}: line {lineno}: missing field {key!r}")
            doc_id = str(obj["doc_id"])
            label = str(obj["method"])
            if doc_id not in refs:
                results.append(
                    CellResult(doc_id, label, None, {}, error="no such reference document")
                )
                continue
            doc = refs[doc_id]
            try:
                seg = Segmentation(doc.n, tuple(obj["boundaries"]))
                topics = (
                    TopicSequence(tuple(obj["topics"]))
                    if obj.get("topics") is not None
                    else None
                )
                metrics = score_cell(doc, seg, topics, nt)
            except CELL_ERRORS as e:
                results.append(CellResult(doc_id, label, None, {}, error=str(e)))
                continue
            results.append(CellResult(doc_id, label, dict(obj), metrics))
    results.sort(key=lambda r: (r.doc_id, r.label))
    return results, macro_average(results)


# ---------------------------------------------------------------------------
# hyperparameter sweep


SWEEP_AXES = ("method", "alpha", "beta", "C", "L")


@dataclass(frozen=True)
class SweepSpec:
    documents: Path
    provider: Mapping[str, Any]
    scorer: Mapping[str, Any] | None
    grid: Mapping[str, Sequence[Any]]
    avg_segment_tokens: float
    output: Path
    seed: int = 0
    nt: int = 2
    dev_fraction: float = 0.25
    workers: int = 1
    base: Path = Path(".")

    def __post_init__(self) -> None:
        if not self.grid:
            raise HarnessError("sweep grid is empty")
        unknown = set(self.grid) - set(SWEEP_AXES)
        if unknown:
            raise HarnessError(f"unknown sweep axes: {sorted(unknown)}")
        for axis, values in self.grid.items():
            if not values:
                raise HarnessError(f"sweep axis {axis!r} has no values")
        if not 0 < self.dev_fraction <= 1:
            raise HarnessError(f"dev_fraction={self.dev_fraction} outside (0,1]")
        if not self.avg_segment_tokens > 0:
            raise HarnessError("avg_segment_tokens must be positive")


def load_sweep_spec(path: str | Path) -> SweepSpec:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise HarnessError(f"{path}: malformed spec: {e}") from None
    for key in ("documents", "provider", "grid", "avg_segment_tokens", "output"):
        if key not in obj:
            raise HarnessError(f"{path}: spec missing field {key!r}")
    base = path.parent
    return SweepSpec(
        documents=base / obj["documents"],
        provider=obj["provider"],
        scorer=obj.get("scorer"),
        grid=obj["grid"],
        avg_segment_tokens=float(obj["avg_segment_tokens"]),
        output=base / obj["output"],
        seed=int(obj.get("seed", 0)),
        nt=int(obj.get("nt", 2)),
        dev_fraction=float(obj.get("dev_fraction", 0.25)),
        workers=int(obj.get("workers", 1)),
        base=base,
    )


def dev_split(ids: Iterable[str], seed: int, dev_fraction: float) -> set[str]:
    """Deterministic dev subset: rank ids by seeded hash, take the fixed ratio."""
    ranked = sorted(ids, key=lambda i: (derive_seed(seed, "split", i), i))
    n_dev = max(1, round_half_away(dev_fraction * len(ranked)))
    return set(ranked[:n_dev])


@dataclass
class SweepResult:
    rows: list[dict[str, Any]]
    best: dict[str, dict[str, Any]]
    output: Path

    @property
    def exit_code(self) -> int:
        return 1 if any(r.get("error") for r in self.rows) else 0


def sweep(spec: SweepSpec) -> SweepResult:
    """Cross-product grid evaluation on the dev split; reports best per metric."""
    docs = load_documents(spec.documents)
    dev_ids = dev_split((d.id for d in docs), spec.seed, spec.dev_fraction)
    dev_docs = [d for d in docs if d.id in dev_ids]
    provider = build_provider(spec.provider, spec.base)
    scorer = build_scorer(spec.scorer, spec.base)
    vocab = scorer.vocab if scorer is not None else default_vocabulary()
    axes = {
        "method": [str(m) for m in spec.grid.get("method", ["dp-length-pmi"])],
        "alpha": list(spec.grid.get("alpha", [None])),
        "beta": list(spec.grid.get("beta", [None])),
        "C": [int(c) for c in spec.grid.get("C", [3])],
        "L": list(spec.grid.get("L", [None])),
    }
    rows: list[dict[str, Any]] = []
    for method, alpha, beta, C, L in itertools.product(
        *(axes[a] for a in SWEEP_AXES)
    ):
        params: dict[str, Any] = {
            "method": method,
            "alpha": alpha,
            "beta": beta,
            "C": C,
            "L": L,
        }
        try:
            cfg = SegmenterConfig(method=method, alpha=alpha, beta=beta, L=L)
        except SegmenterError as e:
            rows.append({**params, "error": str(e)})
            continue
        mode = "scorer" if (method == "dp-topic" or scorer is not None) else "none"
        mspec = MethodSpec(config=cfg, label=method, topic_mode=mode)
        results = _run_cells(
            dev_docs,
            [mspec],
            provider,
            scorer,
            C,
            spec.nt,
            spec.avg_segment_tokens,
            spec.seed,
            vocab,
            spec.workers,
        )
        cell_errors = [r.error for r in results if r.error is not None]
        macro = macro_average(results).get(method, {})
        row: dict[str, Any] = dict(params)
        row.update({m: macro[m] for m in METRIC_COLUMNS if m in macro})
        if cell_errors:
            row["error"] = "; ".join(cell_errors)
        rows.append(row)
    best: dict[str, dict[str, Any]] = {}
    for metric in METRIC_COLUMNS:
        scored = [r for r in rows if metric in r]
        if not scored:
            continue
        if metric in MINIMIZED_METRICS:
            winner = min(scored, key=lambda r: r[metric])
        else:
            winner = max(scored, key=lambda r: r[metric])
        best[metric] = {
            "params": {a: winner[a] for a in SWEEP_AXES},
            "value": winner[metric],
        }
    spec.output.mkdir(parents=True, exist_ok=True)
    with open(spec.output / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_AXES + METRIC_COLUMNS + ("error",))
        for row in rows:
            writer.writerow(
                [_render(row.get(a)) for a in SWEEP_AXES]
                + [repr(row[m]) if m in row else "" for m in METRIC_COLUMNS]
                + [row.get("error", "")]
            )
    with open(spec.output / "best.json", "w", encoding="utf-8") as fh:
        json.dump(best, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return SweepResult(rows=rows, best=best, output=spec.output)


def _render(value: Any) -> str:
    return "" if value is None else str(value)


# ---------------------------------------------------------------------------
# score export


def export_score_tables(
    provider: ScoreProvider,
    docs: Sequence[Document],
    C: int,
    output: str | Path,
) -> tuple[list[Path], list[tuple[str, str]]]:
    """Write one score-table JSON per document; per-doc failures are collected."""
    output = Path(output)
    output.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    failures: list[tuple[str, str]] = []
    names: dict[str, str] = {}
    for doc in docs:
        name = re.sub(r"[^-._a-zA-Z0-9]", "_", doc.id) + ".json"
        if name in names:
            failures.append((doc.id, f"file name {name} collides with {names[name]}"))
            continue
        names[name] = doc.id
        try:
            table = build_score_table(provider, doc, C)
        except ScoringError as e:
            logger.warning("export failed for %s: %s", doc.id, e)
            failures.append((doc.id, str(e)))
            continue
        path = output / name
        table.save(path)
        written.append(path)
    return written, failures
