"""Topic scorers and per-segment topic decoding.

A topic scorer maps any sentence span (plus its coarse document-position bin)
to a normalized log-probability vector over the topic vocabulary. Decoding is
exact constrained Viterbi: maximize the summed log-probabilities subject to
adjacent segments taking different topics. Uniform initial and transition
terms cancel in the argmax, so classifier scores are used directly.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path
from typing import Iterable, Protocol, Sequence, runtime_checkable

import requests

from .corpus import Document, Segmentation, TopicSequence, TopicVocabulary

NORMALIZATION_TOL = 1e-6


class TopicError(Exception):
    """Scorer failure, missing span scores, or an infeasible decode."""


def log_sum_exp(values: Sequence[float]) -> float:
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in values))


def validate_logprobs(vec: Sequence[float], size: int, context: str = "") -> None:
    """Enforce the scorer contract: right length, no NaN/+inf, normalized."""
    where = f" for {context}" if context else ""
    if len(vec) != size:
        raise TopicError(f"scorer returned {len(vec)} log-probs, expected {size}{where}")
    for v in vec:
        if math.isnan(v) or v == math.inf:
            raise TopicError(f"scorer returned invalid log-prob {v}{where}")
    total = log_sum_exp(vec)
    if not abs(total) <= NORMALIZATION_TOL:
        raise TopicError(
            f"scorer log-probs sum to exp({total}), not a distribution{where}"
        )


def position_bin(doc: Document, start: int) -> int:
    """Tenth of the document the sentence at `start` falls in, clamped to [0,9]."""
    if not 0 <= start < doc.n:
        raise TopicError(f"start={start} outside document of {doc.n} sentences")
    return min(9, 10 * start // doc.n)


@runtime_checkable
class TopicScorer(Protocol):
    vocab: TopicVocabulary

    def logprobs(self, doc: Document, start: int, end: int, position_bin: int) -> list[float]:
        """Normalized log-probability per vocabulary label for the span [start, end)."""
        ...


class MatrixScorer:
    """Serves precomputed span log-probs from files; missing spans are errors."""

    def __init__(self, vocab: TopicVocabulary, spans: dict[tuple[str, int, int], list[float]]):
        self.vocab = vocab
        self.spans = dict(spans)

    @classmethod
    def from_paths(cls, paths: Iterable[str | Path]) -> "MatrixScorer":
        vocab: TopicVocabulary | None = None
        spans: dict[tuple[str, int, int], list[float]] = {}
        for path in paths:
            with open(path, encoding="utf-8") as fh:
                try:
                    obj = json.load(fh)
                except json.JSONDecodeError as e:
                    raise TopicError(f"{path}: malformed span-score file: {e}") from None
            for key in ("doc_id", "vocab", "spans"):
                if key not in obj:
                    raise TopicError(f"{path}: span-score file missing field {key!r}")
            file_vocab = TopicVocabulary(tuple(obj["vocab"]))
            if vocab is None:
                vocab = file_vocab
            elif vocab.labels != file_vocab.labels:
                raise TopicError(f"{path}: vocabulary differs from previously loaded files")
            doc_id = str(obj["doc_id"])
            for raw in obj["spans"]:
                key = (doc_id, int(raw["start"]), int(raw["end"]))
                spans[key] = [float(v) for v in raw["logprobs"]]
        if vocab is None:
            raise TopicError("no span-score files given")
        return cls(vocab, spans)

    def logprobs(self, doc: Document, start: int, end: int, position_bin: int) -> list[float]:
        key = (doc.id, start, end)
        if key not in self.spans:
            raise TopicError(f"no precomputed scores for {doc.id}[{start}:{end}]")
        return list(self.spans[key])


class LexiconScorer:
    """Additive keyword log-odds per topic, softmax-normalized over the vocabulary.

    Fully self-contained: no model files, no network. The position bin is
    ignored because a keyword lexicon carries no positional prior.
    """

    def __init__(self, vocab: TopicVocabulary, weights: dict[str, dict[str, float]]):
        unknown = set(weights) - set(vocab.labels)
        if unknown:
            raise TopicError(f"lexicon topics not in vocabulary: {sorted(unknown)}")
        self.vocab = vocab
        self.weights = {label: dict(weights.get(label, {})) for label in vocab.labels}

    @classmethod
    def from_path(cls, path: str | Path) -> "LexiconScorer":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as e:
                raise TopicError(f"{path}: malformed lexicon file: {e}") from None
        for key in ("vocab", "keywords"):
            if key not in obj:
                raise TopicError(f"{path}: lexicon file missing field {key!r}")
        return cls(TopicVocabulary(tuple(obj["vocab"])), obj["keywords"])

    def logprobs(self, doc: Document, start: int, end: int, position_bin: int) -> list[float]:
        tokens = doc.span_text(start, end).split()
        raw = []
        for label in self.vocab.labels:
            table = self.weights[label]
            raw.append(sum(table.get(t, 0.0) for t in tokens))
        z = log_sum_exp(raw)
        return [v - z for v in raw]


class RemoteScorer:
    """HTTP client for a classification service exposing POST /classify.

    The service promises normalization within 1e-4; responses are
    renormalized here to meet this module's tighter 1e-6 scorer contract.
    """

    def __init__(self, base_url: str, vocab: TopicVocabulary, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.vocab = vocab
        self.timeout = timeout
        self.session = requests.Session()

    def logprobs(self, doc: Document, start: int, end: int, position_bin: int) -> list[float]:
        try:
            resp = self.session.post(
                f"{self.base_url}/classify",
                json={"text": doc.span_text(start, end), "position_bin": position_bin},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except Exception as e:
            raise TopicError(f"classify service failed for {doc.id}[{start}:{end}]: {e}") from e
        if tuple(payload.get("vocab", ())) != self.vocab.labels:
            raise TopicError(
                f"classify service vocabulary does not match for {doc.id}[{start}:{end}]"
            )
        vec = [float(v) for v in payload["logprobs"]]
        z = log_sum_exp(vec)
        return [v - z for v in vec]


def assign_topics(doc: Document, seg: Segmentation, scorer: TopicScorer) -> TopicSequence:
    """Constrained Viterbi: best topic per segment, no adjacent repeats.

    Maximizes the summed span log-probabilities exactly; ties resolve to the
    vocabulary-order smallest sequence.
    """
    if seg.n != doc.n:
        raise TopicError(f"segmentation is for n={seg.n}, document has n={doc.n}")
    labels = scorer.vocab.labels
    T = len(labels)
    if T < 2 and seg.k >= 2:
        raise TopicError(
            f"{seg.k} segments need at least 2 topics, vocabulary has {T}"
        )
    scores: list[list[float]] = []
    for start, end in seg.segments():
        try:
            vec = scorer.logprobs(doc, start, end, position_bin(doc, start))
        except TopicError:
            raise
        except Exception as e:
            raise TopicError(f"scorer failed on {doc.id}[{start}:{end}]: {e}") from e
        validate_logprobs(vec, T, context=f"{doc.id}[{start}:{end}]")
        scores.append(vec)
    # Viterbi over (negated score, topic indices) tuples: min is the max-score
    # sequence, ties broken toward vocabulary order.
    best: list[tuple[float, tuple[int, ...]] | None] = [
        (-scores[0][t], (t,)) for t in range(T)
    ]
    for j in range(1, seg.k):
        nxt: list[tuple[float, tuple[int, ...]] | None] = [None] * T
        for t in range(T):
            cand: tuple[float, tuple[int, ...]] | None = None
            for t_prev in range(T):
                if t_prev == t:
                    continue
                p = best[t_prev]
                if p is None:
                    continue
                c = (p[0] - scores[j][t], p[1] + (t,))
                if cand is None or c < cand:
                    cand = c
            nxt[t] = cand
        best = nxt
    finals = [v for v in best if v is not None]
    if not finals:
        raise TopicError(f"no feasible topic sequence for {seg.k} segments")
    _, idx = min(finals)
    return TopicSequence(tuple(labels[t] for t in idx))


def sample_uniform_topics(k: int, vocab: TopicVocabulary, seed: int) -> TopicSequence:
    """Seeded uniform draws, each excluding the previous topic."""
    labels = vocab.labels
    if k < 1:
        raise TopicError(f"k must be >= 1, got {k}")
    if len(labels) < 2 and k >= 2:
        raise TopicError(f"{k} segments need at least 2 topics, vocabulary has {len(labels)}")
    rng = random.Random(seed)
    out = [rng.choice(labels)]
    for _ in range(1, k):
        out.append(rng.choice([t for t in labels if t != out[-1]]))
    return TopicSequence(tuple(out))
