"""Document model, JSONL ingestion, topic vocabulary, and segment-count estimation.

A document is an ordered list of pre-split sentences. Boundaries are 0-based
"break before sentence b" indices, so segment j is the half-open sentence
interval [b_{j-1}, b_j) with b_0 = 0 and b_k = n. Tokens are whitespace-split.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

NO_TOPIC = "NO-TOPIC"


class CorpusError(Exception):
    """An input document, segmentation, or vocabulary violates an invariant."""


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero.

    Python's built-in round() is banker's rounding; this variant is the
    locale-independent convention used for every rounding step in the package.
    """
    if x >= 0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


@dataclass(frozen=True)
class Segmentation:
    """k-1 strictly increasing boundary indices partitioning n sentences into k segments."""

    n: int
    boundaries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise CorpusError(f"segmentation needs n >= 1, got n={self.n}")
        object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))
        prev = 0
        for b in self.boundaries:
            if not 1 <= b <= self.n - 1:
                raise CorpusError(f"boundary {b} not in [1, {self.n - 1}]")
            if b <= prev:
                raise CorpusError(f"boundaries not strictly increasing at {b}")
            prev = b

    @property
    def k(self) -> int:
        return len(self.boundaries) + 1

    def segments(self) -> list[tuple[int, int]]:
        """Half-open sentence spans [start, end) of each segment, in order."""
        edges = (0, *self.boundaries, self.n)
        return [(edges[j], edges[j + 1]) for j in range(self.k)]

    def lengths(self) -> list[int]:
        return [e - s for s, e in self.segments()]


@dataclass(frozen=True)
class TopicSequence:
    """Per-segment topic labels; no two adjacent labels are equal."""

    topics: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "topics", tuple(str(t) for t in self.topics))
        for a, b in zip(self.topics, self.topics[1:]):
            if a == b:
                raise CorpusError(f"adjacent-equal topics: {a!r} repeats")

    def __len__(self) -> int:
        return len(self.topics)

    def __iter__(self):
        return iter(self.topics)


@dataclass(frozen=True)
class TopicVocabulary:
    """Ordered unique topic labels; always contains the reserved NO-TOPIC label."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(str(t) for t in self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise CorpusError("vocabulary labels are not unique")
        if self.labels.count(NO_TOPIC) != 1:
            raise CorpusError(f"vocabulary must contain {NO_TOPIC} exactly once")

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise CorpusError(f"label {label!r} not in vocabulary") from None


@dataclass(frozen=True)
class Document:
    """An ordered sequence of sentences with optional reference annotations."""

    id: str
    sentences: tuple[str, ...]
    token_counts: tuple[int, ...]
    ref_boundaries: Segmentation | None = None
    ref_topics: TopicSequence | None = None

    @property
    def n(self) -> int:
        return len(self.sentences)

    @property
    def total_tokens(self) -> int:
        return sum(self.token_counts)

    def span_text(self, start: int, end: int) -> str:
        return " ".join(self.sentences[start:end])

    @classmethod
    def build(
        cls,
        id: str,
        sentences: Sequence[str],
        ref_boundaries: Sequence[int] | None = None,
        ref_topics: Sequence[str] | None = None,
    ) -> "Document":
        """Validate raw fields and compute whitespace token counts."""
        sentences = tuple(sentences)
        if len(sentences) < 1:
            raise CorpusError(f"document {id!r}: needs at least one sentence")
        for i, s in enumerate(sentences):
            if not isinstance(s, str) or not s.strip():
                raise CorpusError(f"document {id!r}: sentence {i} is empty")
        token_counts = tuple(len(s.split()) for s in sentences)
        seg = None
        if ref_boundaries is not None:
            try:
                seg = Segmentation(len(sentences), tuple(ref_boundaries))
            except CorpusError as e:
                raise CorpusError(f"document {id!r}: {e}") from None
        topics = None
        if ref_topics is not None:
            try:
                topics = TopicSequence(tuple(ref_topics))
            except CorpusError as e:
                raise CorpusError(f"document {id!r}: {e}") from None
            if seg is not None and len(topics) != seg.k:
                raise CorpusError(
                    f"document {id!r}: {len(topics)} topics for {seg.k} segments"
                )
        return cls(
            id=id,
            sentences=sentences,
            token_counts=token_counts,
            ref_boundaries=seg,
            ref_topics=topics,
        )

    def to_json(self) -> dict[str, Any]:
        obj: dict[str, Any] = {"id": self.id, "sentences": list(self.sentences)}
        if self.ref_boundaries is not None:
            obj["ref_boundaries"] = list(self.ref_boundaries.boundaries)
        if self.ref_topics is not None:
            obj["ref_topics"] = list(self.ref_topics.topics)
        return obj

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "Document":
        if not isinstance(obj, dict) or "id" not in obj or "sentences" not in obj:
            raise CorpusError("document object needs 'id' and 'sentences' fields")
        return cls.build(
            id=str(obj["id"]),
            sentences=obj["sentences"],
            ref_boundaries=obj.get("ref_boundaries"),
            ref_topics=obj.get("ref_topics"),
        )


def load_documents(path: str | Path) -> list[Document]:
    """Read a JSONL corpus, one document object per line.

    Raises CorpusError naming the offending line for malformed JSON, and the
    offending document id for invariant violations.
    """
    docs: list[Document] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}: line {lineno}: malformed JSON: {e}") from None
            docs.append(Document.from_json(obj))
    return docs


def save_documents(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_json(), ensure_ascii=False) + "\n")


def estimate_k(doc: Document, avg_segment_tokens: float) -> int:
    """Expected segment count: document tokens over the average tokens per segment.

    Rounded half away from zero and clamped below at one segment.
    """
    if not avg_segment_tokens > 0:
        raise CorpusError(f"avg_segment_tokens must be positive, got {avg_segment_tokens}")
    return max(1, round_half_away(doc.total_tokens / avg_segment_tokens))


def load_vocabulary(path: str | Path) -> TopicVocabulary:
    """Read a topic vocabulary file, one label per line, blank lines ignored."""
    with open(path, encoding="utf-8") as fh:
        labels = [line.strip() for line in fh if line.strip()]
    return TopicVocabulary(tuple(labels))


def default_vocabulary() -> TopicVocabulary:
    """The shipped 30-label vocabulary (29 content topics plus NO-TOPIC)."""
    text = resources.files("topicseg").joinpath("data/topics.txt").read_text("utf-8")
    labels = [line.strip() for line in text.splitlines() if line.strip()]
    return TopicVocabulary(tuple(labels))
