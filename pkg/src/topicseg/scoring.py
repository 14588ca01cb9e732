"""Per-boundary score tables and the probability providers that fill them.

For every candidate boundary b the table stores log P(A_b || B_b), log P(A_b),
log P(B_b) for the C-sentence windows around b, plus an optional
next-span probability. log-PMI at b is then joint minus the two marginals;
a low value marks a likely topic break.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Protocol

import requests

from .corpus import Document
from .ngram import NGramModel


class ScoringError(Exception):
    """A provider failed or a score table violates its contract."""


@dataclass(frozen=True)
class ScoreEntry:
    b: int
    logp_joint: float
    logp_left: float
    logp_right: float
    nsp: float | None = None


@dataclass(frozen=True)
class ScoreTable:
    """Immutable per-document boundary scores for a fixed context size C."""

    doc_id: str
    C: int
    entries: Mapping[int, ScoreEntry]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", dict(self.entries))

    def boundaries(self) -> list[int]:
        return sorted(self.entries)

    def entry(self, b: int) -> ScoreEntry:
        try:
            return self.entries[b]
        except KeyError:
            raise ScoringError(
                f"{self.doc_id}: no score entry for boundary {b}"
            ) from None

    def to_json(self) -> dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "C": self.C,
            "entries": [
                {
                    "b": e.b,
                    "logp_joint": e.logp_joint,
                    "logp_left": e.logp_left,
                    "logp_right": e.logp_right,
                    "nsp": e.nsp,
                }
                for e in (self.entries[b] for b in self.boundaries())
            ],
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "ScoreTable":
        for key in ("doc_id", "C", "entries"):
            if key not in obj:
                raise ScoringError(f"score table missing field {key!r}")
        entries: dict[int, ScoreEntry] = {}
        for raw in obj["entries"]:
            for key in ("b", "logp_joint", "logp_left", "logp_right", "nsp"):
                if key not in raw:
                    raise ScoringError(f"score entry missing field {key!r}")
            b = int(raw["b"])
            if b in entries:
                raise ScoringError(f"duplicate score entry for boundary {b}")
            nsp = raw["nsp"]
            entries[b] = ScoreEntry(
                b=b,
                logp_joint=float(raw["logp_joint"]),
                logp_left=float(raw["logp_left"]),
                logp_right=float(raw["logp_right"]),
                nsp=None if nsp is None else float(nsp),
            )
        return cls(doc_id=str(obj["doc_id"]), C=int(obj["C"]), entries=entries)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "ScoreTable":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as e:
                raise ScoringError(f"{path}: malformed score table: {e}") from None
        return cls.from_json(obj)


def compute_log_pmi(table: ScoreTable, b: int) -> float:
    """log P(A,B) - log P(A) - log P(B) at boundary b; low means likely break."""
    e = table.entry(b)
    return e.logp_joint - e.logp_left - e.logp_right


def window_spans(n: int, b: int, C: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Sentence spans (A, B) flanking boundary b, truncated at document edges."""
    return (max(0, b - C), b), (b, min(n, b + C))


class ScoreProvider(Protocol):
    """Deterministic source of score tables: same (doc, C) in, same table out."""

    def build_table(self, doc: Document, C: int) -> ScoreTable: ...


def build_score_table(provider: ScoreProvider, doc: Document, C: int) -> ScoreTable:
    """Fetch a table from the provider and enforce the table contract."""
    if C < 1:
        raise ScoringError(f"C must be >= 1, got {C}")
    try:
        table = provider.build_table(doc, C)
    except ScoringError:
        raise
    except Exception as e:
        raise ScoringError(f"{doc.id}: provider failed: {e}") from e
    if table.doc_id != doc.id:
        raise ScoringError(f"provider returned table for {table.doc_id!r}, not {doc.id!r}")
    if table.C != C:
        raise ScoringError(f"{doc.id}: table has C={table.C}, requested C={C}")
    want = set(range(1, doc.n))
    have = set(table.entries)
    if have != want:
        missing = sorted(want - have)
        extra = sorted(have - want)
        raise ScoringError(
            f"{doc.id}: table boundary coverage mismatch"
            f" (missing {missing}, extra {extra})"
        )
    for b in table.boundaries():
        e = table.entries[b]
        for name in ("logp_joint", "logp_left", "logp_right"):
            v = getattr(e, name)
            if not math.isfinite(v):
                raise ScoringError(f"{doc.id}: {name}({b}) is not finite: {v}")
        if e.nsp is not None and not 0.0 <= e.nsp <= 1.0:
            raise ScoringError(f"{doc.id}: nsp({b})={e.nsp} outside [0,1]")
    return table


class NGramProvider:
    """Scores windows with the built-in n-gram LM; no NSP capability.

    The model is trained once on document-level token streams so that
    cross-sentence n-grams carry signal; instances are immutable afterwards
    and safe to share across workers.
    """

    def __init__(self, model: NGramModel):
        self.model = model

    @classmethod
    def train(
        cls,
        docs: Iterable[Document],
        order: int = 3,
        delta: float = 0.1,
        weights: tuple[float, ...] | None = None,
    ) -> "NGramProvider":
        streams = ([t for s in doc.sentences for t in s.split()] for doc in docs)
        return cls(NGramModel(order=order, delta=delta, weights=weights).train(streams))

    def build_table(self, doc: Document, C: int) -> ScoreTable:
        entries: dict[int, ScoreEntry] = {}
        tokens = [s.split() for s in doc.sentences]
        for b in range(1, doc.n):
            (a0, a1), (b0, b1) = window_spans(doc.n, b, C)
            left = [t for ts in tokens[a0:a1] for t in ts]
            right = [t for ts in tokens[b0:b1] for t in ts]
            entries[b] = ScoreEntry(
                b=b,
                logp_joint=self.model.logprob(left + right),
                logp_left=self.model.logprob(left),
                logp_right=self.model.logprob(right),
                nsp=None,
            )
        return ScoreTable(doc_id=doc.id, C=C, entries=entries)


class FileProvider:
    """Serves score tables precomputed to disk, keyed by document id."""

    def __init__(self, tables: Iterable[ScoreTable]):
        self.tables: dict[str, ScoreTable] = {}
        for t in tables:
            if t.doc_id in self.tables:
                raise ScoringError(f"duplicate score table for document {t.doc_id!r}")
            self.tables[t.doc_id] = t

    @classmethod
    def from_paths(cls, paths: Iterable[str | Path]) -> "FileProvider":
        return cls(ScoreTable.load(p) for p in paths)

    @classmethod
    def from_dir(cls, directory: str | Path) -> "FileProvider":
        return cls.from_paths(sorted(Path(directory).glob("*.json")))

    def build_table(self, doc: Document, C: int) -> ScoreTable:
        if doc.id not in self.tables:
            raise ScoringError(f"{doc.id}: no score table on file")
        return self.tables[doc.id]


class RemoteProvider:
    """HTTP client for a scoring service exposing POST /score.

    One pooled session per instance; the service owns model state, so a
    single provider can be shared by concurrent document workers.
    """

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = requests.Session()

    def build_table(self, doc: Document, C: int) -> ScoreTable:
        try:
            resp = self.session.post(
                f"{self.base_url}/score",
                json={"sentences": list(doc.sentences), "C": C},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except Exception as e:
            raise ScoringError(f"{doc.id}: score service failed: {e}") from e
        if "entries" not in payload:
            raise ScoringError(f"{doc.id}: score response missing 'entries'")
        return ScoreTable.from_json(
            {"doc_id": doc.id, "C": C, "entries": payload["entries"]}
        )
