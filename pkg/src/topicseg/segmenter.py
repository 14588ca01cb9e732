"""Segmentation algorithms: uniform, local top-k, and two exact dynamic programs.

All methods emit boundaries as 0-based "break before sentence b" indices.
Tie-breaking is deterministic everywhere: lexicographically smallest boundary
list first, then lexicographically smallest topic sequence in vocabulary
order. DP costs are compared as (cost, boundaries[, topics]) tuples, which
makes the tie-break exact whenever the cost arithmetic is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .corpus import Document, Segmentation, TopicSequence, round_half_away
from .scoring import ScoreTable, compute_log_pmi
from .topics import TopicScorer, assign_topics, position_bin, validate_logprobs

METHODS = (
    "uniform",
    "local-pmi",
    "local-nsp",
    "dp-length-pmi",
    "dp-length-nsp",
    "dp-topic",
)


class SegmenterError(Exception):
    """Infeasible request or malformed cost table."""


@dataclass(frozen=True)
class BoundaryCost:
    """A finite cost for every candidate boundary 1..n-1; lower means cut here."""

    n: int
    values: Mapping[int, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", dict(self.values))
        if self.n < 1:
            raise SegmenterError(f"cost table needs n >= 1, got {self.n}")
        want = set(range(1, self.n))
        if set(self.values) != want:
            raise SegmenterError(
                f"cost table must cover exactly boundaries 1..{self.n - 1}"
            )
        for b, v in self.values.items():
            if not math.isfinite(v):
                raise SegmenterError(f"cost({b}) is not finite: {v}")

    def __getitem__(self, b: int) -> float:
        return self.values[b]

    @classmethod
    def from_pmi(cls, table: ScoreTable, n: int) -> "BoundaryCost":
        return cls(n, {b: compute_log_pmi(table, b) for b in range(1, n)})

    @classmethod
    def from_nsp(cls, table: ScoreTable, n: int) -> "BoundaryCost":
        values: dict[int, float] = {}
        for b in range(1, n):
            e = table.entry(b)
            if e.nsp is None:
                raise SegmenterError(
                    f"{table.doc_id}: nsp({b}) unavailable; provider is not NSP-capable"
                )
            values[b] = e.nsp
        return cls(n, values)


@dataclass(frozen=True)
class SegmenterConfig:
    """Method selection plus the Eq.-style weights.

    alpha and beta default per method when left unset: dp-topic uses
    alpha=beta=0.2, everything else alpha=0.8, beta=0. L (expected segment
    length in sentences) left unset means "derive n/k per document". max_span
    left unset means the 4L pruning default at invocation time.
    """

    method: str
    alpha: float | None = None
    beta: float | None = None
    L: float | None = None
    k: int | None = None
    max_span: int | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise SegmenterError(
                f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}"
            )
        if self.alpha is None:
            object.__setattr__(self, "alpha", 0.2 if self.method == "dp-topic" else 0.8)
        if self.beta is None:
            object.__setattr__(self, "beta", 0.2 if self.method == "dp-topic" else 0.0)
        if not 0.0 <= self.alpha <= 1.0:
            raise SegmenterError(f"alpha={self.alpha} outside [0,1]")
        if not 0.0 <= self.beta <= 1.0:
            raise SegmenterError(f"beta={self.beta} outside [0,1]")
        if self.alpha + self.beta > 1.0:
            raise SegmenterError(f"alpha+beta={self.alpha + self.beta} exceeds 1")
        if self.L is not None and not self.L > 0:
            raise SegmenterError(f"L must be positive, got {self.L}")
        if self.k is not None and self.k < 1:
            raise SegmenterError(f"k must be >= 1, got {self.k}")
        if self.max_span is not None and self.max_span < 1:
            raise SegmenterError(f"max_span must be >= 1, got {self.max_span}")

    def resolved_L(self, n: int, k: int) -> float:
        return self.L if self.L is not None else n / k

    def resolved_max_span(self, L: float) -> int:
        return self.max_span if self.max_span is not None else math.ceil(4 * L)


def segment_uniform(n: int, k: int) -> Segmentation:
    """Equal-length segments: boundary j at round(j*n/k), collisions pushed right."""
    if not 1 <= k <= n:
        raise SegmenterError(f"cannot cut {n} sentences into {k} segments")
    boundaries: list[int] = []
    prev = 0
    for j in range(1, k):
        b = max(round_half_away(j * n / k), prev + 1)
        boundaries.append(b)
        prev = b
    return Segmentation(n, tuple(boundaries))


def segment_local(cost: BoundaryCost, k: int) -> Segmentation:
    """The k-1 cheapest boundaries; ties prefer the smaller index."""
    if not 1 <= k <= cost.n:
        raise SegmenterError(f"cannot cut {cost.n} sentences into {k} segments")
    ranked = sorted(range(1, cost.n), key=lambda b: (cost[b], b))
    return Segmentation(cost.n, tuple(sorted(ranked[: k - 1])))


def length_penalty(length: int, L: float) -> float:
    return abs(length - L) / L


def dp_length_objective(
    cost: BoundaryCost, seg: Segmentation, alpha: float, L: float
) -> float:
    """Total cost of a fixed segmentation under the length-regularized objective."""
    total = sum(alpha * cost[b] for b in seg.boundaries)
    total += sum((1 - alpha) * length_penalty(ln, L) for ln in seg.lengths())
    return total


def segment_dp_length(
    cost: BoundaryCost,
    k: int,
    alpha: float = 0.8,
    L: float = 10.0,
    max_span: int | None = None,
) -> Segmentation:
    """Minimize alpha*sum(boundary costs) + (1-alpha)*sum(|len-L|/L) exactly.

    Every segment pays the length term, the final one included; interior
    boundaries pay the alpha-weighted boundary cost. max_span=None means no
    cap on segment length.
    """
    n = cost.n
    if not 1 <= k <= n:
        raise SegmenterError(f"cannot cut {n} sentences into {k} segments")
    if not 0.0 <= alpha <= 1.0:
        raise SegmenterError(f"alpha={alpha} outside [0,1]")
    if not L > 0:
        raise SegmenterError(f"L must be positive, got {L}")
    if max_span is not None and k * max_span < n:
        raise SegmenterError(
            f"max_span={max_span} cannot cover {n} sentences with {k} segments"
        )
    span = n if max_span is None else max_span

    def pen(length: int) -> float:
        return (1 - alpha) * abs(length - L) / L

    # prev[i] = (cost, boundaries) of the best split of sentences [0, i)
    # into j segments; None where infeasible.
    prev: list[tuple[float, tuple[int, ...]] | None] = [None] * (n + 1)
    for i in range(1, min(n, span) + 1):
        prev[i] = (pen(i), ())
    for _ in range(2, k + 1):
        cur: list[tuple[float, tuple[int, ...]] | None] = [None] * (n + 1)
        for i in range(2, n + 1):
            best: tuple[float, tuple[int, ...]] | None = None
            for cut in range(max(1, i - span), i):
                p = prev[cut]
                if p is None:
                    continue
                c = p[0] + alpha * cost[cut] + pen(i - cut)
                if best is None or c < best[0]:
                    best = (c, p[1] + (cut,))
                elif c == best[0]:
                    bounds = p[1] + (cut,)
                    if bounds < best[1]:
                        best = (c, bounds)
            cur[i] = best
        prev = cur
    if prev[n] is None:
        raise SegmenterError(f"no feasible segmentation of {n} sentences into {k}")
    return Segmentation(n, prev[n][1])


def dp_topic_objective(
    doc: Document,
    cost: BoundaryCost,
    scorer: TopicScorer,
    seg: Segmentation,
    topics: TopicSequence,
    alpha: float,
    beta: float,
    L: float,
) -> float:
    """Total cost of a fixed (segmentation, topics) pair under the joint objective."""
    total = sum((1 - alpha - beta) * cost[b] for b in seg.boundaries)
    total += sum(alpha * length_penalty(ln, L) for ln in seg.lengths())
    for (start, end), label in zip(seg.segments(), topics):
        vec = scorer.logprobs(doc, start, end, position_bin(doc, start))
        total += beta * -vec[scorer.vocab.index(label)]
    return total


def segment_dp_topic(
    doc: Document,
    cost: BoundaryCost,
    scorer: TopicScorer,
    k: int,
    alpha: float = 0.2,
    beta: float = 0.2,
    L: float = 10.0,
    max_span: int | None = None,
) -> tuple[Segmentation, TopicSequence]:
    """Jointly minimize boundary, length, and topic negative-log-likelihood costs.

    Objective: (1-alpha-beta)*sum(boundary costs) + alpha*sum(|len-L|/L)
    + beta*sum(-log P(topic_j | segment_j)), subject to adjacent topics
    differing. State is (position, segments used, last topic); the minimum
    over predecessor topics is decomposed through the two best predecessors,
    keeping the whole program O(n^2 k |T|).

    With beta=0 all topic sequences cost the same, so the segmentation is
    delegated to segment_dp_length and topics to the pipeline decode; this
    keeps the output pair identical to running the two stages separately.
    """
    n = doc.n
    if cost.n != n:
        raise SegmenterError(f"cost table is for n={cost.n}, document has n={n}")
    if not 1 <= k <= n:
        raise SegmenterError(f"cannot cut {n} sentences into {k} segments")
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0 and alpha + beta <= 1.0):
        raise SegmenterError(f"invalid weights alpha={alpha}, beta={beta}")
    if not L > 0:
        raise SegmenterError(f"L must be positive, got {L}")
    vocab = scorer.vocab
    if len(vocab) < 2:
        raise SegmenterError("joint decoding needs a vocabulary of at least 2 topics")
    if max_span is not None and k * max_span < n:
        raise SegmenterError(
            f"max_span={max_span} cannot cover {n} sentences with {k} segments"
        )
    if beta == 0.0:
        seg = segment_dp_length(cost, k, alpha=1.0 - alpha, L=L, max_span=max_span)
        return seg, assign_topics(doc, seg, scorer)
    span = n if max_span is None else max_span
    labels = tuple(vocab.labels)
    T = len(labels)

    span_scores: dict[tuple[int, int], list[float]] = {}

    def topic_costs(start: int, end: int) -> list[float]:
        key = (start, end)
        if key not in span_scores:
            vec = scorer.logprobs(doc, start, end, position_bin(doc, start))
            validate_logprobs(vec, T, context=f"{doc.id}[{start}:{end}]")
            span_scores[key] = [beta * -lp for lp in vec]
        return span_scores[key]

    def pen(length: int) -> float:
        return alpha * abs(length - L) / L

    Value = tuple[float, tuple[int, ...], tuple[int, ...]]
    # prev[i][t] = best (cost, boundaries, topic indices) covering [0, i)
    # with the current segment labeled t.
    prev: list[list[Value | None]] = [[None] * T for _ in range(n + 1)]
    for i in range(1, min(n, span) + 1):
        tc = topic_costs(0, i)
        for t in range(T):
            prev[i][t] = (pen(i) + tc[t], (), (t,))
    for _ in range(2, k + 1):
        # two cheapest predecessors per position, distinct last topics
        firsts: list[tuple[Value, int] | None] = [None] * (n + 1)
        seconds: list[tuple[Value, int] | None] = [None] * (n + 1)
        for i in range(n + 1):
            for t in range(T):
                v = prev[i][t]
                if v is None:
                    continue
                if firsts[i] is None or v < firsts[i][0]:
                    seconds[i] = firsts[i]
                    firsts[i] = (v, t)
                elif seconds[i] is None or v < seconds[i][0]:
                    seconds[i] = (v, t)
        cur: list[list[Value | None]] = [[None] * T for _ in range(n + 1)]
        for i in range(2, n + 1):
            for cut in range(max(1, i - span), i):
                if firsts[cut] is None:
                    continue
                add = (1 - alpha - beta) * cost[cut] + pen(i - cut)
                tc = topic_costs(cut, i)
                for t in range(T):
                    pick = firsts[cut]
                    if pick[1] == t:
                        pick = seconds[cut]
                    if pick is None:
                        continue
                    pv = pick[0]
                    c = pv[0] + add + tc[t]
                    old = cur[i][t]
                    if old is None or c < old[0]:
                        cur[i][t] = (c, pv[1] + (cut,), pv[2] + (t,))
                    elif c == old[0]:
                        cand = (c, pv[1] + (cut,), pv[2] + (t,))
                        if cand < old:
                            cur[i][t] = cand
        prev = cur
    finals = [v for v in prev[n] if v is not None]
    if not finals:
        raise SegmenterError(f"no feasible segmentation of {n} sentences into {k}")
    _, bounds, topic_idx = min(finals)
    return Segmentation(n, bounds), TopicSequence(tuple(labels[t] for t in topic_idx))
