"""Interpolated n-gram language model with additive smoothing.

A deterministic, trainable stand-in for a neural LM: good enough to expose
probability structure (window log-probs, PMI) to the rest of the package
without any network or model weights. Probabilities interpolate all orders
1..order uniformly unless custom weights are given; each order uses add-delta
smoothing over a closed vocabulary plus UNK.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

BOS = "<s>"
UNK = "<unk>"


@dataclass
class NGramModel:
    """Counts plus smoothing parameters; train then score, no mutation after."""

    order: int = 3
    delta: float = 0.1
    weights: tuple[float, ...] | None = None
    vocab: set[str] = field(default_factory=set)
    # counts[j] maps a length-j context tuple to a Counter of next tokens
    counts: list[dict[tuple[str, ...], Counter]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.weights is not None:
            if len(self.weights) != self.order:
                raise ValueError(
                    f"{len(self.weights)} weights for order {self.order}"
                )
            if any(w < 0 for w in self.weights) or not math.isclose(
                sum(self.weights), 1.0, rel_tol=0, abs_tol=1e-9
            ):
                raise ValueError("weights must be non-negative and sum to 1")
        if not self.counts:
            self.counts = [{} for _ in range(self.order)]

    def train(self, sequences: Iterable[Sequence[str]]) -> "NGramModel":
        """Accumulate counts from token sequences. BOS pads context only."""
        for seq in sequences:
            tokens = list(seq)
            self.vocab.update(tokens)
            padded = [BOS] * (self.order - 1) + tokens
            for i in range(self.order - 1, len(padded)):
                token = padded[i]
                for j in range(self.order):
                    ctx = tuple(padded[i - j : i])
                    table = self.counts[j].setdefault(ctx, Counter())
                    table[token] += 1
        return self

    @property
    def vocab_size(self) -> int:
        # UNK is always a distinct smoothing target
        return len(self.vocab) + 1

    def _normalize(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def _order_prob(self, j: int, ctx: tuple[str, ...], token: str) -> float | None:
        """Add-delta probability at context length j, or None when undefined.

        Undefined means an unseen context with delta=0: the order contributes
        no mass and is skipped in the interpolation.
        """
        table = self.counts[j].get(ctx)
        c = table[token] if table is not None else 0
        total = sum(table.values()) if table is not None else 0
        denom = total + self.delta * self.vocab_size
        if denom == 0:
            return None
        return (c + self.delta) / denom

    def prob(self, context: Sequence[str], token: str) -> float:
        """Interpolated P(token | context); context longer than order-1 is truncated."""
        token = self._normalize(token)
        history = [BOS] * (self.order - 1) + [self._normalize(t) if t != BOS else t for t in context]
        weights = self.weights or tuple(1.0 / self.order for _ in range(self.order))
        total = 0.0
        mass = 0.0
        for j in range(self.order):
            ctx = tuple(history[len(history) - j :]) if j else ()
            p = self._order_prob(j, ctx, token)
            if p is None:
                continue
            total += weights[j] * p
            mass += weights[j]
        if mass == 0:
            # no order defined anywhere: delta=0 and token context never seen
            return 0.0
        return total / mass

    def logprob(self, tokens: Sequence[str]) -> float:
        """Chain-rule log probability of a token sequence (natural log)."""
        if not tokens:
            raise ValueError("cannot score an empty token sequence")
        total = 0.0
        history: list[str] = []
        for token in tokens:
            p = self.prob(history, token)
            if p <= 0:
                return -math.inf
            total += math.log(p)
            history.append(self._normalize(token))
        return total

    def conditional_logprob(self, prefix: Sequence[str], suffix: Sequence[str]) -> float:
        """log P(suffix | prefix) = logprob(prefix + suffix) - logprob(prefix)."""
        if not prefix:
            return self.logprob(suffix)
        return self.logprob(list(prefix) + list(suffix)) - self.logprob(prefix)


def train_ngram(
    sequences: Iterable[Sequence[str]],
    order: int = 3,
    delta: float = 0.1,
    weights: tuple[float, ...] | None = None,
) -> NGramModel:
    return NGramModel(order=order, delta=delta, weights=weights).train(sequences)
