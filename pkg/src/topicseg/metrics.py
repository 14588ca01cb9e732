"""Evaluation measures for segmentations and topic sequences.

Boundary measures: exact-match F1, WindowDiff, and two boundary-edit
similarities (S and B) built on a minimal-mass matching between boundary
sets with additions, deletions, and distance-bounded transpositions.
Topic-sequence measures: gestalt (recursive longest-common-block) similarity
and length-normalized Damerau-Levenshtein distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from difflib import SequenceMatcher
from typing import Sequence

from .corpus import Segmentation, TopicSequence, round_half_away


class MetricError(Exception):
    """Incomparable inputs or out-of-range parameters."""


@dataclass(frozen=True)
class SegEvalReport:
    f1: float
    window_diff: float
    s_sim: float
    b_sim: float
    window_size: int

    def __post_init__(self) -> None:
        for name in ("f1", "window_diff", "s_sim", "b_sim"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise MetricError(f"{name}={v} outside [0,1]")
        if self.window_size < 1:
            raise MetricError(f"window_size must be >= 1, got {self.window_size}")


@dataclass(frozen=True)
class TopicEvalReport:
    sm: float
    edit: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.sm <= 1.0:
            raise MetricError(f"sm={self.sm} outside [0,1]")
        if self.edit < 0:
            raise MetricError(f"edit={self.edit} negative")


def _check_same_n(ref: Segmentation, hyp: Segmentation) -> None:
    if ref.n != hyp.n:
        raise MetricError(f"reference has n={ref.n}, hypothesis has n={hyp.n}")


def boundary_f1(ref: Segmentation, hyp: Segmentation) -> float:
    """F1 over exact boundary-index matches; both empty counts as perfect."""
    _check_same_n(ref, hyp)
    r, h = set(ref.boundaries), set(hyp.boundaries)
    if not r and not h:
        return 1.0
    hits = len(r & h)
    if hits == 0:
        return 0.0
    precision = hits / len(h)
    recall = hits / len(r)
    return 2 * precision * recall / (precision + recall)


def default_window(ref: Segmentation) -> int:
    """Half the mean reference segment length, at least 1."""
    return max(1, round_half_away(ref.n / ref.k / 2))


def window_diff(ref: Segmentation, hyp: Segmentation, window: int | None = None) -> float:
    """Fraction of width-w windows whose boundary counts disagree.

    A window anchored at sentence i spans the w gaps (i, i+w]; there are n-w
    windows. The default w follows the reference segmentation of the given
    pair, never a corpus average.
    """
    _check_same_n(ref, hyp)
    n = ref.n
    w = default_window(ref) if window is None else window
    if not 1 <= w < n:
        raise MetricError(f"window must be in [1, {n - 1}], got {w}")

    def cumulative(seg: Segmentation) -> list[int]:
        counts = [0] * (n + 1)
        for b in seg.boundaries:
            counts[b] = 1
        total = 0
        out = [0] * (n + 1)
        for i in range(n + 1):
            total += counts[i]
            out[i] = total
        return out

    rc, hc = cumulative(ref), cumulative(hyp)
    disagreements = sum(
        1 for i in range(n - w) if rc[i + w] - rc[i] != hc[i + w] - hc[i]
    )
    return disagreements / (n - w)


def boundary_edit_stats(
    ref: Segmentation, hyp: Segmentation, nt: int = 2
) -> tuple[float, int]:
    """Minimal boundary-edit mass and the pair count achieving it.

    Boundaries may be matched exactly, matched as a transposition when their
    offset is below nt, or left unmatched (an addition/deletion of mass 1).
    A matched pair of offset d carries mass d/nt. Returns (total mass, number
    of matched pairs), minimizing mass first, then maximizing pairs.

    The search is a non-crossing alignment DP over the two sorted boundary
    lists; uncrossing any crossing matching never increases mass, so this is
    the global optimum. Skipping an exact match can still be optimal when it
    frees two transpositions, so per-boundary greedy matching is not used.
    """
    _check_same_n(ref, hyp)
    if nt < 2:
        raise MetricError(f"nt must be >= 2, got {nt}")
    r, h = ref.boundaries, hyp.boundaries
    m, k = len(r), len(h)
    # dp[i][j] = best (gain, pairs) matching r[i:] against h[j:], where each
    # pair of offset d gains 2 - d/nt over leaving both unmatched.
    dp = [[(0.0, 0)] * (k + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        for j in range(k - 1, -1, -1):
            best = dp[i + 1][j] if dp[i + 1][j] >= dp[i][j + 1] else dp[i][j + 1]
            off = abs(r[i] - h[j])
            if off <= nt - 1:
                gain, pairs = dp[i + 1][j + 1]
                cand = (gain + 2 - off / nt, pairs + 1)
                if cand > best:
                    best = cand
            dp[i][j] = best
    gain, pairs = dp[0][0]
    return m + k - gain, pairs


def seg_similarity(ref: Segmentation, hyp: Segmentation, nt: int = 2) -> float:
    """1 minus the boundary-edit mass over the n-1 potential boundary sites."""
    mass, _ = boundary_edit_stats(ref, hyp, nt)
    if ref.n == 1:
        return 1.0
    return 1.0 - mass / (ref.n - 1)


def boundary_similarity(ref: Segmentation, hyp: Segmentation, nt: int = 2) -> float:
    """1 minus the edit mass over edit mass plus matched pairs."""
    mass, pairs = boundary_edit_stats(ref, hyp, nt)
    if mass + pairs == 0:
        return 1.0
    return 1.0 - mass / (mass + pairs)


def gestalt_similarity(ref: TopicSequence, hyp: TopicSequence) -> float:
    """Recursive longest-common-block ratio 2M/(|a|+|b|); empty vs empty is 1."""
    a, b = tuple(ref), tuple(hyp)
    return SequenceMatcher(None, a, b, autojunk=False).ratio()


def damerau_levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    """Restricted edit distance: insert, delete, substitute, swap adjacent.

    The restricted (optimal string alignment) variant edits each substring at
    most once; it can exceed the unrestricted distance and admits rare
    triangle-inequality violations, which is accepted for compatibility with
    the common library behavior.
    """
    m, k = len(a), len(b)
    d = [[0] * (k + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(k + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, k + 1):
            sub = 0 if a[i - 1] == b[j - 1] else 1
            best = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + sub,
            )
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                best = min(best, d[i - 2][j - 2] + 1)
            d[i][j] = best
    return d[m][k]


def edit_distance(ref: TopicSequence, hyp: TopicSequence) -> float:
    """Damerau-Levenshtein distance normalized by the reference length.

    Can exceed 1 when the hypothesis is much longer than the reference.
    """
    a, b = tuple(ref), tuple(hyp)
    if not a:
        raise MetricError("reference topic sequence is empty")
    return damerau_levenshtein(a, b) / len(a)


def evaluate_segmentation(
    ref: Segmentation, hyp: Segmentation, nt: int = 2, window: int | None = None
) -> SegEvalReport:
    w = default_window(ref) if window is None else window
    return SegEvalReport(
        f1=boundary_f1(ref, hyp),
        window_diff=window_diff(ref, hyp, w),
        s_sim=seg_similarity(ref, hyp, nt),
        b_sim=boundary_similarity(ref, hyp, nt),
        window_size=w,
    )


def evaluate_topics(ref: TopicSequence, hyp: TopicSequence) -> TopicEvalReport:
    return TopicEvalReport(sm=gestalt_similarity(ref, hyp), edit=edit_distance(ref, hyp))
