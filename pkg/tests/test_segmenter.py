"""Segmentation algorithms against exhaustive-enumeration oracles.

Exactness protocol: length-DP instances use dyadic grid costs (multiples of
1/8), quarter-step alphas, and power-of-two L, so every objective is exact in
binary floating point and equality assertions carry no tolerance. Joint-DP
instances use continuous random values instead and are rejection-sampled to
have a unique optimum with a clear margin, so the argmin comparison is exact
while reported objectives are checked to accumulation error.
"""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import SpanScorer, dyadic_costs, make_doc, random_span_scores, vocab_of
from topicseg import (
    BoundaryCost,
    ScoreEntry,
    ScoreTable,
    SegmenterConfig,
    SegmenterError,
    assign_topics,
    dp_length_objective,
    dp_topic_objective,
    segment_dp_length,
    segment_dp_topic,
    segment_local,
    segment_uniform,
)

ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)
ELLS = (2.0, 4.0)


def cost_table(values: dict[int, float]) -> BoundaryCost:
    return BoundaryCost(n=max(values) + 1, values=values)


# ---------------------------------------------------------------------------
# uniform


@pytest.mark.parametrize(
    "n,k,expected", [(10, 2, (5,)), (9, 3, (3, 6)), (7, 3, (2, 5))]
)
def test_uniform_pinned(n, k, expected):
    assert segment_uniform(n, k).boundaries == expected


def test_uniform_degenerate():
    assert segment_uniform(5, 1).boundaries == ()
    assert segment_uniform(4, 4).boundaries == (1, 2, 3)


@given(st.integers(min_value=1, max_value=50), st.data())
def test_uniform_always_valid(n, data):
    k = data.draw(st.integers(min_value=1, max_value=n))
    seg = segment_uniform(n, k)
    assert seg.k == k
    assert all(length >= 1 for length in seg.lengths())


def test_uniform_rejects_bad_k():
    with pytest.raises(SegmenterError):
        segment_uniform(3, 4)
    with pytest.raises(SegmenterError):
        segment_uniform(3, 0)


# ---------------------------------------------------------------------------
# local top-k


def test_local_picks_two_smallest():
    cost = cost_table({1: 0.5, 2: 0.1, 3: 0.9, 4: 0.2})
    assert segment_local(cost, 3).boundaries == (2, 4)


def test_local_tie_breaks_to_smallest_index():
    cost = cost_table({1: 0.7, 2: 0.7, 3: 0.7})
    assert segment_local(cost, 2).boundaries == (1,)


def test_local_prefers_negative_cost():
    cost = cost_table({1: -1.0, 2: 0.0})
    assert segment_local(cost, 2).boundaries == (1,)


def test_local_k_equals_n_takes_everything():
    cost = cost_table({1: 3.0, 2: -1.0})
    assert segment_local(cost, 3).boundaries == (1, 2)


@given(
    st.integers(min_value=2, max_value=10),
    st.integers(min_value=0, max_value=2**32),
    st.data(),
)
def test_local_matches_min_sum_enumeration(n, seed, data):
    k = data.draw(st.integers(min_value=1, max_value=n))
    cost = dyadic_costs(n, random.Random(seed))
    got = segment_local(BoundaryCost(n, cost), k)
    expected = min(oracles.enumerate_length(cost, n, k, alpha=1.0, L=1.0))
    assert got.boundaries == expected[1]


# ---------------------------------------------------------------------------
# boundary-cost table


def test_boundary_cost_requires_exact_coverage():
    with pytest.raises(SegmenterError, match="exactly"):
        BoundaryCost(4, {1: 0.0, 3: 0.0})
    with pytest.raises(SegmenterError, match="exactly"):
        BoundaryCost(3, {1: 0.0, 2: 0.0, 3: 0.0})


def test_boundary_cost_rejects_non_finite():
    with pytest.raises(SegmenterError, match="not finite"):
        BoundaryCost(2, {1: math.nan})


def test_boundary_cost_from_table():
    entries = {
        1: ScoreEntry(b=1, logp_joint=-10.0, logp_left=-4.0, logp_right=-7.0, nsp=0.25),
        2: ScoreEntry(b=2, logp_joint=-12.0, logp_left=-4.0, logp_right=-7.0, nsp=0.75),
    }
    table = ScoreTable(doc_id="d", C=1, entries=entries)
    pmi = BoundaryCost.from_pmi(table, 3)
    assert (pmi[1], pmi[2]) == (1.0, -1.0)
    nsp = BoundaryCost.from_nsp(table, 3)
    assert (nsp[1], nsp[2]) == (0.25, 0.75)


def test_from_nsp_without_capability_is_an_error():
    entries = {1: ScoreEntry(b=1, logp_joint=-1.0, logp_left=-1.0, logp_right=-1.0)}
    table = ScoreTable(doc_id="d", C=1, entries=entries)
    with pytest.raises(SegmenterError, match="not NSP-capable"):
        BoundaryCost.from_nsp(table, 2)


# ---------------------------------------------------------------------------
# length-regularized DP


def test_dp_length_alpha_zero_forces_equal_halves():
    cost = BoundaryCost(10, {b: 5.0 for b in range(1, 10)})
    seg = segment_dp_length(cost, 2, alpha=0.0, L=5.0)
    assert seg.boundaries == (5,)


def test_dp_length_pinned_instance_family():
    # n=8, k=3, alpha=0.5, L=4: randomized grid costs against full enumeration;
    # L stays a power of two so every penalty term is exact
    rng = random.Random(1234)
    for _ in range(300):
        cost = dyadic_costs(8, rng)
        seg = segment_dp_length(BoundaryCost(8, cost), 3, alpha=0.5, L=4.0)
        best = min(oracles.enumerate_length(cost, 8, 3, alpha=0.5, L=4.0))
        assert seg.boundaries == best[1]
        assert dp_length_objective(BoundaryCost(8, cost), seg, 0.5, 4.0) == best[0]


@st.composite
def length_instances(draw):
    n = draw(st.integers(min_value=2, max_value=10))
    k = draw(st.integers(min_value=1, max_value=min(4, n)))
    seed = draw(st.integers(min_value=0, max_value=2**32))
    alpha = draw(st.sampled_from(ALPHAS))
    L = draw(st.sampled_from(ELLS))
    return n, k, dyadic_costs(n, random.Random(seed)), alpha, L


@given(length_instances())
def test_dp_length_equals_enumeration(instance):
    n, k, cost, alpha, L = instance
    seg = segment_dp_length(BoundaryCost(n, cost), k, alpha=alpha, L=L)
    best = min(oracles.enumerate_length(cost, n, k, alpha, L))
    assert seg.boundaries == best[1]
    assert dp_length_objective(BoundaryCost(n, cost), seg, alpha, L) == best[0]


@given(length_instances())
def test_dp_length_alpha_one_reduces_to_local(instance):
    n, k, cost, _, L = instance
    table = BoundaryCost(n, cost)
    assert segment_dp_length(table, k, alpha=1.0, L=L) == segment_local(table, k)


@given(length_instances())
def test_monotone_scaling_preserves_argmin(instance):
    n, k, cost, _, L = instance
    doubled = {b: 2.0 * v for b, v in cost.items()}
    assert segment_local(BoundaryCost(n, cost), k) == segment_local(
        BoundaryCost(n, doubled), k
    )
    assert segment_dp_length(BoundaryCost(n, cost), k, alpha=1.0, L=L) == (
        segment_dp_length(BoundaryCost(n, doubled), k, alpha=1.0, L=L)
    )


def test_dp_length_respects_max_span():
    rng = random.Random(7)
    for _ in range(100):
        cost = dyadic_costs(9, rng)
        seg = segment_dp_length(BoundaryCost(9, cost), 3, alpha=0.75, L=2.0, max_span=4)
        assert max(seg.lengths()) <= 4
        best = min(oracles.enumerate_length(cost, 9, 3, 0.75, 2.0, max_span=4))
        assert seg.boundaries == best[1]


def test_dp_length_infeasible_max_span():
    cost = BoundaryCost(9, {b: 0.0 for b in range(1, 9)})
    with pytest.raises(SegmenterError, match="max_span"):
        segment_dp_length(cost, 2, max_span=4)


def test_dp_length_degenerate_cases():
    cost = BoundaryCost(4, {1: 1.0, 2: -1.0, 3: 0.5})
    assert segment_dp_length(cost, 1, alpha=0.8, L=4.0).boundaries == ()
    assert segment_dp_length(cost, 4, alpha=0.8, L=1.0).boundaries == (1, 2, 3)


def test_dp_length_validation():
    cost = BoundaryCost(4, {1: 0.0, 2: 0.0, 3: 0.0})
    with pytest.raises(SegmenterError):
        segment_dp_length(cost, 5)
    with pytest.raises(SegmenterError):
        segment_dp_length(cost, 2, alpha=1.5)
    with pytest.raises(SegmenterError):
        segment_dp_length(cost, 2, L=0.0)


# ---------------------------------------------------------------------------
# joint DP


def overlap(span: tuple[int, int], region: tuple[int, int]) -> int:
    return max(0, min(span[1], region[1]) - max(span[0], region[0]))


def test_dp_topic_pinned_two_segment_instance():
    # sentences 0..2 score strongly as the first topic, 3..5 as the second
    n, k = 6, 2
    doc = make_doc(n)
    vocab = vocab_of(3)
    table = {
        (s, e): oracles.log_softmax(
            [5.0 * overlap((s, e), (0, 3)), 5.0 * overlap((s, e), (3, 6)), 0.0]
        )
        for s in range(n)
        for e in range(s + 1, n + 1)
    }
    scorer = SpanScorer(vocab, table)
    cost = BoundaryCost(n, {b: 0.0 for b in range(1, n)})
    seg, topics = segment_dp_topic(doc, cost, scorer, k, alpha=0.25, beta=0.25, L=3.0)
    assert seg.boundaries == (3,)
    assert topics.topics == ("T00", "T01")
    best = min(
        oracles.enumerate_joint(cost.values, table, n, k, 3, 0.25, 0.25, 3.0)
    )
    assert seg.boundaries == best[1]
    assert tuple(vocab.index(t) for t in topics) == best[2]


def random_joint_instance(rng: random.Random, n: int, k: int, n_topics: int):
    """Rejection-sample until the optimum is unique by a clear margin."""
    weights = [(0.2, 0.2), (0.3, 0.4), (0.0, 0.5), (0.25, 0.25), (0.1, 0.8)]
    while True:
        cost = {b: rng.uniform(-2.0, 2.0) for b in range(1, n)}
        spans = random_span_scores(n, n_topics, rng)
        alpha, beta = weights[rng.randrange(len(weights))]
        L = [2.0, 3.0, 5.0][rng.randrange(3)]
        cands = oracles.enumerate_joint(cost, spans, n, k, n_topics, alpha, beta, L)
        if oracles.optimum_gap(c[0] for c in cands) > 1e-9:
            return cost, spans, alpha, beta, L, min(cands)


def test_dp_topic_equals_enumeration():
    rng = random.Random(99)
    for _ in range(40):
        n = rng.randint(4, 9)
        k = rng.randint(1, 3)
        n_topics = rng.randint(2, 4)
        cost, spans, alpha, beta, L, best = random_joint_instance(rng, n, k, n_topics)
        doc = make_doc(n)
        scorer = SpanScorer(vocab_of(n_topics), spans)
        seg, topics = segment_dp_topic(
            doc, BoundaryCost(n, cost), scorer, k, alpha=alpha, beta=beta, L=L
        )
        idx = tuple(scorer.vocab.index(t) for t in topics)
        assert (seg.boundaries, idx) == (best[1], best[2])
        got = dp_topic_objective(
            doc, BoundaryCost(n, cost), scorer, seg, topics, alpha, beta, L
        )
        assert got == pytest.approx(best[0], abs=1e-9)


def test_dp_topic_two_topics_forces_alternation():
    rng = random.Random(5)
    for _ in range(20):
        n, k = 6, 3
        cost, spans, alpha, beta, L, best = random_joint_instance(rng, n, k, 2)
        doc = make_doc(n)
        scorer = SpanScorer(vocab_of(2), spans)
        seg, topics = segment_dp_topic(
            doc, BoundaryCost(n, cost), scorer, k, alpha=alpha, beta=beta, L=L
        )
        idx = tuple(scorer.vocab.index(t) for t in topics)
        assert (seg.boundaries, idx) == (best[1], best[2])
        assert idx in {(0, 1, 0), (1, 0, 1)}


def test_dp_topic_respects_max_span():
    rng = random.Random(11)
    for _ in range(20):
        n, k, n_topics = 8, 3, 3
        while True:
            cost = {b: rng.uniform(-2.0, 2.0) for b in range(1, n)}
            spans = random_span_scores(n, n_topics, rng)
            cands = oracles.enumerate_joint(
                cost, spans, n, k, n_topics, 0.2, 0.3, 3.0, max_span=4
            )
            if oracles.optimum_gap(c[0] for c in cands) > 1e-9:
                break
        doc = make_doc(n)
        scorer = SpanScorer(vocab_of(n_topics), spans)
        seg, topics = segment_dp_topic(
            doc, BoundaryCost(n, cost), scorer, k, alpha=0.2, beta=0.3, L=3.0, max_span=4
        )
        best = min(cands)
        assert max(seg.lengths()) <= 4
        assert seg.boundaries == best[1]
        assert tuple(scorer.vocab.index(t) for t in topics) == best[2]


def test_dp_topic_beta_zero_matches_pipeline():
    rng = random.Random(42)
    for _ in range(30):
        n = rng.randint(3, 9)
        k = rng.randint(1, min(3, n))
        n_topics = rng.randint(2, 4)
        cost = dyadic_costs(n, rng)
        spans = random_span_scores(n, n_topics, rng)
        doc = make_doc(n)
        scorer = SpanScorer(vocab_of(n_topics), spans)
        alpha = ALPHAS[rng.randrange(len(ALPHAS))]
        table = BoundaryCost(n, cost)
        seg, topics = segment_dp_topic(
            doc, table, scorer, k, alpha=alpha, beta=0.0, L=4.0
        )
        expected_seg = segment_dp_length(table, k, alpha=1.0 - alpha, L=4.0)
        assert seg == expected_seg
        assert topics == assign_topics(doc, expected_seg, scorer)
        # the segmentation also matches the joint objective's enumeration
        best = min(
            oracles.enumerate_length(cost, n, k, alpha=1.0 - alpha, L=4.0)
        )
        assert seg.boundaries == best[1]


def test_dp_topic_tie_breaks_topics_toward_vocabulary_order():
    # one clearly cheapest boundary; uniform scores make every topic
    # sequence cost exactly the same, so the lex-smallest sequence wins
    n, k, n_topics = 6, 3, 3
    doc = make_doc(n)
    uniform = [math.log(1.0 / n_topics)] * n_topics
    table = {(s, e): list(uniform) for s in range(n) for e in range(s + 1, n + 1)}
    scorer = SpanScorer(vocab_of(n_topics), table)
    cost = BoundaryCost(n, {1: 1.0, 2: -2.0, 3: 1.0, 4: -2.0, 5: 1.0})
    seg, topics = segment_dp_topic(doc, cost, scorer, k, alpha=0.0, beta=0.5, L=2.0)
    assert seg.boundaries == (2, 4)
    assert topics.topics == ("T00", "T01", "T00")


def test_dp_topic_single_segment_takes_argmax_topic():
    n = 4
    doc = make_doc(n)
    table = random_span_scores(n, 3, random.Random(3))
    scorer = SpanScorer(vocab_of(3), table)
    cost = BoundaryCost(n, {b: 0.0 for b in range(1, n)})
    seg, topics = segment_dp_topic(doc, cost, scorer, 1, alpha=0.1, beta=0.2, L=4.0)
    assert seg.boundaries == ()
    full = table[(0, n)]
    assert topics.topics[0] == scorer.vocab.labels[full.index(max(full))]


def test_dp_topic_validation():
    n = 4
    doc = make_doc(n)
    table = random_span_scores(n, 3, random.Random(0))
    scorer = SpanScorer(vocab_of(3), table)
    cost = BoundaryCost(n, {b: 0.0 for b in range(1, n)})
    with pytest.raises(SegmenterError, match="n=3"):
        segment_dp_topic(make_doc(3), cost, scorer, 2)
    with pytest.raises(SegmenterError, match="cannot cut"):
        segment_dp_topic(doc, cost, scorer, 5)
    with pytest.raises(SegmenterError, match="weights"):
        segment_dp_topic(doc, cost, scorer, 2, alpha=0.7, beta=0.7)
    with pytest.raises(SegmenterError, match="at least 2"):
        one_topic = SpanScorer(vocab_of(1), table)
        segment_dp_topic(doc, cost, one_topic, 2)
    with pytest.raises(SegmenterError, match="max_span"):
        segment_dp_topic(doc, cost, scorer, 1, max_span=3)


def test_dp_topic_rejects_unnormalized_scorer():
    n = 3
    doc = make_doc(n)
    bad = {(s, e): [-1.0, -1.0, -1.0] for s in range(n) for e in range(s + 1, n + 1)}
    scorer = SpanScorer(vocab_of(3), bad)
    cost = BoundaryCost(n, {b: 0.0 for b in range(1, n)})
    with pytest.raises(Exception, match="distribution"):
        segment_dp_topic(doc, cost, scorer, 2, alpha=0.2, beta=0.2, L=2.0)


# ---------------------------------------------------------------------------
# config defaults


def test_config_defaults_per_method():
    dp = SegmenterConfig(method="dp-length-pmi")
    assert (dp.alpha, dp.beta) == (0.8, 0.0)
    joint = SegmenterConfig(method="dp-topic")
    assert (joint.alpha, joint.beta) == (0.2, 0.2)


def test_config_resolution_rules():
    cfg = SegmenterConfig(method="dp-length-pmi", L=None, max_span=None)
    assert cfg.resolved_L(30, 4) == 7.5
    assert cfg.resolved_max_span(7.5) == 30
    pinned = SegmenterConfig(method="dp-length-pmi", L=5.0, max_span=12)
    assert pinned.resolved_L(30, 4) == 5.0
    assert pinned.resolved_max_span(5.0) == 12


def test_config_validation():
    with pytest.raises(SegmenterError, match="unknown method"):
        SegmenterConfig(method="dp-magic")
    with pytest.raises(SegmenterError, match="alpha"):
        SegmenterConfig(method="uniform", alpha=2.0)
    with pytest.raises(SegmenterError, match="exceeds 1"):
        SegmenterConfig(method="dp-topic", alpha=0.8, beta=0.4)
    with pytest.raises(SegmenterError, match="k"):
        SegmenterConfig(method="uniform", k=0)
    with pytest.raises(SegmenterError, match="max_span"):
        SegmenterConfig(method="uniform", max_span=0)
