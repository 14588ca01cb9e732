"""Topical segmentation of long unstructured texts.

Scores candidate boundaries with windowed log-PMI (or next-span
probabilities), decodes segmentations with exact length- and topic-aware
dynamic programs, labels segments by constrained Viterbi, and evaluates with
boundary F1, WindowDiff, boundary-edit similarities, gestalt matching, and
normalized edit distance.
"""

from .corpus import (
    NO_TOPIC,
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
    save_documents,
)
from .metrics import (
    MetricError,
    SegEvalReport,
    TopicEvalReport,
    boundary_edit_stats,
    boundary_f1,
    boundary_similarity,
    damerau_levenshtein,
    default_window,
    edit_distance,
    evaluate_segmentation,
    evaluate_topics,
    gestalt_similarity,
    seg_similarity,
    window_diff,
)
from .ngram import BOS, UNK, NGramModel, train_ngram
from .scoring import (
    FileProvider,
    NGramProvider,
    RemoteProvider,
    ScoreEntry,
    ScoreProvider,
    ScoreTable,
    ScoringError,
    build_score_table,
    compute_log_pmi,
    window_spans,
)
from .segmenter import (
    METHODS,
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
    position_bin,
    sample_uniform_topics,
)

__version__ = "0.1.0"
