"""Redundancy analysis and reward scoring for chain-of-thought traces.

The package splits reasoning traces at the first sentence containing the
correct answer, measures internal redundancy (sliding-window semantic
similarity before the boundary) and external redundancy (length fraction
after it), turns both into reward penalties, and aggregates corpus-level
efficiency metrics. It ships as a library, a CLI (``redtrace``), and an
HTTP scoring service for RL trainers.
"""

from .corpus import (
    CorpusSummary,
    LoadError,
    LoadResult,
    evaluate_corpus,
    load_corpus,
    render_report,
    render_series,
)
from .embedder import (
    Embedder,
    EmbedderConfig,
    EmbeddingVector,
    cosine_similarity,
    embed_batch,
)
from .errors import (
    BackendUnavailableError,
    DimensionMismatchError,
    EmptySegmentError,
    EmptyTraceError,
    NonNumericAnswerError,
    ParameterDomainError,
    RedtraceError,
    ZeroLengthTraceError,
    ZeroVectorError,
)
from .metrics import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    compute_erd,
    compute_ird,
    compute_te,
    plan_windows,
)
from .reward import (
    PenaltyConfig,
    compose_reward,
    external_penalty,
    internal_penalty,
    score_batch,
    score_response,
)
from .segmenter import (
    extract_final_answer,
    find_fcs_boundary,
    is_correct,
    make_trace,
    normalize_answer,
    split_sentences,
)
from .types import (
    AnswerValue,
    ReasoningTrace,
    RedundancyReport,
    ScoreError,
    Segmentation,
    Sentence,
    WindowPlan,
    whitespace_token_count,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerValue",
    "BackendUnavailableError",
    "CorpusSummary",
    "DEFAULT_ALPHA",
    "DEFAULT_BETA",
    "DimensionMismatchError",
    "Embedder",
    "EmbedderConfig",
    "EmbeddingVector",
    "EmptySegmentError",
    "EmptyTraceError",
    "LoadError",
    "LoadResult",
    "NonNumericAnswerError",
    "ParameterDomainError",
    "PenaltyConfig",
    "ReasoningTrace",
    "RedtraceError",
    "RedundancyReport",
    "ScoreError",
    "Segmentation",
    "Sentence",
    "WindowPlan",
    "ZeroLengthTraceError",
    "ZeroVectorError",
    "compose_reward",
    "compute_erd",
    "compute_ird",
    "compute_te",
    "cosine_similarity",
    "embed_batch",
    "evaluate_corpus",
    "external_penalty",
    "extract_final_answer",
    "find_fcs_boundary",
    "internal_penalty",
    "is_correct",
    "load_corpus",
    "make_trace",
    "normalize_answer",
    "plan_windows",
    "render_report",
    "render_series",
    "score_batch",
    "score_response",
    "split_sentences",
    "whitespace_token_count",
]
