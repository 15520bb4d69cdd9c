"""Dual-penalty reward: correctness gate times two redundancy penalties.

The internal penalty maps the internal redundancy degree through a
sharpened, endpoint-normalized sigmoid so that moderate redundancy is
tolerated and heavy repetition is cut hard; the external penalty is the
linear complement of the external redundancy degree. A response scores
``p_int * p_ext`` when its final answer is correct and 0 otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

from .embedder import Embedder, EmbedderConfig, as_embedder
from .errors import ParameterDomainError, RedtraceError
from .metrics import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    compute_erd,
    pair_similarities_from_vectors,
    plan_windows,
    window_texts,
)
from .segmenter import extract_final_answer, find_fcs_boundary, is_correct
from .types import (
    AnswerValue,
    ReasoningTrace,
    RedundancyReport,
    ScoreError,
    Segmentation,
    WindowPlan,
)

DEFAULT_K = 20.0
DEFAULT_C = 0.3


@dataclass(frozen=True)
class PenaltyConfig:
    """Parameters of the dual-penalty reward.

    ``enable_internal`` / ``enable_external`` exist to run single-penalty
    ablations; a disabled penalty is forced to 1.
    """

    sigmoid_slope_k: float = DEFAULT_K
    sigmoid_center_c: float = DEFAULT_C
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    enable_internal: bool = True
    enable_external: bool = True

    def __post_init__(self) -> None:
        if self.sigmoid_slope_k <= 0:
            raise ParameterDomainError("sigmoid slope k must be positive")
        if not (0.0 < self.beta < self.alpha < 1.0):
            raise ParameterDomainError(
                f"require 0 < beta < alpha < 1, got alpha={self.alpha}, beta={self.beta}"
            )

    def to_dict(self) -> dict:
        """Serialize under the documented config-file key names."""
        return {
            "k": self.sigmoid_slope_k,
            "c": self.sigmoid_center_c,
            "alpha": self.alpha,
            "beta": self.beta,
            "enable_internal": self.enable_internal,
            "enable_external": self.enable_external,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PenaltyConfig":
        return cls().merged(data)

    def merged(self, overrides: dict) -> "PenaltyConfig":
        """Apply a partial update; invariants are revalidated on build."""
        field_names = {
            "k": "sigmoid_slope_k",
            "c": "sigmoid_center_c",
            "alpha": "alpha",
            "beta": "beta",
            "enable_internal": "enable_internal",
            "enable_external": "enable_external",
        }
        unknown = set(overrides) - set(field_names)
        if unknown:
            raise ParameterDomainError(f"unknown penalty config keys: {sorted(unknown)}")
        return replace(self, **{field_names[k]: v for k, v in overrides.items()})


def _sigmoid(x: float, k: float, c: float) -> float:
    return 1.0 / (1.0 + math.exp(-k * (x - c)))


def internal_penalty(ird: float, config: PenaltyConfig = PenaltyConfig()) -> float:
    """Sigmoid-normalized internal penalty, 1 at ird=0 and 0 at ird=1.

    The normalization divides out the sigmoid's endpoint values so the
    penalty spans [0, 1] exactly; with the default slope and center the
    multiplier stays above 0.98 for ird <= 0.5 and drops fast beyond.
    """
    if not (0.0 <= ird <= 1.0):
        raise ParameterDomainError(f"ird must be in [0, 1], got {ird}")
    k, c = config.sigmoid_slope_k, config.sigmoid_center_c
    lo = _sigmoid(0.0, k, c)
    hi = _sigmoid(1.0, k, c)
    return (_sigmoid(1.0 - ird, k, c) - lo) / (hi - lo)


def external_penalty(erd: float) -> float:
    """Linear external penalty: the complement of the redundancy fraction."""
    if not (0.0 <= erd <= 1.0):
        raise ParameterDomainError(f"erd must be in [0, 1], got {erd}")
    return 1.0 - erd


def compose_reward(correct: bool, p_int: float, p_ext: float) -> float:
    """Multiply the accuracy indicator with both penalty multipliers."""
    return p_int * p_ext if correct else 0.0


@dataclass(frozen=True)
class _Prepared:
    trace: ReasoningTrace
    ground_truth: AnswerValue
    predicted: Optional[AnswerValue]
    correct: bool
    segmentation: Segmentation
    plan: WindowPlan
    texts: list[str]


def _prepare(trace: ReasoningTrace, ground_truth: AnswerValue, config: PenaltyConfig) -> _Prepared:
    predicted = extract_final_answer(trace)
    correct = is_correct(predicted, ground_truth)
    segmentation = find_fcs_boundary(trace, ground_truth)
    pre_start, pre_stop = segmentation.pre_answer
    pre_sentences = trace.sentences[pre_start:pre_stop]
    plan = plan_windows(len(pre_sentences), config.alpha, config.beta)
    texts = window_texts(pre_sentences, plan) if plan.pair_count_m > 0 else []
    return _Prepared(
        trace=trace,
        ground_truth=ground_truth,
        predicted=predicted,
        correct=correct,
        segmentation=segmentation,
        plan=plan,
        texts=texts,
    )


def _finish(prepared: _Prepared, vectors: Sequence, config: PenaltyConfig) -> RedundancyReport:
    if prepared.plan.pair_count_m == 0:
        sims: list[float] = []
        ird = 0.0
    else:
        sims = pair_similarities_from_vectors(vectors)
        ird = sum(sims) / len(sims)
    erd = compute_erd(prepared.segmentation)
    p_int = internal_penalty(ird, config) if config.enable_internal else 1.0
    p_ext = external_penalty(erd) if config.enable_external else 1.0
    return RedundancyReport(
        trace_id=prepared.trace.id,
        correct=prepared.correct,
        ird=ird,
        erd=erd,
        pair_similarities=tuple(sims),
        p_int=p_int,
        p_ext=p_ext,
        reward=compose_reward(prepared.correct, p_int, p_ext),
        window_plan=prepared.plan,
        segmentation=prepared.segmentation,
        predicted_answer=prepared.predicted.canonical if prepared.predicted else None,
    )


def score_response(
    trace: ReasoningTrace,
    ground_truth: AnswerValue,
    penalty: PenaltyConfig = PenaltyConfig(),
    embedder: Union[Embedder, EmbedderConfig, None] = None,
) -> RedundancyReport:
    """Score one response: correctness gate, boundary split, both penalties.

    Redundancy metrics are computed even when the answer is wrong (the
    reward is then 0 and the metrics are diagnostic only), so one code
    path serves both reward serving and corpus evaluation.
    """
    emb = as_embedder(embedder if embedder is not None else EmbedderConfig())
    prepared = _prepare(trace, ground_truth, penalty)
    vectors = emb.embed_batch(prepared.texts) if prepared.texts else []
    return _finish(prepared, vectors, penalty)


def score_batch(
    items: Sequence[tuple[ReasoningTrace, AnswerValue]],
    penalty: PenaltyConfig = PenaltyConfig(),
    embedder: Union[Embedder, EmbedderConfig, None] = None,
) -> list[Union[RedundancyReport, ScoreError]]:
    """Score a batch, isolating per-item failures as error records.

    Window segments from all traces are embedded in one pass (the embedder
    deduplicates identical segments and chunks requests), and results are
    returned in input order, identical to sequential scoring. Backend
    exhaustion is a batch-level failure and propagates.
    """
    if not items:
        raise ValueError("score_batch requires a non-empty batch")
    emb = as_embedder(embedder if embedder is not None else EmbedderConfig())

    prepared: list[Union[_Prepared, ScoreError]] = []
    for trace, ground_truth in items:
        try:
            prepared.append(_prepare(trace, ground_truth, penalty))
        except RedtraceError as exc:
            prepared.append(ScoreError(trace_id=trace.id, message=str(exc)))

    all_texts: list[str] = []
    for item in prepared:
        if isinstance(item, _Prepared):
            all_texts.extend(item.texts)
    all_vectors = emb.embed_batch(all_texts) if all_texts else []

    results: list[Union[RedundancyReport, ScoreError]] = []
    cursor = 0
    for item in prepared:
        if isinstance(item, ScoreError):
            results.append(item)
            continue
        vectors = all_vectors[cursor : cursor + len(item.texts)]
        cursor += len(item.texts)
        try:
            results.append(_finish(item, vectors, penalty))
        except RedtraceError as exc:
            results.append(ScoreError(trace_id=item.trace.id, message=str(exc)))
    return results
