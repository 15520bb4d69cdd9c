"""Window planning and the redundancy / efficiency metrics.

Internal redundancy is the mean clipped cosine similarity between adjacent
sliding windows over the pre-answer sentences; external redundancy is the
token-length fraction of the trace past the answer boundary; token
efficiency divides accuracy (in percent) by the square root of the mean
token count.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

from .embedder import Embedder, EmbedderConfig, as_embedder, cosine_similarity
from .errors import ParameterDomainError, ZeroLengthTraceError
from .types import Segmentation, Sentence, WindowPlan

DEFAULT_ALPHA = 0.1
DEFAULT_BETA = 0.05


def plan_windows(n_sentences: int, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA) -> WindowPlan:
    """Size the sliding windows for a trace of ``n_sentences`` sentences.

    Window size and stride are fixed fractions of the sentence count,
    clamped to at least 1 so short traces still produce a window. Start
    indices advance by the stride while a full window fits; the stride
    never exceeds the window size, so covered sentences form one gap-free
    prefix (at most ``stride - 1`` trailing sentences fall outside the
    last full window).
    """
    if n_sentences < 1:
        raise ParameterDomainError("n_sentences must be >= 1")
    if not (0.0 < beta < alpha < 1.0):
        raise ParameterDomainError(
            f"require 0 < beta < alpha < 1, got alpha={alpha}, beta={beta}"
        )
    w = max(1, math.floor(alpha * n_sentences))
    t = max(1, math.floor(beta * n_sentences))
    starts = [s for s in range(0, n_sentences, t) if s + w <= n_sentences]
    if not starts:
        # Unreachable for w = max(1, floor(alpha*N)) with alpha < 1, but the
        # contract still defines a single truncated window for N < w.
        starts = [0]
        w = min(w, n_sentences)
    k = len(starts)
    return WindowPlan(
        n_sentences=n_sentences,
        alpha=alpha,
        beta=beta,
        window_size_w=w,
        stride_t=t,
        window_count_k=k,
        pair_count_m=max(0, k - 1),
    )


def window_texts(sentences: Sequence[Sentence], plan: WindowPlan) -> list[str]:
    """Concatenate each window's sentences into one segment string."""
    w = plan.window_size_w
    return [
        "".join(s.text for s in sentences[start : start + w])
        for start in plan.start_indices()
    ]


def pair_similarities_from_vectors(vectors: Sequence) -> list[float]:
    """Clipped cosine similarity of each adjacent window pair."""
    return [
        max(0.0, cosine_similarity(vectors[i], vectors[i + 1]))
        for i in range(len(vectors) - 1)
    ]


def compute_ird(
    pre_answer_sentences: Sequence[Sentence],
    plan: WindowPlan,
    embedder: Union[Embedder, EmbedderConfig],
) -> tuple[float, list[float]]:
    """Internal redundancy degree over the pre-answer sentences.

    Each window is embedded as one segment; adjacent windows are compared
    by cosine similarity with negative values clipped to zero, and the
    degree is the mean over the adjacent pairs. With fewer than two
    windows there is no pair evidence of redundancy and the degree is 0.
    """
    if plan.pair_count_m == 0:
        return 0.0, []
    texts = window_texts(pre_answer_sentences, plan)
    vectors = as_embedder(embedder).embed_batch(texts)
    sims = pair_similarities_from_vectors(vectors)
    return sum(sims) / len(sims), sims


def compute_erd(segmentation: Segmentation) -> float:
    """External redundancy degree: tokens past the boundary over total."""
    if segmentation.l_total <= 0:
        raise ZeroLengthTraceError("trace has zero total length")
    if segmentation.fcs_end_sentence is None:
        return 0.0
    return segmentation.l_external / segmentation.l_total


def compute_te(accuracy_percent: float, mean_tokens: float) -> float:
    """Token efficiency: accuracy (percent) over the square root of length.

    With accuracy given in percent the result already carries the x100
    reporting scale.
    """
    if not (0.0 <= accuracy_percent <= 100.0):
        raise ParameterDomainError("accuracy_percent must be in [0, 100]")
    if mean_tokens <= 0:
        raise ParameterDomainError("mean_tokens must be positive")
    return accuracy_percent / math.sqrt(mean_tokens)
