"""Shared domain types and numeric conventions.

All types are immutable after construction and safe to share across
concurrent workers. Redundancy and penalty values are 64-bit floats;
reports serialize with six decimal digits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

REPORT_DECIMALS = 6

# Pluggable token-counting strategy. The default counts maximal runs of
# non-whitespace characters, which is deterministic and dependency-free;
# length ratios are robust to the exact choice.
TokenCounter = Callable[[str], int]


def whitespace_token_count(text: str) -> int:
    """Count maximal runs of non-whitespace characters."""
    return len(text.split())


def round6(value: float) -> float:
    """Round to the report serialization precision."""
    return round(float(value), REPORT_DECIMALS)


@dataclass(frozen=True)
class Sentence:
    """One sentence of a reasoning trace.

    ``char_span`` is a half-open [start, end) offset range into the owning
    trace's raw text; spans of consecutive sentences are adjacent and
    non-overlapping, so concatenating ``text`` in index order reconstructs
    the raw text exactly.
    """

    index: int
    text: str
    char_span: tuple[int, int]
    token_count: int


@dataclass(frozen=True)
class AnswerValue:
    """A numeric answer in canonical and original form.

    ``canonical`` contains only digits, an optional leading minus sign and
    an optional single decimal point; two answers are equal iff their
    canonical forms are string-equal.
    """

    canonical: str
    raw: str


@dataclass(frozen=True)
class ReasoningTrace:
    """One model response: the reasoning portion of a CoT output.

    ``raw_text`` excludes the conclusion where the corpus provides the
    split; ``conclusion`` is kept separately and never enters token
    statistics. ``token_count_total`` equals the configured counter applied
    to ``raw_text``.
    """

    id: str
    raw_text: str
    sentences: tuple[Sentence, ...]
    token_count_total: int
    ground_truth: Optional[AnswerValue] = None
    conclusion: Optional[str] = None

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class Segmentation:
    """The first-correct-solution boundary of a trace.

    ``fcs_end_sentence`` is the index of the earliest answer-bearing
    sentence, or ``None`` when no sentence contains the answer. Index
    ranges are half-open [start, stop); together they cover all sentences
    exactly once. ``match_span`` gives the matched token's character
    offsets inside the boundary sentence and ``match_text`` its raw form,
    so callers can audit incidental early matches.
    """

    fcs_end_sentence: Optional[int]
    pre_answer: tuple[int, int]
    post_answer: tuple[int, int]
    l_external: int
    l_total: int
    match_text: Optional[str] = None
    match_span: Optional[tuple[int, int]] = None

    def to_dict(self) -> dict:
        return {
            "fcs_end_sentence": self.fcs_end_sentence,
            "pre_answer": list(self.pre_answer),
            "post_answer": list(self.post_answer),
            "l_external": self.l_external,
            "l_total": self.l_total,
            "match_text": self.match_text,
            "match_span": list(self.match_span) if self.match_span else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Segmentation":
        return cls(
            fcs_end_sentence=data["fcs_end_sentence"],
            pre_answer=tuple(data["pre_answer"]),
            post_answer=tuple(data["post_answer"]),
            l_external=data["l_external"],
            l_total=data["l_total"],
            match_text=data.get("match_text"),
            match_span=tuple(data["match_span"]) if data.get("match_span") else None,
        )


@dataclass(frozen=True)
class WindowPlan:
    """Sliding-window sizing for a trace of ``n_sentences`` sentences.

    window_size_w = max(1, floor(alpha * N)) and
    stride_t      = max(1, floor(beta * N)); start indices advance by the
    stride while a full window fits, so all windows have equal length and,
    since the stride never exceeds the window, coverage is gap-free up to
    the end of the last window.
    """

    n_sentences: int
    alpha: float
    beta: float
    window_size_w: int
    stride_t: int
    window_count_k: int
    pair_count_m: int

    def start_indices(self) -> list[int]:
        """Regenerate the deterministic window start offsets."""
        starts = [
            s
            for s in range(0, self.n_sentences, self.stride_t)
            if s + self.window_size_w <= self.n_sentences
        ]
        if not starts:
            starts = [0]
        return starts

    def to_dict(self) -> dict:
        return {
            "n_sentences": self.n_sentences,
            "alpha": self.alpha,
            "beta": self.beta,
            "window_size_w": self.window_size_w,
            "stride_t": self.stride_t,
            "window_count_k": self.window_count_k,
            "pair_count_m": self.pair_count_m,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WindowPlan":
        return cls(**data)


@dataclass(frozen=True)
class RedundancyReport:
    """Everything computed for one trace: metrics, penalties, reward.

    ``reward`` is 0 whenever ``correct`` is false and ``p_int * p_ext``
    otherwise. The redundancy metrics and penalties are always filled in;
    for incorrect traces they are diagnostic only and never reward-bearing.
    """

    trace_id: str
    correct: bool
    ird: float
    erd: float
    pair_similarities: tuple[float, ...]
    p_int: float
    p_ext: float
    reward: float
    window_plan: WindowPlan
    segmentation: Segmentation
    predicted_answer: Optional[str] = None

    def to_dict(self) -> dict:
        """Serialize with six-decimal float precision."""
        return {
            "trace_id": self.trace_id,
            "correct": self.correct,
            "ird": round6(self.ird),
            "erd": round6(self.erd),
            "pair_similarities": [round6(s) for s in self.pair_similarities],
            "p_int": round6(self.p_int),
            "p_ext": round6(self.p_ext),
            "reward": round6(self.reward),
            "window_plan": self.window_plan.to_dict(),
            "segmentation": self.segmentation.to_dict(),
            "predicted_answer": self.predicted_answer,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RedundancyReport":
        return cls(
            trace_id=data["trace_id"],
            correct=data["correct"],
            ird=data["ird"],
            erd=data["erd"],
            pair_similarities=tuple(data["pair_similarities"]),
            p_int=data["p_int"],
            p_ext=data["p_ext"],
            reward=data["reward"],
            window_plan=WindowPlan.from_dict(data["window_plan"]),
            segmentation=Segmentation.from_dict(data["segmentation"]),
            predicted_answer=data.get("predicted_answer"),
        )


@dataclass(frozen=True)
class ScoreError:
    """Per-item failure record produced by batch scoring."""

    trace_id: str
    message: str
