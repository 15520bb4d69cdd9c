"""Corpus ingestion, bulk scoring, and summary-table rendering.

Corpora are JSONL files of trace records ``{id, text, conclusion?,
ground_truth}``. Evaluation aggregates Pass@1 accuracy, mean reasoning
tokens (conclusions excluded), mean redundancy degrees (x100), and token
efficiency into one summary row plus per-trace reports.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .embedder import Embedder, EmbedderConfig, as_embedder
from .errors import NonNumericAnswerError, RedtraceError
from .metrics import compute_te
from .reward import PenaltyConfig, score_batch
from .segmenter import make_trace
from .types import (
    ReasoningTrace,
    RedundancyReport,
    ScoreError,
    TokenCounter,
    round6,
    whitespace_token_count,
)


@dataclass(frozen=True)
class LoadError:
    """One rejected corpus line."""

    line_number: int
    message: str


@dataclass(frozen=True)
class LoadResult:
    """Traces parsed from a corpus file plus per-line rejections."""

    traces: list[ReasoningTrace]
    errors: list[LoadError]


@dataclass(frozen=True)
class CorpusSummary:
    """Aggregate metrics for one corpus, following the usual report row.

    ``accuracy_percent`` is Pass@1 in percent; ``mean_tokens`` counts the
    reasoning portion only. Redundancy degrees carry the x100 reporting
    scale and come in two aggregations: over all scored traces and over
    correct ones only. ``te`` is recomputable as
    ``accuracy_percent / sqrt(mean_tokens)``.
    """

    n_traces: int
    n_instances: int
    n_correct: int
    n_errors: int
    accuracy_percent: float
    mean_tokens: float
    mean_ird_all: float
    mean_ird_correct: float
    mean_erd_all: float
    mean_erd_correct: float
    te: float

    def to_dict(self) -> dict:
        return {
            "n_traces": self.n_traces,
            "n_instances": self.n_instances,
            "n_correct": self.n_correct,
            "n_errors": self.n_errors,
            "accuracy_percent": round6(self.accuracy_percent),
            "mean_tokens": round6(self.mean_tokens),
            "mean_ird_all": round6(self.mean_ird_all),
            "mean_ird_correct": round6(self.mean_ird_correct),
            "mean_erd_all": round6(self.mean_erd_all),
            "mean_erd_correct": round6(self.mean_erd_correct),
            "te": round6(self.te),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusSummary":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def load_corpus(
    path: Union[str, Path], counter: TokenCounter = whitespace_token_count
) -> LoadResult:
    """Parse a JSONL corpus file, one trace record per line.

    Blank lines are skipped. Lines that are not JSON objects, miss the
    ``text`` or ``ground_truth`` field, or carry a non-numeric ground
    truth are collected as line-numbered errors instead of failing the
    load.
    """
    traces: list[ReasoningTrace] = []
    errors: list[LoadError] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(LoadError(line_number, f"invalid JSON: {exc}"))
                continue
            if not isinstance(record, dict):
                errors.append(LoadError(line_number, "record is not a JSON object"))
                continue
            missing = [key for key in ("text", "ground_truth") if key not in record]
            if missing:
                errors.append(
                    LoadError(line_number, f"missing field(s): {', '.join(missing)}")
                )
                continue
            try:
                traces.append(
                    make_trace(
                        trace_id=str(record.get("id", f"line-{line_number}")),
                        text=record["text"],
                        ground_truth=str(record["ground_truth"]),
                        conclusion=record.get("conclusion"),
                        counter=counter,
                    )
                )
            except NonNumericAnswerError as exc:
                errors.append(LoadError(line_number, f"bad ground_truth: {exc}"))
            except RedtraceError as exc:
                errors.append(LoadError(line_number, str(exc)))
    return LoadResult(traces=traces, errors=errors)


def _instance_groups(traces: Sequence[ReasoningTrace], samples_per_item: int) -> list[list[int]]:
    """Group trace indexes into instances for Pass@1.

    Records sharing an id form one instance. When every id is unique and
    ``samples_per_item`` > 1, consecutive records are chunked instead,
    covering corpora that store multiple samples per problem without
    repeating ids.
    """
    by_id: dict[str, list[int]] = {}
    for idx, trace in enumerate(traces):
        by_id.setdefault(trace.id, []).append(idx)
    if any(len(v) > 1 for v in by_id.values()):
        return list(by_id.values())
    if samples_per_item > 1:
        return [
            list(range(i, min(i + samples_per_item, len(traces))))
            for i in range(0, len(traces), samples_per_item)
        ]
    return [[i] for i in range(len(traces))]


def evaluate_corpus(
    traces: Sequence[ReasoningTrace],
    penalty: PenaltyConfig = PenaltyConfig(),
    embedder: Union[Embedder, EmbedderConfig, None] = None,
    samples_per_item: int = 1,
    jobs: int = 1,
) -> tuple[CorpusSummary, list[Union[RedundancyReport, ScoreError]]]:
    """Score every trace and aggregate the corpus summary.

    Per-trace failures become error records and are excluded from the
    means. ``jobs`` > 1 fans scoring out over contiguous corpus chunks
    with a thread pool; result order matches input order either way.
    """
    if not traces:
        raise ValueError("evaluate_corpus requires a non-empty corpus")
    if samples_per_item < 1:
        raise ValueError("samples_per_item must be >= 1")
    emb = as_embedder(embedder if embedder is not None else EmbedderConfig())

    items: list[Union[tuple[ReasoningTrace, object], ScoreError]] = []
    for trace in traces:
        if trace.ground_truth is None:
            items.append(ScoreError(trace_id=trace.id, message="missing ground truth"))
        else:
            items.append((trace, trace.ground_truth))

    scorable = [item for item in items if not isinstance(item, ScoreError)]
    if scorable:
        if jobs > 1 and len(scorable) > 1:
            n_chunks = min(jobs, len(scorable))
            size = -(-len(scorable) // n_chunks)
            chunks = [scorable[i : i + size] for i in range(0, len(scorable), size)]
            with ThreadPoolExecutor(max_workers=n_chunks) as pool:
                scored_chunks = list(
                    pool.map(lambda c: score_batch(c, penalty, emb), chunks)
                )
            scored = [report for chunk in scored_chunks for report in chunk]
        else:
            scored = score_batch(scorable, penalty, emb)
    else:
        scored = []

    results: list[Union[RedundancyReport, ScoreError]] = []
    cursor = 0
    for item in items:
        if isinstance(item, ScoreError):
            results.append(item)
        else:
            results.append(scored[cursor])
            cursor += 1

    reports = {
        idx: r for idx, r in enumerate(results) if isinstance(r, RedundancyReport)
    }
    n_errors = len(results) - len(reports)

    groups = _instance_groups(traces, samples_per_item)
    instance_rates = []
    for group in groups:
        scored_members = [reports[i] for i in group if i in reports]
        if scored_members:
            instance_rates.append(
                sum(1 for r in scored_members if r.correct) / len(scored_members)
            )
    if not instance_rates or not reports:
        raise RedtraceError("no trace in the corpus could be scored")

    accuracy = 100.0 * sum(instance_rates) / len(instance_rates)
    all_reports = list(reports.values())
    correct_reports = [r for r in all_reports if r.correct]
    mean_tokens = sum(r.segmentation.l_total for r in all_reports) / len(all_reports)

    def mean(values: list[float]) -> float:
        return sum(values) / len(values) if values else 0.0

    summary = CorpusSummary(
        n_traces=len(traces),
        n_instances=len(instance_rates),
        n_correct=len(correct_reports),
        n_errors=n_errors,
        accuracy_percent=accuracy,
        mean_tokens=mean_tokens,
        mean_ird_all=100.0 * mean([r.ird for r in all_reports]),
        mean_ird_correct=100.0 * mean([r.ird for r in correct_reports]),
        mean_erd_all=100.0 * mean([r.erd for r in all_reports]),
        mean_erd_correct=100.0 * mean([r.erd for r in correct_reports]),
        te=compute_te(accuracy, mean_tokens),
    )
    return summary, results


_CSV_HEADER = "accuracy,tokens,ird,erd,te"


def _row_values(summary: CorpusSummary) -> tuple[str, str, str, str, str]:
    # The single-row formats report the correct-only redundancy means:
    # the boundary, and with it both degrees, is defined by the correct
    # answer. The JSON format carries both aggregations.
    return (
        f"{summary.accuracy_percent:.1f}",
        f"{summary.mean_tokens:.0f}",
        f"{summary.mean_ird_correct:.1f}",
        f"{summary.mean_erd_correct:.1f}",
        f"{summary.te:.2f}",
    )


def render_report(summary: CorpusSummary, format: str = "table") -> str:
    """Render a summary as ``table``, ``csv``, or ``json``.

    The table and csv formats print one row in the conventional column
    order (Accuracy, Tokens, IRD, ERD, TE) at 1-decimal precision for the
    percentages, integer tokens, and 2-decimal TE. The json format is
    lossless at six decimals and round-trips through
    :meth:`CorpusSummary.from_dict`.
    """
    if format == "json":
        return json.dumps(summary.to_dict(), indent=2)
    values = _row_values(summary)
    if format == "csv":
        return _CSV_HEADER + "\n" + ",".join(values)
    if format == "table":
        headers = ("Accuracy", "Tokens", "IRD", "ERD", "TE")
        widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
        head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
        row = "  ".join(v.rjust(w) for v, w in zip(values, widths))
        return head + "\n" + row
    raise ValueError(f"unknown report format: {format!r}")


def render_series(results: Sequence[Union[RedundancyReport, ScoreError]]) -> str:
    """Per-trace (index, ird, erd, reward) CSV for external plotting."""
    lines = ["index,ird,erd,reward"]
    for idx, item in enumerate(results):
        if isinstance(item, RedundancyReport):
            lines.append(
                f"{idx},{round6(item.ird)},{round6(item.erd)},{round6(item.reward)}"
            )
    return "\n".join(lines)
