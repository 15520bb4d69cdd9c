"""Command-line entry point: segment, analyze, serve.

Exit codes: 0 success, 1 per-item errors occurred (a report is still
printed), 2 fatal configuration or IO errors. Machine-readable output
goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .corpus import evaluate_corpus, load_corpus, render_report, render_series
from .embedder import EmbedderConfig
from .errors import RedtraceError
from .metrics import compute_erd
from .reward import PenaltyConfig
from .segmenter import extract_final_answer, find_fcs_boundary, make_trace, normalize_answer

_PENALTY_KEYS = ("k", "c", "alpha", "beta", "enable_internal", "enable_external")
_EMBEDDER_KEYS = (
    "backend",
    "endpoint_url",
    "model_name",
    "batch_size",
    "max_retries",
    "cache_dir",
)
_SERVICE_KEYS = ("max_batch_size",)


def _load_config_file(path: str | None) -> dict:
    """Read the flat key-value config document (JSON object)."""
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise RedtraceError("config file must hold a flat JSON object")
    known = set(_PENALTY_KEYS) | set(_EMBEDDER_KEYS) | set(_SERVICE_KEYS)
    unknown = set(data) - known
    if unknown:
        raise RedtraceError(f"unknown config keys: {sorted(unknown)}")
    return data


def _build_configs(args: argparse.Namespace) -> tuple[PenaltyConfig, EmbedderConfig, dict]:
    """Merge config file and flags; flags win."""
    file_cfg = _load_config_file(getattr(args, "config", None))
    penalty = PenaltyConfig.from_dict(
        {k: v for k, v in file_cfg.items() if k in _PENALTY_KEYS}
    )
    embedder_kwargs = {k: v for k, v in file_cfg.items() if k in _EMBEDDER_KEYS}
    if getattr(args, "embedder", None):
        embedder_kwargs["backend"] = args.embedder
    if getattr(args, "cache_dir", None):
        embedder_kwargs["cache_dir"] = args.cache_dir
    embedder = EmbedderConfig.from_dict(embedder_kwargs)
    service_cfg = {k: v for k, v in file_cfg.items() if k in _SERVICE_KEYS}
    return penalty, embedder, service_cfg


def _read_input(spec: str) -> str:
    if spec == "-":
        return sys.stdin.read()
    return Path(spec).read_text(encoding="utf-8")


def _cmd_segment(args: argparse.Namespace) -> int:
    try:
        text = _read_input(args.input)
        trace = make_trace("cli", text)
        if args.answer is not None:
            answer = normalize_answer(args.answer)
        else:
            answer = extract_final_answer(trace)
            if answer is None:
                print("error: no numeric answer found and none supplied", file=sys.stderr)
                return 2
        segmentation = find_fcs_boundary(trace, answer)
    except (RedtraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    boundary = segmentation.fcs_end_sentence
    for sentence in trace.sentences:
        marker = "*" if boundary is not None and sentence.index == boundary else " "
        print(f"{marker} [{sentence.index}] {sentence.text.strip()}")
    print(f"answer: {answer.canonical}")
    print(f"fcs_sentence: {boundary if boundary is not None else 'absent'}")
    print(f"l_total: {segmentation.l_total}")
    print(f"l_external: {segmentation.l_external}")
    print(f"erd: {compute_erd(segmentation):.6f}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        penalty, embedder_config, _ = _build_configs(args)
        loaded = load_corpus(args.corpus)
    except (RedtraceError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for err in loaded.errors:
        print(f"line {err.line_number}: {err.message}", file=sys.stderr)
    if not loaded.traces:
        print("warning: corpus contains no usable traces", file=sys.stderr)
        return 0

    try:
        summary, results = evaluate_corpus(
            loaded.traces,
            penalty=penalty,
            embedder=embedder_config,
            samples_per_item=args.samples_per_item,
            jobs=args.jobs,
        )
    except RedtraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    rendered = render_report(summary, args.format)
    if args.out:
        Path(args.out).write_text(rendered + "\n", encoding="utf-8")
    else:
        print(rendered)
    if args.series:
        Path(args.series).write_text(render_series(results) + "\n", encoding="utf-8")

    n_score_errors = summary.n_errors
    if n_score_errors or loaded.errors:
        print(
            f"warning: {len(loaded.errors)} load error(s), "
            f"{n_score_errors} scoring error(s)",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    try:
        penalty, embedder_config, service_cfg = _build_configs(args)
    except (RedtraceError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    import uvicorn

    from .service import DEFAULT_MAX_BATCH_SIZE, create_app

    max_batch = args.max_batch or service_cfg.get("max_batch_size", DEFAULT_MAX_BATCH_SIZE)
    app = create_app(
        penalty=penalty,
        embedder=embedder_config,
        max_batch_size=max_batch,
        auth_token=os.environ.get("REDTRACE_SERVICE_TOKEN"),
    )
    logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="redtrace",
        description="Redundancy analysis and reward scoring for reasoning traces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_segment = sub.add_parser(
        "segment", help="show the answer-boundary split of one trace"
    )
    p_segment.add_argument("--input", required=True, help="text file path or - for stdin")
    p_segment.add_argument("--answer", help="answer value; default: extracted from the trace")
    p_segment.set_defaults(func=_cmd_segment)

    p_analyze = sub.add_parser("analyze", help="evaluate a JSONL corpus")
    p_analyze.add_argument("--corpus", required=True, help="JSONL corpus path")
    p_analyze.add_argument("--config", help="flat JSON config file")
    p_analyze.add_argument("--embedder", choices=("local", "remote"))
    p_analyze.add_argument("--cache-dir", dest="cache_dir")
    p_analyze.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p_analyze.add_argument("--out", help="write the report here instead of stdout")
    p_analyze.add_argument("--series", help="write per-trace (index,ird,erd,reward) CSV here")
    p_analyze.add_argument("--jobs", type=int, default=1)
    p_analyze.add_argument("--samples-per-item", type=int, default=1)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_serve = sub.add_parser("serve", help="run the HTTP reward service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8321)
    p_serve.add_argument("--config", help="flat JSON config file")
    p_serve.add_argument("--embedder", choices=("local", "remote"))
    p_serve.add_argument("--cache-dir", dest="cache_dir")
    p_serve.add_argument("--max-batch", type=int, dest="max_batch")
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
