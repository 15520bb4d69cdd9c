"""Sentence splitting, answer normalization, and FCS boundary location.

All functions here are pure and safe for concurrent invocation. Sentence
splitting uses a deterministic rule list (no learned model) so that the
downstream redundancy metrics are reproducible across runs.
"""

from __future__ import annotations

import re
from typing import Optional, Union

from .errors import EmptyTraceError, NonNumericAnswerError
from .types import (
    AnswerValue,
    ReasoningTrace,
    Segmentation,
    Sentence,
    TokenCounter,
    whitespace_token_count,
)

_TERMINALS = ".!?"

# Final periods of these tokens never end a sentence. Kept short and
# auditable; entries are matched case-insensitively against the word
# (including interior dots) directly before the period.
_ABBREVIATIONS = {
    "e.g.", "i.e.", "etc.", "cf.", "vs.", "viz.", "al.", "approx.",
    "dr.", "mr.", "mrs.", "ms.", "prof.", "st.",
    "fig.", "figs.", "eq.", "eqs.", "sec.", "ch.", "vol.", "pp.",
}

# Unsigned numeric literals: thousands-separated groups first so that
# "1,024" is one token, then plain integers/decimals, then bare ".5".
# Maximal munch means a literal is never found inside a longer digit run.
_NUMERAL_RE = re.compile(r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\.\d+")
_SIGNED_NUMERAL_RE = re.compile(
    r"[-+]?(?:\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\.\d+)"
)

_WRAPPER_RES = (
    re.compile(r"\\boxed\s*\{(.*)\}", re.S),
    re.compile(r"\$\$(.*)\$\$", re.S),
    re.compile(r"\$(.*)\$", re.S),
    re.compile(r"\\\((.*)\\\)", re.S),
    re.compile(r"\\\[(.*)\\\]", re.S),
    re.compile(r"\{(.*)\}", re.S),
)


def _is_abbreviation(text: str, dot_index: int) -> bool:
    k = dot_index - 1
    while k >= 0 and (text[k].isalpha() or text[k] == "."):
        k -= 1
    word = text[k + 1 : dot_index]
    if not word:
        return False
    return (word + ".").lower() in _ABBREVIATIONS


def split_sentences(
    raw_text: str, counter: TokenCounter = whitespace_token_count
) -> list[Sentence]:
    """Split raw text into sentences covering every character exactly once.

    Boundaries fall after runs of terminal punctuation (``. ! ?``) that are
    followed by whitespace or end of text, and at line breaks. A period
    inside a number (``3.14``) or after a known abbreviation does not end a
    sentence. Trailing whitespace attaches to the sentence it follows, so
    concatenating the sentence texts in order reconstructs the input
    exactly.

    Raises :class:`EmptyTraceError` for whitespace-only input.
    """
    if not raw_text.strip():
        raise EmptyTraceError("trace text is empty or whitespace-only")

    n = len(raw_text)
    boundaries: list[int] = []
    i = 0
    while i < n:
        ch = raw_text[i]
        if ch == "\n":
            boundaries.append(i)
            i += 1
        elif ch in _TERMINALS:
            j = i
            while j < n and raw_text[j] in _TERMINALS:
                j += 1
            followed_ok = j == n or raw_text[j].isspace()
            guarded = (j - i == 1) and ch == "." and _is_abbreviation(raw_text, i)
            if followed_ok and not guarded:
                boundaries.append(j)
            i = j
        else:
            i += 1

    spans: list[tuple[int, int]] = []
    start = 0
    for b in boundaries:
        if b <= start:
            continue
        if not raw_text[start:b].strip():
            continue
        end = b
        while end < n and raw_text[end].isspace():
            end += 1
        spans.append((start, end))
        start = end
    if start < n:
        if raw_text[start:].strip():
            spans.append((start, n))
        elif spans:
            spans[-1] = (spans[-1][0], n)
        else:
            spans.append((start, n))

    return [
        Sentence(
            index=idx,
            text=raw_text[s:e],
            char_span=(s, e),
            token_count=counter(raw_text[s:e]),
        )
        for idx, (s, e) in enumerate(spans)
    ]


def _strip_wrappers(s: str) -> str:
    s = s.strip()
    changed = True
    while changed:
        changed = False
        for pattern in _WRAPPER_RES:
            m = pattern.fullmatch(s)
            if m:
                s = m.group(1).strip()
                changed = True
                break
    return s


def _canonical_number(literal: str) -> str:
    """Reduce a numeric literal to canonical form.

    Drops thousands separators, a leading '+', leading zeros, and trailing
    zeros after the decimal point; keeps a '-' sign except on zero.
    """
    literal = literal.replace(",", "")
    sign = ""
    if literal and literal[0] in "+-":
        sign = "-" if literal[0] == "-" else ""
        literal = literal[1:]
    if "." in literal:
        int_part, frac_part = literal.split(".", 1)
    else:
        int_part, frac_part = literal, ""
    int_part = int_part.lstrip("0") or "0"
    frac_part = frac_part.rstrip("0")
    canonical = int_part + ("." + frac_part if frac_part else "")
    if sign and canonical != "0":
        canonical = sign + canonical
    return canonical


def normalize_answer(raw: str) -> AnswerValue:
    """Normalize an answer string to its canonical numeric form.

    Strips surrounding math-markup wrappers (boxed notation, ``$`` / LaTeX
    delimiters, braces), thousands separators, a leading '+', and trailing
    zeros after a decimal point. Raises :class:`NonNumericAnswerError` when
    no numeric literal remains.
    """
    stripped = _strip_wrappers(raw)
    stripped = re.sub(r"(?<=\d),(?=\d)", "", stripped)
    literals = _SIGNED_NUMERAL_RE.findall(stripped)
    if not literals:
        raise NonNumericAnswerError(f"no numeric literal in answer: {raw!r}")
    return AnswerValue(canonical=_canonical_number(literals[-1]), raw=raw)


def extract_final_answer(trace: ReasoningTrace) -> Optional[AnswerValue]:
    """Extract the trace's predicted final answer.

    The conclusion field takes precedence when it holds a numeric literal;
    otherwise the last numeric literal of the raw text is used. Returns
    ``None`` when no numeric literal exists anywhere.
    """
    for source in (trace.conclusion, trace.raw_text):
        if not source:
            continue
        try:
            return normalize_answer(source)
        except NonNumericAnswerError:
            continue
    return None


def _match_in_sentence(text: str, canonical: str) -> Optional[re.Match]:
    """Find the answer as a standalone numeric token within sentence text.

    Tokens are maximal numeric literals, so a match can never start or end
    inside a longer digit run; each token is normalized the same way as
    answers before comparison. A negative answer additionally requires a
    '-' directly before the token.
    """
    negative = canonical.startswith("-")
    target = canonical[1:] if negative else canonical
    for m in _NUMERAL_RE.finditer(text):
        if _canonical_number(m.group(0)) != target:
            continue
        if negative and (m.start() == 0 or text[m.start() - 1] != "-"):
            continue
        return m
    return None


def find_fcs_boundary(trace: ReasoningTrace, answer: AnswerValue) -> Segmentation:
    """Locate the earliest sentence containing the final correct answer.

    The boundary sentence closes the pre-answer segment; everything after
    it is the post-answer segment whose token count is ``l_external``.
    When no sentence contains the answer the boundary is absent, the whole
    trace is pre-answer, and ``l_external`` is 0.
    """
    n = trace.n_sentences
    for sentence in trace.sentences:
        m = _match_in_sentence(sentence.text, answer.canonical)
        if m is None:
            continue
        i = sentence.index
        l_external = sum(s.token_count for s in trace.sentences[i + 1 :])
        return Segmentation(
            fcs_end_sentence=i,
            pre_answer=(0, i + 1),
            post_answer=(i + 1, n),
            l_external=l_external,
            l_total=trace.token_count_total,
            match_text=m.group(0),
            match_span=(m.start(), m.end()),
        )
    return Segmentation(
        fcs_end_sentence=None,
        pre_answer=(0, n),
        post_answer=(n, n),
        l_external=0,
        l_total=trace.token_count_total,
    )


def is_correct(y_pred: Optional[AnswerValue], y_gt: AnswerValue) -> bool:
    """Accuracy indicator: predicted answer present and canonically equal."""
    return y_pred is not None and y_pred.canonical == y_gt.canonical


def make_trace(
    trace_id: str,
    text: str,
    ground_truth: Union[AnswerValue, str, None] = None,
    conclusion: Optional[str] = None,
    counter: TokenCounter = whitespace_token_count,
) -> ReasoningTrace:
    """Build a :class:`ReasoningTrace` from raw fields.

    Splits the text into sentences, applies the token counter, and
    normalizes a string ground truth.
    """
    sentences = split_sentences(text, counter)
    if isinstance(ground_truth, str):
        ground_truth = normalize_answer(ground_truth)
    return ReasoningTrace(
        id=trace_id,
        raw_text=text,
        sentences=tuple(sentences),
        token_count_total=counter(text),
        ground_truth=ground_truth,
        conclusion=conclusion,
    )
