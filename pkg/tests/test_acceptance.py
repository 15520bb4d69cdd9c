"""Acceptance suite: one test per gate criterion, at its stated tolerance.

Each criterion prints its own pass line (visible with ``pytest -s``); the
oracles here are deliberately re-derived from first principles rather
than imported from the library or the other test modules.
"""

import math
import random
import time
import zlib

import pytest
from fastapi.testclient import TestClient

from redtrace import (
    Embedder,
    EmbedderConfig,
    PenaltyConfig,
    compose_reward,
    compute_erd,
    compute_ird,
    external_penalty,
    find_fcs_boundary,
    internal_penalty,
    make_trace,
    normalize_answer,
    plan_windows,
    score_response,
)
from redtrace.service import create_app
from redtrace.types import round6


def _passed(name: str) -> None:
    print(f"[PASS] {name}")


# --- criterion 1: token-efficiency arithmetic reproduces the reference table

TE_TABLE = [
    # (accuracy %, mean tokens, printed TE) for the original and final rows
    # of both model sizes across the three benchmarks
    (84.1, 1555, 2.13),
    (82.2, 3549, 1.38),
    (28.5, 8681, 0.31),
    (84.9, 513, 3.75),
    (83.8, 1505, 2.16),
    (34.0, 6077, 0.44),
    (91.1, 844, 3.14),
    (91.2, 2836, 1.71),
    (52.3, 7241, 0.61),
    (90.9, 318, 5.10),
    (89.8, 1200, 2.59),
    (53.2, 5025, 0.75),
]


def test_criterion_1_te_table_arithmetic():
    from redtrace import compute_te

    for accuracy, tokens, expected in TE_TABLE:
        got = compute_te(accuracy, tokens)
        assert abs(got - expected) <= 0.005, (accuracy, tokens, got, expected)
    _passed(
        f"TE arithmetic: all {len(TE_TABLE)} (accuracy, tokens) pairs within ±0.005"
    )


# --- criterion 2: sigmoid penalty endpoints and the negligible-below-half claim

def test_criterion_2_sigmoid_penalty_endpoints():
    assert abs(internal_penalty(0.0) - 1.0) <= 1e-12
    assert abs(internal_penalty(1.0) - 0.0) <= 1e-12
    # independently derived with 50-digit arithmetic from
    # sigma_k(x) = 1 / (1 + exp(-20 (x - 0.3)))
    assert abs(internal_penalty(0.5) - 0.9820) <= 1e-3
    assert abs(internal_penalty(0.5) - 0.9819700252404026) <= 1e-12
    grid = [i / 1000 for i in range(501)]
    assert all(internal_penalty(ird) >= 0.98 for ird in grid)
    _passed(
        "sigmoid penalty: endpoints exact to 1e-12, p(0.5)=0.9820±1e-3, "
        "multiplier ≥ 0.98 for ird ≤ 0.5"
    )


# --- criterion 3: window plan vs brute-force enumerator, N in [1, 500]

def test_criterion_3_window_plan_oracle():
    started = time.monotonic()
    alphas = [round(0.05 + 0.1 * i, 2) for i in range(10)]
    betas = [round(0.04 + 0.1 * i, 2) for i in range(10)]
    checked = 0
    for n in range(1, 501):
        for alpha in alphas:
            for beta in betas:
                if not beta < alpha:
                    continue
                plan = plan_windows(n, alpha, beta)
                w = max(1, math.floor(alpha * n))
                t = max(1, math.floor(beta * n))
                starts = []
                s = 0
                while s + w <= n:
                    starts.append(s)
                    s += t
                if not starts:
                    starts = [0]
                assert plan.window_size_w == w
                assert plan.stride_t == t
                assert plan.start_indices() == starts
                assert plan.window_count_k == len(starts)
                assert plan.pair_count_m == len(starts) - 1
                checked += 1
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    _passed(
        f"window plan: exact match with brute-force enumerator on {checked} "
        f"(N, alpha, beta) combinations in {elapsed:.1f}s"
    )


# --- criterion 4: batched+cached IRD equals a naive single-threaded reference

def _naive_reference_ird(sentences, plan) -> float:
    """Fresh re-derivation: crc32 bag-of-words, pure-python cosine."""
    if plan.pair_count_m == 0:
        return 0.0
    w, t, n = plan.window_size_w, plan.stride_t, len(sentences)
    starts = []
    s = 0
    while s + w <= n:
        starts.append(s)
        s += t
    vectors = []
    for start in starts:
        text = "".join(sent.text for sent in sentences[start : start + w])
        counts = [0.0] * 256
        for token in text.split():
            counts[zlib.crc32(token.encode("utf-8")) % 256] += 1.0
        norm = math.sqrt(sum(c * c for c in counts))
        vectors.append([c / norm for c in counts])
    sims = []
    for a, b in zip(vectors, vectors[1:]):
        dot = sum(x * y for x, y in zip(a, b))
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(x * x for x in b))
        sims.append(max(0.0, dot / (na * nb)))
    return sum(sims) / len(sims)


def test_criterion_4_ird_oracle_equivalence(tmp_path):
    rng = random.Random(2024)
    words = ["sum", "carry", "total", "split", "check", "group", "term", "half"]
    embedder = Embedder(EmbedderConfig(cache_dir=str(tmp_path)))
    params = [(0.1, 0.05), (0.3, 0.15), (0.5, 0.2)]
    for case in range(200):
        n_sentences = rng.randint(1, 35)
        text = " ".join(
            " ".join(rng.choice(words) for _ in range(rng.randint(2, 8))) + "."
            for _ in range(n_sentences)
        )
        trace = make_trace(f"case-{case}", text)
        alpha, beta = params[case % len(params)]
        plan = plan_windows(trace.n_sentences, alpha, beta)
        ird, _ = compute_ird(trace.sentences, plan, embedder)
        expected = _naive_reference_ird(trace.sentences, plan)
        assert abs(ird - expected) <= 1e-9, (case, ird, expected)
    assert embedder.cache_hits > 0  # the cached path was actually exercised
    _passed("IRD: batched+cached path equals naive reference on 200 traces (1e-9)")


# --- criterion 5: exact ERD on constructed boundaries; digit-boundary matching

def _char_scan_match(text: str, needle: str) -> bool:
    width = len(needle)
    for p in range(len(text) - width + 1):
        if text[p : p + width] != needle:
            continue
        before = text[p - 1] if p > 0 else ""
        after = text[p + width] if p + width < len(text) else ""
        if not before.isdigit() and not after.isdigit():
            return True
    return False


def test_criterion_5_erd_and_fcs_properties():
    # constructed traces with known boundaries: ERD is the exact ratio
    for n_pre, n_post in [(1, 0), (2, 3), (5, 5), (10, 1)]:
        pre = " ".join(f"work unit {i} done." for i in range(n_pre))
        answer_sentence = "the answer is 777."
        post = " ".join(f"extra verification pass {i}." for i in range(n_post))
        text = " ".join(filter(None, [pre, answer_sentence, post]))
        trace = make_trace("t", text)
        seg = find_fcs_boundary(trace, normalize_answer("777"))
        assert seg.fcs_end_sentence == n_pre
        assert compute_erd(seg) == seg.l_external / seg.l_total
        expected_external = sum(
            s.token_count for s in trace.sentences[n_pre + 1 :]
        )
        assert seg.l_external == expected_external

    # matcher agrees with the character-level scanner on random digit traces
    rng = random.Random(555)
    agreements = 0
    for _ in range(1000):
        values = [rng.randint(0, 10**6) for _ in range(rng.randint(1, 25))]
        text = " ".join(str(v) for v in values) + "."
        if rng.random() < 0.5:
            answer = rng.choice(values)
        else:
            answer = rng.randint(0, 10**6)
        trace = make_trace("t", text)
        seg = find_fcs_boundary(trace, normalize_answer(str(answer)))
        assert (seg.fcs_end_sentence is not None) == _char_scan_match(
            text, str(answer)
        )
        agreements += 1
    _passed(
        f"ERD exact on constructed boundaries; matcher = char-level scanner "
        f"on {agreements} random digit traces"
    )


# --- criterion 6: reward composition fixture suite

def test_criterion_6_reward_composition():
    derived_p_int = {0.0: 1.0, 0.5: 0.9819700252404026, 1.0: 0.0}
    derived_p_ext = {0.0: 1.0, 0.2: 0.8, 1.0: 0.0}
    cases = 0
    for correct in (True, False):
        for ird, p_int_expected in derived_p_int.items():
            for erd, p_ext_expected in derived_p_ext.items():
                p_int = internal_penalty(ird)
                p_ext = external_penalty(erd)
                reward = compose_reward(correct, p_int, p_ext)
                if not correct:
                    assert reward == 0.0
                else:
                    assert reward == p_int * p_ext
                    assert abs(reward - p_int_expected * p_ext_expected) <= 1e-12
                cases += 1
    _passed(f"reward composition: 1·p_int·p_ext exact on all {cases} fixtures")


# --- criterion 7: monotonicity of the penalty and of the composed reward

def test_criterion_7_monotonicity():
    grid = [i / 1000 for i in range(1001)]
    penalties = [internal_penalty(x) for x in grid]
    assert all(a > b for a, b in zip(penalties, penalties[1:]))

    for erd_fixed in (0.0, 0.3, 0.9):
        rewards = [
            compose_reward(True, internal_penalty(x), external_penalty(erd_fixed))
            for x in grid
        ]
        assert all(a >= b for a, b in zip(rewards, rewards[1:]))
    for ird_fixed in (0.0, 0.4, 0.8):
        rewards = [
            compose_reward(True, internal_penalty(ird_fixed), external_penalty(x))
            for x in grid
        ]
        assert all(a >= b for a, b in zip(rewards, rewards[1:]))
    _passed(
        "monotonicity: penalty strictly decreasing on 1000-point grid; "
        "reward non-increasing in each degree with the other fixed"
    )


# --- criterion 8: the service is value-identical to direct library calls

def test_criterion_8_service_library_equivalence():
    rng = random.Random(808)
    words = ["solve", "reduce", "expand", "collect", "verify", "restate"]
    items = []
    for i in range(100):
        answer = rng.randint(10, 999)
        final = answer if rng.random() < 0.7 else answer + 1
        n_sentences = rng.randint(1, 10)
        body = " ".join(
            " ".join(rng.choice(words) for _ in range(rng.randint(2, 6))) + f" {rng.randint(0, 9)}."
            for _ in range(n_sentences)
        )
        items.append(
            {
                "id": f"case-{i}",
                "text": f"{body} So the result is {final}.",
                "ground_truth": str(answer),
            }
        )

    app = create_app(penalty=PenaltyConfig(), embedder=EmbedderConfig())
    with TestClient(app) as client:
        response = client.post("/v1/score", json={"items": items})
        assert response.status_code == 200
        payload = response.json()
    assert payload["errors"] == []
    assert len(payload["results"]) == 100

    embedder = Embedder(EmbedderConfig())
    for served, raw in zip(payload["results"], items):
        trace = make_trace(raw["id"], raw["text"])
        direct = score_response(
            trace, normalize_answer(raw["ground_truth"]), PenaltyConfig(), embedder
        )
        assert served["id"] == direct.trace_id
        assert served["correct"] == direct.correct
        assert served["ird"] == round6(direct.ird)
        assert served["erd"] == round6(direct.erd)
        assert served["p_int"] == round6(direct.p_int)
        assert served["p_ext"] == round6(direct.p_ext)
        assert served["reward"] == round6(direct.reward)
        assert served["fcs_sentence_index"] == direct.segmentation.fcs_end_sentence
    _passed("service /v1/score value-identical to score_response on 100 items")
