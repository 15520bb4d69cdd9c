"""HTTP client for the reward-scoring service.

The client passes the service's numbers through untouched: result records
hold exactly what the JSON body carried, with no re-rounding, so trainer
code sees the service's serialized decimals bit for bit.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import requests

ENDPOINT_ENV_VAR = "REDTRACE_ENDPOINT"
TOKEN_ENV_VAR = "REDTRACE_TOKEN"

_RETRY_BASE_DELAY = 0.25


class TransportError(Exception):
    """The service stayed unreachable across all attempts."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts


class ServiceError(Exception):
    """The service answered with a definitive (non-transient) error."""

    def __init__(self, status_code: int, detail: str):
        super().__init__(f"service returned {status_code}: {detail}")
        self.status_code = status_code


class SchemaError(Exception):
    """The service answered 200 with an unexpected payload shape."""


class ShapeMismatchError(Exception):
    """Prompt / response / ground-truth lengths do not line up."""


@dataclass(frozen=True)
class ScoreResult:
    """Mirror of one /v1/score response: result and error records as sent."""

    results: list[dict]
    errors: list[dict]


class RewardClient:
    """Synchronous client; safe for concurrent use from trainer workers.

    The underlying session pools connections per host. Endpoint and token
    default to the ``REDTRACE_ENDPOINT`` / ``REDTRACE_TOKEN`` environment
    variables.
    """

    def __init__(
        self,
        endpoint: Optional[str] = None,
        token: Optional[str] = None,
        timeout: float = 60.0,
        max_retries: int = 3,
        session: Optional[requests.Session] = None,
    ):
        endpoint = endpoint or os.environ.get(ENDPOINT_ENV_VAR)
        if not endpoint:
            raise ValueError(
                f"no endpoint given and {ENDPOINT_ENV_VAR} is not set"
            )
        self.endpoint = endpoint.rstrip("/")
        self.token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)
        self.timeout = timeout
        self.max_retries = max_retries
        self._session = session or requests.Session()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["X-Auth-Token"] = self.token
        return headers

    def _post(self, path: str, body: dict) -> dict:
        url = f"{self.endpoint}{path}"
        attempts = 0
        last_failure: Optional[str] = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(_RETRY_BASE_DELAY * 2 ** (attempt - 1))
            attempts += 1
            try:
                response = self._session.post(
                    url, json=body, headers=self._headers(), timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_failure = str(exc)
                continue
            if response.status_code >= 500:
                last_failure = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise ServiceError(response.status_code, response.text[:300])
            try:
                return response.json()
            except ValueError as exc:
                raise SchemaError(f"response body is not JSON: {exc}") from exc
        raise TransportError(f"POST {url} failed: {last_failure}", attempts)

    def score(
        self, items: Sequence[dict], overrides: Optional[dict] = None
    ) -> ScoreResult:
        """Score a batch of ``{id, text, conclusion?, ground_truth}`` items.

        Mirrors the /v1/score response exactly, preserving order. Retries
        idempotently on transient transport failures.
        """
        body: dict = {"items": list(items)}
        if overrides:
            body["config_override"] = overrides
        payload = self._post("/v1/score", body)
        results = payload.get("results")
        errors = payload.get("errors")
        if not isinstance(results, list) or not isinstance(errors, list):
            raise SchemaError(f"unexpected score payload keys: {sorted(payload)}")
        return ScoreResult(results=results, errors=errors)

    def as_reward_fn(
        self, k_samples: int
    ) -> Callable[[Sequence[str], Sequence[str], Sequence[str]], list[float]]:
        """Adapt scoring to the group-sampling reward-function convention.

        The returned callable takes ``prompts``, the flat row-major
        ``responses`` (``k_samples`` per prompt), and one ground truth per
        prompt (or one per response), and returns one reward per response
        in the same order. A response the service could not score earns
        0.0, like an incorrect one.
        """
        if k_samples < 1:
            raise ValueError("k_samples must be >= 1")

        def reward_fn(
            prompts: Sequence[str],
            responses: Sequence[str],
            ground_truths: Sequence[str],
        ) -> list[float]:
            n_prompts = len(prompts)
            if len(responses) != n_prompts * k_samples:
                raise ShapeMismatchError(
                    f"expected {n_prompts} x {k_samples} = {n_prompts * k_samples} "
                    f"responses, got {len(responses)}"
                )
            if len(ground_truths) == n_prompts:
                per_response_gt = [
                    ground_truths[i // k_samples] for i in range(len(responses))
                ]
            elif len(ground_truths) == len(responses):
                per_response_gt = list(ground_truths)
            else:
                raise ShapeMismatchError(
                    f"ground_truths must have {n_prompts} (per prompt) or "
                    f"{len(responses)} (per response) entries, got {len(ground_truths)}"
                )

            items = [
                {"id": str(idx), "text": response, "ground_truth": gt}
                for idx, (response, gt) in enumerate(zip(responses, per_response_gt))
            ]
            outcome = self.score(items)
            rewards = [0.0] * len(responses)
            for record in outcome.results:
                rewards[int(record["id"])] = record["reward"]
            return rewards

        return reward_fn
