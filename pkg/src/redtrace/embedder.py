"""Embedding backends for windowed text segments, fronted by a cache.

Two backends share one interface: a remote client for an HTTP JSON
embeddings endpoint (request ``{model, input: [...]}``, response
``{data: [{index, embedding}]}``) and a deterministic local embedder so
tests and offline runs need no network or credentials. Vectors are cached
on disk keyed by (backend id, content digest); RL reward serving re-embeds
many near-duplicate windows, so cache hits dominate cost.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import requests

from .errors import (
    BackendUnavailableError,
    DimensionMismatchError,
    EmptySegmentError,
    ZeroVectorError,
)

LOCAL_DIM = 256
_RETRY_BASE_DELAY = 0.5
_API_KEY_ENV_VARS = ("REDTRACE_EMBEDDINGS_API_KEY", "OPENAI_API_KEY")


@dataclass(frozen=True)
class EmbeddingVector:
    """A fixed-dimension real vector for one text segment."""

    values: tuple[float, ...]
    dim: int
    backend_id: str


@dataclass(frozen=True)
class EmbedderConfig:
    """Configuration for the embedding layer.

    ``backend`` is ``"local"`` (deterministic hashed bag-of-tokens) or
    ``"remote"`` (HTTP embeddings endpoint). Credentials for the remote
    backend come from the environment, never from this object.
    """

    backend: str = "local"
    endpoint_url: str = "https://api.openai.com/v1/embeddings"
    model_name: str = "text-embedding-3-large"
    batch_size: int = 64
    max_retries: int = 3
    cache_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.backend not in ("local", "remote"):
            raise ValueError(f"unknown embedding backend: {self.backend!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "endpoint_url": self.endpoint_url,
            "model_name": self.model_name,
            "batch_size": self.batch_size,
            "max_retries": self.max_retries,
            "cache_dir": self.cache_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EmbedderConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


class LocalDeterministicBackend:
    """Hashed bag-of-tokens embedding, stable across processes and platforms.

    Each whitespace token selects a dimension via CRC-32 (a stable,
    non-cryptographic hash); token counts accumulate there and the result
    is L2-normalized. Token-overlapping windows therefore keep high cosine
    similarity, which is all the test backend needs to preserve.
    """

    def __init__(self) -> None:
        self.backend_id = f"local:hashed-bow-{LOCAL_DIM}"

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        return [self._embed_one(t) for t in texts]

    @staticmethod
    def _embed_one(text: str) -> list[float]:
        counts = np.zeros(LOCAL_DIM, dtype=np.float64)
        for token in text.split():
            counts[zlib.crc32(token.encode("utf-8")) % LOCAL_DIM] += 1.0
        norm = math.sqrt(float(np.dot(counts, counts)))
        if norm == 0.0:
            raise EmptySegmentError("segment has no tokens to embed")
        return list(counts / norm)


class RemoteBackend:
    """Client for an HTTP JSON embeddings endpoint.

    Failed requests are retried with exponential backoff; once retries are
    exhausted the whole call fails rather than silently substituting
    vectors, which would shift redundancy distributions mid-training.
    """

    def __init__(self, config: EmbedderConfig, session: Optional[requests.Session] = None):
        self.endpoint_url = config.endpoint_url
        self.model_name = config.model_name
        self.max_retries = config.max_retries
        self.backend_id = f"remote:{config.model_name}"
        self._session = session or requests.Session()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        for var in _API_KEY_ENV_VARS:
            key = os.environ.get(var)
            if key:
                headers["Authorization"] = f"Bearer {key}"
                break
        return headers

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        payload = {"model": self.model_name, "input": list(texts)}
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(_RETRY_BASE_DELAY * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    self.endpoint_url, json=payload, headers=self._headers(), timeout=60
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = BackendUnavailableError(
                    f"embedding endpoint returned {resp.status_code}"
                )
                continue
            if resp.status_code != 200:
                raise BackendUnavailableError(
                    f"embedding endpoint rejected request: "
                    f"{resp.status_code} {resp.text[:200]}"
                )
            return self._parse(resp.json(), len(texts))
        raise BackendUnavailableError(
            f"embedding backend unavailable after {self.max_retries + 1} attempts: "
            f"{last_error}"
        )

    @staticmethod
    def _parse(body: dict, expected: int) -> list[list[float]]:
        data = body.get("data")
        if not isinstance(data, list) or len(data) != expected:
            raise BackendUnavailableError("malformed embeddings response")
        ordered = sorted(data, key=lambda item: item["index"])
        return [[float(x) for x in item["embedding"]] for item in ordered]


class DiskCache:
    """Content-addressed vector store: one JSON file per entry.

    Entries live under ``<root>/<backend-slug>/<digest[:2]>/<digest>.json``.
    Writes go through a temp file and an atomic rename, so concurrent
    readers never see partial entries and independent writers cannot
    corrupt each other.
    """

    def __init__(self, root: Union[str, Path], backend_id: str):
        slug = re.sub(r"[^A-Za-z0-9._-]+", "_", backend_id)
        self.root = Path(root) / slug
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def digest(text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def _path(self, digest: str) -> Path:
        return self.root / digest[:2] / f"{digest}.json"

    def get(self, digest: str) -> Optional[list[float]]:
        path = self._path(digest)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return json.load(fh)["values"]
        except (OSError, json.JSONDecodeError, KeyError):
            return None

    def put(self, digest: str, values: Sequence[float]) -> None:
        path = self._path(digest)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp.{os.getpid()}.{threading.get_ident()}")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"dim": len(values), "values": list(values)}, fh)
        os.replace(tmp, path)

    def count(self) -> int:
        return sum(1 for _ in self.root.rglob("*.json"))


class Embedder:
    """Caching front over an embedding backend.

    Safe for concurrent calls: the in-memory cache is lock-guarded and the
    disk cache uses atomic writes. Identical segments within one call are
    deduplicated before reaching the backend.
    """

    def __init__(self, config: EmbedderConfig):
        self.config = config
        if config.backend == "local":
            self.backend = LocalDeterministicBackend()
        else:
            self.backend = RemoteBackend(config)
        self.backend_id = self.backend.backend_id
        self.disk_cache = (
            DiskCache(config.cache_dir, self.backend_id) if config.cache_dir else None
        )
        self._memory: dict[str, tuple[float, ...]] = {}
        self._lock = threading.Lock()
        self._dim: Optional[int] = None
        self.backend_requests = 0
        self.cache_hits = 0
        self.cache_misses = 0
        self.backend_healthy = True

    def embed_batch(self, segments: Sequence[str]) -> list[EmbeddingVector]:
        """Embed segments in order, serving cache hits without backend calls.

        Raises :class:`EmptySegmentError` for an empty input list or any
        segment that is empty after trimming, and propagates backend
        failures after retries are exhausted.
        """
        if not segments:
            raise EmptySegmentError("embed_batch requires at least one segment")
        for seg in segments:
            if not seg.strip():
                raise EmptySegmentError("cannot embed an empty segment")

        digests = [DiskCache.digest(seg) for seg in segments]
        resolved: dict[str, tuple[float, ...]] = {}
        missing: list[tuple[str, str]] = []
        seen: set[str] = set()
        for seg, digest in zip(segments, digests):
            if digest in seen or digest in resolved:
                continue
            values = self._cache_get(digest)
            if values is not None:
                resolved[digest] = values
                self.cache_hits += 1
            else:
                missing.append((seg, digest))
                seen.add(digest)
                self.cache_misses += 1

        for chunk_start in range(0, len(missing), self.config.batch_size):
            chunk = missing[chunk_start : chunk_start + self.config.batch_size]
            texts = [seg for seg, _ in chunk]
            try:
                vectors = self.backend.embed(texts)
                self.backend_requests += 1
            except BackendUnavailableError:
                self.backend_healthy = False
                raise
            self.backend_healthy = True
            for (seg, digest), values in zip(chunk, vectors):
                self._check_dim(len(values))
                frozen = tuple(float(x) for x in values)
                resolved[digest] = frozen
                self._cache_put(digest, frozen)

        out = []
        for digest in digests:
            values = resolved[digest]
            self._check_dim(len(values))
            out.append(
                EmbeddingVector(values=values, dim=len(values), backend_id=self.backend_id)
            )
        return out

    def _check_dim(self, dim: int) -> None:
        if self._dim is None:
            self._dim = dim
        elif dim != self._dim:
            raise DimensionMismatchError(
                f"backend returned dim {dim}, expected {self._dim}"
            )

    def _cache_get(self, digest: str) -> Optional[tuple[float, ...]]:
        with self._lock:
            values = self._memory.get(digest)
        if values is not None:
            return values
        if self.disk_cache is not None:
            from_disk = self.disk_cache.get(digest)
            if from_disk is not None:
                frozen = tuple(float(x) for x in from_disk)
                with self._lock:
                    self._memory[digest] = frozen
                return frozen
        return None

    def _cache_put(self, digest: str, values: tuple[float, ...]) -> None:
        with self._lock:
            self._memory[digest] = values
        if self.disk_cache is not None:
            self.disk_cache.put(digest, values)

    def cache_entries(self) -> int:
        if self.disk_cache is not None:
            return self.disk_cache.count()
        return len(self._memory)


def as_embedder(embedder: Union[Embedder, EmbedderConfig]) -> Embedder:
    """Coerce a config into an :class:`Embedder`; pass instances through.

    Anything already exposing ``embed_batch`` (including test doubles) is
    accepted as-is.
    """
    if isinstance(embedder, EmbedderConfig):
        return Embedder(embedder)
    return embedder


def embed_batch(
    segments: Sequence[str], config: Union[Embedder, EmbedderConfig]
) -> list[EmbeddingVector]:
    """One-shot embedding of segments under the given config or embedder."""
    return as_embedder(config).embed_batch(segments)


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Raw cosine of two vectors, clamped to [-1, 1] against float drift.

    Raises :class:`DimensionMismatchError` when dimensions differ and
    :class:`ZeroVectorError` when either vector has zero norm.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dim {a.dim} vs {b.dim}")
    va = np.asarray(a.values, dtype=np.float64)
    vb = np.asarray(b.values, dtype=np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity of a zero vector is undefined")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))
