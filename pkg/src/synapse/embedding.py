"""Document and token embeddings behind a provider abstraction.

Two providers share one interface: a deterministic local hashing embedder
(the offline/test default) and a remote HTTP embedding service. The hashing
embedder lowercases, splits on non-alphanumeric characters, maps each token
to a signed bucket via a stable 64-bit hash and L2-normalizes the signed
counts, so the same text always yields the same unit vector on any platform.
"""

from __future__ import annotations

import hashlib
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import requests

from ._http import post_json
from .errors import DataValidationError, ProviderError

_TOKEN_RE = re.compile(r"[0-9a-z]+")

EMBED_BASE_URL_ENV = "SYNAPSE_EMBED_BASE_URL"
EMBED_API_KEY_ENV = "SYNAPSE_EMBED_API_KEY"


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def stable_hash64(token: str) -> int:
    """Fixed 64-bit hash, identical across processes and platforms."""
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class EmbeddingVector:
    """Dense document vector; ``normalized`` vectors have unit L2 norm."""

    dims: int
    values: np.ndarray
    normalized: bool

    def __post_init__(self):
        if self.values.shape != (self.dims,):
            raise DataValidationError(
                f"vector length {self.values.shape} does not match dims {self.dims}"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataValidationError("vector contains non-finite values")
        if self.normalized:
            norm = float(np.linalg.norm(self.values))
            if not (1.0 - 1e-6 <= norm <= 1.0 + 1e-6):
                raise DataValidationError(f"normalized vector has norm {norm}")


@dataclass(frozen=True)
class TokenEmbeddings:
    """Per-token unit-norm rows; tokens yielding zero vectors are dropped."""

    tokens: list[str]
    matrix: np.ndarray  # shape (len(tokens), dims)

    def __post_init__(self):
        if self.matrix.shape[0] != len(self.tokens):
            raise DataValidationError("row count does not match token count")
        if len(self.tokens) and not np.all(np.isfinite(self.matrix)):
            raise DataValidationError("token matrix contains non-finite values")

    @property
    def dims(self) -> int:
        return self.matrix.shape[1]


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity in [-1, 1]; exactly the dot product for unit vectors."""
    if a.dims != b.dims:
        raise DataValidationError(f"dims mismatch: {a.dims} vs {b.dims}")
    if a.normalized and b.normalized:
        return float(np.dot(a.values, b.values))
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 or nb == 0.0:
        raise DataValidationError("cosine undefined for zero vector")
    return float(np.dot(a.values, b.values) / (na * nb))


class HashingEmbedder:
    """Deterministic signed feature-hashing embedder.

    bucket = hash(token) mod dims, sign from bit 63 of the hash; signed
    counts are accumulated and L2-normalized. A single non-empty token can
    never hash to the zero vector (exactly one bucket is non-zero).
    """

    name = "hash"

    def __init__(self, dims: int = 256):
        if dims < 1:
            raise DataValidationError("dims must be positive")
        self.dims = dims

    def _accumulate(self, tokens: Sequence[str]) -> np.ndarray:
        vec = np.zeros(self.dims, dtype=np.float64)
        for token in tokens:
            h = stable_hash64(token)
            sign = 1.0 - 2.0 * ((h >> 63) & 1)
            vec[h % self.dims] += sign
        return vec

    def embed_document(self, text: str) -> EmbeddingVector:
        tokens = tokenize(text)
        if not tokens:
            raise DataValidationError("unembeddable document")
        vec = self._accumulate(tokens)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            # Opposite-sign collisions can cancel a multi-token text exactly.
            raise DataValidationError("unembeddable document")
        return EmbeddingVector(dims=self.dims, values=vec / norm, normalized=True)

    def embed_documents(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [self.embed_document(t) for t in texts]

    def embed_tokens(self, text: str) -> TokenEmbeddings:
        tokens = tokenize(text)
        if not tokens:
            raise DataValidationError("unembeddable document")
        rows = []
        for token in tokens:
            vec = self._accumulate([token])
            rows.append(vec / np.linalg.norm(vec))
        return TokenEmbeddings(tokens=tokens, matrix=np.vstack(rows))


class RemoteEmbedder:
    """HTTP embedding service client.

    POSTs ``{"model": ..., "input": [texts]}`` to ``{base_url}/embeddings``
    and reads vectors from ``{"data": [{"index": i, "embedding": [...]}]}``.
    Dimensionality comes from the first response and must stay consistent.
    At most ``max_in_flight`` requests run concurrently.
    """

    name = "remote"

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        model: str = "default",
        max_in_flight: int = 8,
        batch_size: int = 16,
        timeout: float = 30.0,
        retries: int = 2,
        session: requests.Session | None = None,
    ):
        self.base_url = (base_url or os.environ.get(EMBED_BASE_URL_ENV, "")).rstrip("/")
        if not self.base_url:
            raise ProviderError(f"remote embedder needs a base URL ({EMBED_BASE_URL_ENV})")
        self.api_key = api_key if api_key is not None else os.environ.get(EMBED_API_KEY_ENV, "")
        self.model = model
        self.max_in_flight = max_in_flight
        self.batch_size = batch_size
        self.timeout = timeout
        self.retries = retries
        self.session = session or requests.Session()
        self.dims: int | None = None

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        body = post_json(
            self.session,
            f"{self.base_url}/embeddings",
            {"model": self.model, "input": list(texts)},
            self._headers(),
            timeout=self.timeout,
            retries=self.retries,
        )
        try:
            items = sorted(body["data"], key=lambda item: item["index"])
            vectors = [np.asarray(item["embedding"], dtype=np.float64) for item in items]
        except (KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProviderError(
                f"embedding response covers {len(vectors)} of {len(texts)} inputs"
            )
        return vectors

    def _check_dims(self, vec: np.ndarray) -> None:
        if self.dims is None:
            self.dims = int(vec.shape[0])
        elif vec.shape[0] != self.dims:
            raise ProviderError(
                f"inconsistent embedding dims: got {vec.shape[0]}, expected {self.dims}"
            )

    def embed_documents(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        for text in texts:
            if not tokenize(text):
                raise DataValidationError("unembeddable document")
        batches = [texts[i:i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        results: list[list[np.ndarray]] = [[] for _ in batches]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            for i, vectors in enumerate(pool.map(self._embed_batch, batches)):
                results[i] = vectors
        out = []
        for vec in (v for batch in results for v in batch):
            self._check_dims(vec)
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ProviderError("remote service returned a zero vector for a document")
            out.append(EmbeddingVector(dims=self.dims, values=vec / norm, normalized=True))
        return out

    def embed_document(self, text: str) -> EmbeddingVector:
        return self.embed_documents([text])[0]

    def embed_tokens(self, text: str) -> TokenEmbeddings:
        tokens = tokenize(text)
        if not tokens:
            raise DataValidationError("unembeddable document")
        batches = [tokens[i:i + self.batch_size] for i in range(0, len(tokens), self.batch_size)]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            vectors = [v for batch in pool.map(self._embed_batch, batches) for v in batch]
        kept_tokens, rows = [], []
        for token, vec in zip(tokens, vectors):
            self._check_dims(vec)
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                continue  # token dropped together with its row
            kept_tokens.append(token)
            rows.append(vec / norm)
        if not rows:
            raise DataValidationError("unembeddable document")
        return TokenEmbeddings(tokens=kept_tokens, matrix=np.vstack(rows))
