"""In-memory cosine-similarity index over normalized vectors.

Supports an exact full-scan mode and an optional clustered approximate mode
(spherical k-means with a fixed seed, probing the nearest ``nprobe``
clusters). Indexes persist to a little-endian binary file:

    magic "SYNX" | version u16 = 1 | dims u32 | count u64
    count x dims float32 row-major
    id table: count entries of (u16 length, UTF-8 bytes)
"""

from __future__ import annotations

import heapq
import os
import struct
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingVector
from .errors import DataValidationError, MissingArtifactError

MAGIC = b"SYNX"
FORMAT_VERSION = 1

KMEANS_SEED = 0
KMEANS_MAX_ITER = 25


@dataclass(frozen=True)
class RetrievalHit:
    posting_id: str
    similarity: float
    rank: int


class VectorIndex:
    """Immutable after construction; concurrent searches need no locking."""

    def __init__(self, ids: list[str], matrix: np.ndarray, mode: str = "exact",
                 num_clusters: int = 0, nprobe: int = 1):
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise DataValidationError("matrix shape does not match id count")
        if len(set(ids)) != len(ids):
            raise DataValidationError("duplicate id")
        self.ids = list(ids)
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        self._matrix64 = self.matrix.astype(np.float64)
        self.mode = mode
        self.num_clusters = num_clusters
        self.nprobe = nprobe
        self._centroids: np.ndarray | None = None
        self._members: list[np.ndarray] | None = None
        if mode == "clustered":
            if not (1 <= num_clusters <= len(ids)):
                raise DataValidationError("num_clusters must be in 1..count")
            if nprobe < 1:
                raise DataValidationError("nprobe must be >= 1")
            self._cluster()
        elif mode != "exact":
            raise DataValidationError(f"unknown index mode: {mode}")

    @property
    def dims(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def _cluster(self) -> None:
        rng = np.random.default_rng(KMEANS_SEED)
        rows = self._matrix64
        centroids = rows[rng.choice(len(rows), size=self.num_clusters, replace=False)].copy()
        assign = np.full(len(rows), -1, dtype=np.int64)
        for _ in range(KMEANS_MAX_ITER):
            new_assign = np.argmax(rows @ centroids.T, axis=1)
            if np.array_equal(new_assign, assign):
                break
            assign = new_assign
            for c in range(self.num_clusters):
                members = rows[assign == c]
                if len(members) == 0:
                    continue  # empty cluster keeps its previous centroid
                mean = members.mean(axis=0)
                norm = np.linalg.norm(mean)
                if norm > 0:
                    centroids[c] = mean / norm
        self._centroids = centroids
        self._members = [np.flatnonzero(assign == c) for c in range(self.num_clusters)]

    def _candidate_rows(self, query: np.ndarray) -> np.ndarray:
        if self.mode == "exact":
            return np.arange(len(self.ids))
        sims = self._centroids @ query
        probe = min(self.nprobe, self.num_clusters)
        order = sorted(range(self.num_clusters), key=lambda c: (-sims[c], c))[:probe]
        rows = np.concatenate([self._members[c] for c in order]) if order else np.array([], int)
        return rows

    def search(self, query: EmbeddingVector, k: int) -> list[RetrievalHit]:
        """True top-k by cosine (exact mode); ties broken by ascending id."""
        if k < 1:
            raise DataValidationError("k must be >= 1")
        if query.dims != self.dims:
            raise DataValidationError(f"query dims {query.dims} != index dims {self.dims}")
        q = np.asarray(query.values, dtype=np.float64)
        rows = self._candidate_rows(q)
        sims = self._matrix64[rows] @ q
        best = heapq.nsmallest(
            min(k, len(rows)),
            ((-float(sims[i]), self.ids[row]) for i, row in enumerate(rows)),
        )
        return [
            RetrievalHit(posting_id=pid, similarity=-neg, rank=i + 1)
            for i, (neg, pid) in enumerate(best)
        ]

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<H", FORMAT_VERSION))
            fh.write(struct.pack("<I", self.dims))
            fh.write(struct.pack("<Q", len(self.ids)))
            fh.write(self.matrix.astype("<f4").tobytes(order="C"))
            for pid in self.ids:
                raw = pid.encode("utf-8")
                if len(raw) > 0xFFFF:
                    raise DataValidationError(f"id too long to persist: {pid[:32]}...")
                fh.write(struct.pack("<H", len(raw)))
                fh.write(raw)


def build(vectors: list[tuple[str, EmbeddingVector]], mode: str = "exact",
          num_clusters: int = 8, nprobe: int = 1) -> VectorIndex:
    if not vectors:
        raise DataValidationError("cannot build an empty index")
    dims = vectors[0][1].dims
    ids = []
    rows = np.empty((len(vectors), dims), dtype=np.float32)
    for i, (pid, vec) in enumerate(vectors):
        if vec.dims != dims:
            raise DataValidationError(f"dim mismatch: {vec.dims} != {dims} for id {pid}")
        ids.append(pid)
        rows[i] = vec.values
    if mode == "clustered":
        return VectorIndex(ids, rows, mode="clustered",
                           num_clusters=num_clusters, nprobe=nprobe)
    return VectorIndex(ids, rows, mode="exact")


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise DataValidationError(f"truncated index file: {what}")
    return data


def load(path: str, mode: str = "exact", num_clusters: int = 8,
         nprobe: int = 1) -> VectorIndex:
    """Load a persisted index; clustering re-runs deterministically if asked."""
    if not os.path.exists(path):
        raise MissingArtifactError(f"index file not found: {path}")
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise DataValidationError(f"bad magic in {path}")
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != FORMAT_VERSION:
            raise DataValidationError(
                f"version mismatch: file has {version}, reader supports {FORMAT_VERSION}"
            )
        (dims,) = struct.unpack("<I", _read_exact(fh, 4, "dims"))
        (count,) = struct.unpack("<Q", _read_exact(fh, 8, "count"))
        payload = _read_exact(fh, count * dims * 4, "vector payload")
        matrix = np.frombuffer(payload, dtype="<f4").reshape(count, dims)
        ids = []
        for _ in range(count):
            (length,) = struct.unpack("<H", _read_exact(fh, 2, "id length"))
            ids.append(_read_exact(fh, length, "id bytes").decode("utf-8"))
    if mode == "clustered":
        return VectorIndex(ids, matrix, mode="clustered",
                           num_clusters=num_clusters, nprobe=nprobe)
    return VectorIndex(ids, matrix, mode="exact")
