"""Fusion of per-method rankings into a final ranking.

Seven aggregation schemes are supported; the retrieval-phase similarity list
is used for tie-breaking by default and may be fused as a fourth list via
``include_phase1``. Ascending-better schemes (weighted rank average,
harmonic mean of ranks) negate their fused score so every output RankList
keeps the raw-score-descending convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataValidationError
from .rerank import RankEntry, RankList

SCHEMES = ("wavg_rank", "harm_mean", "wavg_minmax", "wavg_zscore",
           "wavg_softmax", "borda", "rrf")
WEIGHTED_SCHEMES = ("wavg_rank", "harm_mean", "wavg_minmax", "wavg_zscore",
                    "wavg_softmax")

DEFAULT_WEIGHTS = (0.60, 0.25, 0.15)
DEFAULT_RRF_K = 60


@dataclass(frozen=True)
class EnsembleConfig:
    scheme: str = "wavg_rank"
    weights: tuple[float, ...] | None = DEFAULT_WEIGHTS
    rrf_k: int = DEFAULT_RRF_K
    include_phase1: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DataValidationError(f"unknown ensemble scheme: {self.scheme}")
        if self.rrf_k < 1:
            raise DataValidationError("rrf_k must be >= 1")
        if self.scheme in WEIGHTED_SCHEMES:
            if not self.weights:
                raise DataValidationError(f"scheme {self.scheme} needs weights")
            if any(w < 0 for w in self.weights):
                raise DataValidationError("weights must be non-negative")
            if abs(sum(self.weights) - 1.0) > 1e-9:
                raise DataValidationError(f"weights must sum to 1, got {sum(self.weights)}")


# Table of standard scheme configurations selectable by name.
STANDARD_CONFIGS = {
    "wavg_rank": EnsembleConfig("wavg_rank", (0.60, 0.25, 0.15)),
    "harm_mean": EnsembleConfig("harm_mean", (0.75, 0.15, 0.10)),
    "wavg_minmax": EnsembleConfig("wavg_minmax", (0.90, 0.05, 0.05)),
    "wavg_zscore": EnsembleConfig("wavg_zscore", (0.80, 0.10, 0.10)),
    "wavg_softmax": EnsembleConfig("wavg_softmax", (0.70, 0.15, 0.15)),
    "borda": EnsembleConfig("borda", None),
    "rrf": EnsembleConfig("rrf", None),
}


def _minmax(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.5] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def _zscore(values: list[float]) -> list[float]:
    n = len(values)
    # sigma is zero exactly when all values coincide; testing the computed
    # sigma instead would miss this (the float mean of equal values can be
    # one ulp off, leaving a tiny nonzero sigma)
    if min(values) == max(values):
        return [0.0] * n
    mu = sum(values) / n
    sigma = math.sqrt(sum((v - mu) ** 2 for v in values) / n)
    return [(v - mu) / sigma for v in values]


def _softmax(values: list[float]) -> list[float]:
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def fuse_rankings(lists: list[RankList], phase1: RankList,
                  config: EnsembleConfig) -> RankList:
    """Fuse the given rankings into one; all inputs must cover the same ids."""
    if not lists:
        raise DataValidationError("no rank lists to fuse")
    candidate_ids = set(lists[0].ids())
    fused_lists = list(lists) + ([phase1] if config.include_phase1 else [])
    for rl in fused_lists + [phase1]:
        if set(rl.ids()) != candidate_ids:
            raise DataValidationError("rank lists cover different candidate sets")

    weights = config.weights
    if config.scheme in WEIGHTED_SCHEMES:
        if len(weights) != len(fused_lists):
            raise DataValidationError(
                f"{len(weights)} weights for {len(fused_lists)} lists"
            )
    else:
        weights = (1.0,) * len(fused_lists)

    ids = sorted(candidate_ids)
    n = len(ids)
    ranks = [{e.posting_id: e.rank for e in rl.entries} for rl in fused_lists]
    raws = [{e.posting_id: e.raw_score for e in rl.entries} for rl in fused_lists]

    scores: dict[str, float]
    if config.scheme == "wavg_rank":
        scores = {pid: -sum(w * r[pid] for w, r in zip(weights, ranks)) for pid in ids}
    elif config.scheme == "harm_mean":
        total_w = sum(weights)
        scores = {
            pid: -(total_w / sum(w / r[pid] for w, r in zip(weights, ranks)))
            for pid in ids
        }
    elif config.scheme == "borda":
        scores = {pid: float(sum(n - r[pid] for r in ranks)) for pid in ids}
    elif config.scheme == "rrf":
        scores = {pid: sum(1.0 / (config.rrf_k + r[pid]) for r in ranks) for pid in ids}
    else:
        if config.scheme == "wavg_minmax":
            transform = _minmax
        elif config.scheme == "wavg_zscore":
            transform = _zscore
        else:
            transform = _softmax
        normalized = []
        for raw in raws:
            column = transform([raw[pid] for pid in ids])
            normalized.append(dict(zip(ids, column)))
        scores = {
            pid: sum(w * norm[pid] for w, norm in zip(weights, normalized))
            for pid in ids
        }

    phase1_sim = {e.posting_id: e.raw_score for e in phase1.entries}
    order = sorted(ids, key=lambda pid: (-scores[pid], -phase1_sim[pid], pid))
    entries = tuple(
        RankEntry(posting_id=pid, raw_score=float(scores[pid]), rank=i + 1)
        for i, pid in enumerate(order)
    )
    return RankList(method="ensemble", entries=entries)
