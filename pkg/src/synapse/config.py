"""Pipeline configuration: defaults, JSON loading, and snapshots.

Defaults encode the production constants: retrieval K=25, fitness weights
(0.7, 0.15, 0.15), ensemble wavg_rank with weights (0.60, 0.25, 0.15), and
the evolution hyperparameters N=8, T=5, k=2, mutation rate 0.7, tournament
size 3. A JSON config file overrides any subset of fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .ensemble import EnsembleConfig
from .errors import DataValidationError, MissingArtifactError
from .evolve import EvolutionConfig, FitnessWeights

DEFAULT_RETRIEVAL_K = 25


@dataclass(frozen=True)
class PipelineConfig:
    corpus_path: str = "fixtures/postings.csv"
    corpus_format: str = "csv"
    resumes_path: str = "fixtures/resumes"
    resumes_format: str = "json"
    index_path: str = "artifacts/index.synx"
    judgments_path: str = "fixtures/judgments.csv"
    retrieval_k: int = DEFAULT_RETRIEVAL_K
    dims_phase1: int = 256
    dims_phase2: int = 512
    index_mode: str = "exact"
    index_clusters: int = 8
    index_nprobe: int = 1
    embed_provider: str = "hash"
    llm_provider: str = "mock"
    embed_model_phase1: str = "embed-small"
    embed_model_phase2: str = "embed-large"
    llm_model: str = ""
    evidence_per_source: int = 3
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    fitness: FitnessWeights = field(default_factory=FitnessWeights)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)

    def __post_init__(self):
        if self.retrieval_k < 1:
            raise DataValidationError("retrieval_k must be >= 1")
        if self.dims_phase1 < 1 or self.dims_phase2 < 1:
            raise DataValidationError("embedding dims must be positive")
        if self.index_mode not in ("exact", "clustered"):
            raise DataValidationError(f"unknown index mode: {self.index_mode}")
        if self.embed_provider not in ("hash", "remote"):
            raise DataValidationError(f"unknown embed provider: {self.embed_provider}")
        if self.llm_provider not in ("mock", "remote"):
            raise DataValidationError(f"unknown llm provider: {self.llm_provider}")
        if self.evidence_per_source < 1:
            raise DataValidationError("evidence_per_source must be >= 1")

    def to_dict(self) -> dict:
        return {
            "corpus_path": self.corpus_path,
            "corpus_format": self.corpus_format,
            "resumes_path": self.resumes_path,
            "resumes_format": self.resumes_format,
            "index_path": self.index_path,
            "judgments_path": self.judgments_path,
            "retrieval_k": self.retrieval_k,
            "dims_phase1": self.dims_phase1,
            "dims_phase2": self.dims_phase2,
            "index_mode": self.index_mode,
            "index_clusters": self.index_clusters,
            "index_nprobe": self.index_nprobe,
            "embed_provider": self.embed_provider,
            "llm_provider": self.llm_provider,
            "embed_model_phase1": self.embed_model_phase1,
            "embed_model_phase2": self.embed_model_phase2,
            "llm_model": self.llm_model,
            "evidence_per_source": self.evidence_per_source,
            "ensemble": {
                "scheme": self.ensemble.scheme,
                "weights": list(self.ensemble.weights) if self.ensemble.weights else None,
                "rrf_k": self.ensemble.rrf_k,
                "include_phase1": self.ensemble.include_phase1,
            },
            "fitness": {
                "w_embed": self.fitness.w_embed,
                "w_softalign": self.fitness.w_softalign,
                "w_llm": self.fitness.w_llm,
            },
            "evolution": {
                "population": self.evolution.population,
                "generations": self.evolution.generations,
                "elitism": self.evolution.elitism,
                "mutation_rate": self.evolution.mutation_rate,
                "tournament_size": self.evolution.tournament_size,
                "aggressive_prob_start": self.evolution.aggressive_prob_start,
                "aggressive_prob_end": self.evolution.aggressive_prob_end,
                "seed": self.evolution.seed,
            },
        }


def config_from_dict(data: dict) -> PipelineConfig:
    """Build a config from a (possibly partial) plain dict; unknown keys fail."""
    data = dict(data)
    kwargs = {}
    try:
        if "ensemble" in data:
            sub = dict(data.pop("ensemble"))
            if "weights" in sub and sub["weights"] is not None:
                sub["weights"] = tuple(sub["weights"])
            kwargs["ensemble"] = EnsembleConfig(**sub)
        if "fitness" in data:
            kwargs["fitness"] = FitnessWeights(**data.pop("fitness"))
        if "evolution" in data:
            kwargs["evolution"] = EvolutionConfig(**data.pop("evolution"))
        known = {f.name for f in fields(PipelineConfig)}
        unknown = set(data) - known
        if unknown:
            raise DataValidationError(f"unknown config keys: {sorted(unknown)}")
        kwargs.update(data)
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise DataValidationError(f"invalid config: {exc}") from exc


def load_config(path: str | Path | None) -> PipelineConfig:
    """Defaults when path is None; otherwise defaults overlaid with the file."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataValidationError("config root must be a JSON object")
    return config_from_dict(data)
