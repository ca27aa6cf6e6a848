"""Two-phase job recommendation engine.

Phase I retrieves candidate postings with a fast vector search over fused
posting documents; Phase II reranks the survivors with richer embeddings,
token-level soft alignment and LLM pairwise comparisons, then fuses the
signals into one ranking. On top of the pipeline sit grounded explanation
generation, an evolutionary resume optimizer and nDCG evaluation tooling.
"""

from .config import PipelineConfig, config_from_dict, load_config
from .corpus import FusedDocument, IngestReport, JobPosting, Resume, fuse
from .embedding import HashingEmbedder, RemoteEmbedder, cosine
from .ensemble import EnsembleConfig, fuse_rankings
from .errors import (
    DataValidationError,
    EvolutionError,
    GroundingError,
    MissingArtifactError,
    ProviderError,
    RetriesExhaustedError,
    SynapseError,
)
from .evolve import EvolutionConfig, FitnessTrace, FitnessWeights, run_evolution
from .llm_gateway import MockLlm, RemoteLlm, create_gateway
from .pipeline import Pipeline
from .vector_index import VectorIndex, build, load

__version__ = "0.1.0"

__all__ = [
    "DataValidationError",
    "EnsembleConfig",
    "EvolutionConfig",
    "EvolutionError",
    "FitnessTrace",
    "FitnessWeights",
    "FusedDocument",
    "GroundingError",
    "HashingEmbedder",
    "IngestReport",
    "JobPosting",
    "MissingArtifactError",
    "MockLlm",
    "Pipeline",
    "PipelineConfig",
    "ProviderError",
    "RemoteEmbedder",
    "RemoteLlm",
    "Resume",
    "RetriesExhaustedError",
    "SynapseError",
    "VectorIndex",
    "build",
    "config_from_dict",
    "cosine",
    "create_gateway",
    "fuse",
    "fuse_rankings",
    "load",
    "load_config",
    "run_evolution",
    "__version__",
]
