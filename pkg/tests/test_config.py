import json

import pytest

from synapse.config import PipelineConfig, config_from_dict, load_config
from synapse.errors import DataValidationError, MissingArtifactError


def test_defaults_snapshot():
    c = PipelineConfig()
    assert c.retrieval_k == 25
    assert (c.fitness.w_embed, c.fitness.w_softalign, c.fitness.w_llm) == (0.7, 0.15, 0.15)
    assert c.ensemble.scheme == "wavg_rank"
    assert c.ensemble.weights == (0.60, 0.25, 0.15)
    assert c.evolution.population == 8
    assert c.evolution.generations == 5
    assert c.evolution.elitism == 2
    assert c.evolution.mutation_rate == 0.7
    assert c.evolution.tournament_size == 3
    assert (c.dims_phase1, c.dims_phase2) == (256, 512)
    assert c.index_mode == "exact"
    assert (c.embed_provider, c.llm_provider) == ("hash", "mock")
    assert c.evidence_per_source == 3


def test_to_dict_from_dict_round_trip():
    c = PipelineConfig()
    assert config_from_dict(c.to_dict()) == c
    custom = config_from_dict({
        "retrieval_k": 10,
        "index_mode": "clustered",
        "ensemble": {"scheme": "rrf", "weights": None},
        "evolution": {"population": 4, "elitism": 1},
    })
    assert custom.retrieval_k == 10
    assert custom.ensemble.scheme == "rrf"
    assert custom.evolution.population == 4
    assert custom.evolution.generations == 5  # untouched fields keep defaults
    assert config_from_dict(custom.to_dict()) == custom


def test_partial_dict_keeps_defaults():
    c = config_from_dict({"retrieval_k": 7})
    assert c.retrieval_k == 7
    assert c.ensemble == PipelineConfig().ensemble


def test_unknown_keys_rejected():
    with pytest.raises(DataValidationError, match="unknown config keys"):
        config_from_dict({"retreival_k": 7})
    with pytest.raises(DataValidationError, match="invalid config"):
        config_from_dict({"ensemble": {"shceme": "rrf"}})
    with pytest.raises(DataValidationError, match="invalid config"):
        config_from_dict({"evolution": {"populaton": 4}})


def test_validation_rules():
    with pytest.raises(DataValidationError, match="retrieval_k"):
        PipelineConfig(retrieval_k=0)
    with pytest.raises(DataValidationError, match="dims"):
        PipelineConfig(dims_phase1=0)
    with pytest.raises(DataValidationError, match="unknown index mode"):
        PipelineConfig(index_mode="fuzzy")
    with pytest.raises(DataValidationError, match="unknown embed provider"):
        PipelineConfig(embed_provider="gpu")
    with pytest.raises(DataValidationError, match="unknown llm provider"):
        PipelineConfig(llm_provider="real")
    with pytest.raises(DataValidationError, match="evidence_per_source"):
        PipelineConfig(evidence_per_source=0)


def test_load_config_defaults_when_unset():
    assert load_config(None) == PipelineConfig()


def test_load_config_file_overlay(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"retrieval_k": 5, "llm_provider": "remote"}),
                    encoding="utf-8")
    c = load_config(path)
    assert c.retrieval_k == 5
    assert c.llm_provider == "remote"
    assert c.dims_phase1 == 256


def test_load_config_errors(tmp_path):
    with pytest.raises(MissingArtifactError, match="config file not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(DataValidationError, match="config is not valid JSON"):
        load_config(bad)
    array = tmp_path / "array.json"
    array.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(DataValidationError, match="config root must be a JSON object"):
        load_config(array)


def test_config_dict_is_json_serializable():
    payload = json.dumps(PipelineConfig().to_dict(), sort_keys=True)
    assert json.loads(payload)["retrieval_k"] == 25
