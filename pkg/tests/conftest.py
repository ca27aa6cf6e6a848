import dataclasses
from pathlib import Path

import pytest

from synapse.config import PipelineConfig
from synapse.pipeline import Pipeline

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

# one line per acceptance criterion, echoed after the run (see test_acceptance)
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def base_config(tmp_path_factory) -> PipelineConfig:
    artifacts = tmp_path_factory.mktemp("artifacts")
    return dataclasses.replace(
        PipelineConfig(),
        corpus_path=str(FIXTURES / "postings.csv"),
        resumes_path=str(FIXTURES / "resumes"),
        judgments_path=str(FIXTURES / "judgments.csv"),
        index_path=str(artifacts / "index.synx"),
    )


@pytest.fixture(scope="session")
def shared_pipeline(base_config) -> Pipeline:
    """One pipeline over the bundled fixtures, index prebuilt; read-only use."""
    pipeline = Pipeline(base_config, seed=0)
    pipeline.build_index()
    return pipeline
