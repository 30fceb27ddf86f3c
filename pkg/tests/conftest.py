from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))

FIXTURES = TESTS_DIR / "fixtures"
TOY = FIXTURES / "toy"
CORPUS = FIXTURES / "corpus"


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return TOY


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def valid_corpus() -> list[str]:
    lines = (CORPUS / "valid.sva").read_text().splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.strip().startswith("//")]


@pytest.fixture(scope="session")
def invalid_corpus() -> list[dict]:
    return json.loads((CORPUS / "invalid.json").read_text())


@pytest.fixture(scope="session")
def semantics_corpus() -> list[str]:
    lines = (CORPUS / "semantics_corpus.sva").read_text().splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.strip().startswith("//")]


@pytest.fixture()
def store(tmp_path):
    from assertflow.store import ArtifactStore

    return ArtifactStore(tmp_path / "store")


@pytest.fixture(scope="session")
def toy_spec():
    from assertflow import artifacts as art

    spec = art.deserialize_artifact((TOY / "design_spec.json").read_text())
    return art.assign_id(spec)


@pytest.fixture(scope="session")
def toy_suite():
    from assertflow.equiv import TraceSuite

    return TraceSuite.from_doc(json.loads((TOY / "trace_suite.json").read_text()))


@pytest.fixture()
def toy_pipeline_config():
    from assertflow.config import load_pipeline_config

    return load_pipeline_config(TOY / "pipeline_config.json")


@pytest.fixture()
def toy_runtime():
    from assertflow.agents import AgentRuntime

    return AgentRuntime(base_dir=TOY)
