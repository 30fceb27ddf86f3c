"""JSON configuration files for agents, stages, and the bridge tasks."""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

from assertflow.agents import (
    AgentSpec,
    RemoteBackend,
    RetrievalConfig,
    ScriptedMockBackend,
    StochasticMockBackend,
)
from assertflow.errors import AssertflowError
from assertflow.pipeline import STAGES, PipelineConfig, StageConfig, stage_template


def backend_from_doc(doc: dict, base_dir: Path | None = None):
    kind = doc.get("type")
    if kind == "remote":
        return RemoteBackend(base_url=doc["base_url"], model_name=doc["model_name"],
                             credential_ref=doc.get("credential_ref"))
    if kind == "scripted_mock":
        ref = doc.get("scenario_ref")
        if ref and base_dir is not None and not Path(ref).is_absolute():
            ref = str((base_dir / ref).resolve())
        return ScriptedMockBackend(scenario_ref=ref, scenarios=doc.get("scenarios"))
    if kind == "stochastic_mock":
        ref = doc.get("error_model_ref")
        if ref and base_dir is not None and not Path(ref).is_absolute():
            ref = str((base_dir / ref).resolve())
        return StochasticMockBackend(error_model_ref=ref)
    raise AssertflowError(f"unknown backend type {kind!r}")


def agent_spec_from_doc(name: str, doc: dict, base_dir: Path | None = None) -> AgentSpec:
    retrieval = None
    if doc.get("retrieval"):
        retrieval = RetrievalConfig(store_ref=doc["retrieval"]["store_ref"],
                                    top_k=doc["retrieval"]["top_k"])
    return AgentSpec(
        name=name,
        role_prompt=doc.get("role_prompt", ""),
        backend=backend_from_doc(doc["backend"], base_dir),
        temperature=doc.get("temperature", 0.2),
        max_retries=doc.get("max_retries", 2),
        retrieval=retrieval,
    )


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    """Build a PipelineConfig from a JSON file.

    Each stage gets its agent with the packaged stage template as the
    role prompt unless the agent declares its own.
    """
    path = Path(path)
    doc = json.loads(path.read_text())
    base_dir = path.parent
    agents = {name: agent_spec_from_doc(name, spec, base_dir)
              for name, spec in doc.get("agents", {}).items()}
    stages: dict[str, StageConfig] = {}
    for stage in STAGES:
        stage_doc = doc.get("stages", {}).get(stage)
        if stage_doc is None:
            raise AssertflowError(f"config is missing stage {stage!r}")
        agent_name = stage_doc["agent"]
        if agent_name not in agents:
            raise AssertflowError(f"stage {stage!r} names unknown agent {agent_name!r}")
        stages[stage] = StageConfig(
            stage=stage, agent=agent_name,
            max_repair_attempts=stage_doc.get("max_repair_attempts", 2),
            fanout_limit=stage_doc.get("fanout_limit"))
    # per-stage effective agents: default role prompt is the stage template
    effective = dict(agents)
    for stage, stage_config in stages.items():
        agent = agents[stage_config.agent]
        if not agent.role_prompt:
            key = f"{stage_config.agent}@{stage}"
            effective[key] = replace(agent, role_prompt=stage_template(stage))
            stages[stage] = replace(stage_config, agent=key)
    return PipelineConfig(agents=effective, stages=stages)


def load_bridge_agents(path: str | Path) -> dict[str, AgentSpec]:
    """Agents for synthesis tasks, keyed by role (generator, reverse, bridge)."""
    path = Path(path)
    doc = json.loads(path.read_text())
    return {name: agent_spec_from_doc(name, spec, path.parent)
            for name, spec in doc.get("bridge_agents", {}).items()}
