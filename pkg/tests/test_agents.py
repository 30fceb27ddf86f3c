from __future__ import annotations

import httpx
import pytest

from assertflow.agents import (
    AgentRuntime,
    AgentSpec,
    Chunk,
    ContextStore,
    PromptText,
    RemoteBackend,
    ScriptedMockBackend,
    StochasticErrorModel,
    StochasticMockBackend,
    mutate_assertion,
    render_prompt,
    retrieve,
)
from assertflow.errors import (
    CredentialError,
    GroupInvocationError,
    InvocationError,
    RenderError,
    ScenarioKeyError,
)
from assertflow.sva import check_syntax


def scripted_spec(scenarios: dict, name="agent") -> AgentSpec:
    return AgentSpec(name=name, role_prompt="{task}",
                     backend=ScriptedMockBackend(scenarios=scenarios))


class TestRetrieve:
    def setup_method(self):
        self.store = ContextStore([
            Chunk("doc-a", 0, "the handshake uses req and ack signals"),
            Chunk("doc-b", 0, "unrelated prose about bananas"),
            Chunk("doc-a", 1, "ack rises one cycle after req when not full"),
        ])

    def test_score_dominance(self):
        hits = retrieve(self.store, "handshake ack", top_k=5)
        assert hits[0].chunk.doc_id == "doc-a"
        assert all(h.score > 0 for h in hits)
        assert not any(h.chunk.doc_id == "doc-b" for h in hits)

    def test_top_k_zero(self):
        assert retrieve(self.store, "anything", top_k=0) == []

    def test_ties_break_on_chunk_key(self):
        store = ContextStore([
            Chunk("doc-b", 0, "req ack"),
            Chunk("doc-a", 0, "req ack"),
        ])
        hits = retrieve(store, "req", top_k=2)
        assert [h.chunk.doc_id for h in hits] == ["doc-a", "doc-b"]

    def test_duplicate_chunk_keys_rejected(self):
        with pytest.raises(ValueError):
            ContextStore([Chunk("d", 0, "x"), Chunk("d", 0, "y")])


class TestRenderPrompt:
    def test_substitution(self):
        spec = scripted_spec({}, name="x")
        prompt = render_prompt(spec, {"task": "summarize"})
        assert prompt.text == "summarize"
        assert prompt.digest

    def test_missing_binding_named(self):
        spec = scripted_spec({})
        with pytest.raises(RenderError) as err:
            render_prompt(spec, {"other": "x"})
        assert err.value.placeholder == "task"

    def test_no_context_block_when_empty(self):
        spec = scripted_spec({})
        prompt = render_prompt(spec, {"task": "t"}, retrieved=[])
        assert "retrieved context" not in prompt.text

    def test_context_block_appended(self):
        store = ContextStore([Chunk("d", 0, "req then ack")])
        hits = retrieve(store, "req", top_k=1)
        prompt = render_prompt(scripted_spec({}), {"task": "t"}, retrieved=hits)
        assert "--- retrieved context ---" in prompt.text
        assert "[d#0] req then ack" in prompt.text

    def test_temperature_default(self):
        assert scripted_spec({}).temperature == 0.2


class TestScriptedBackend:
    def test_lookup_by_scenario_key(self):
        runtime = AgentRuntime()
        spec = scripted_spec({"toy/plan": "the plan"})
        response = runtime.invoke(spec, PromptText("p", "d", scenario_key="toy/plan"))
        assert response.raw_text == "the plan"
        assert response.backend_kind == "scripted_mock"

    def test_missing_key_named(self):
        runtime = AgentRuntime()
        spec = scripted_spec({})
        with pytest.raises(ScenarioKeyError) as err:
            runtime.invoke(spec, PromptText("p", "d", scenario_key="toy/missing"))
        assert err.value.key == "toy/missing"

    def test_attempt_indexed_responses(self):
        runtime = AgentRuntime()
        spec = scripted_spec({"k": ["first", "second"]})
        prompt = PromptText("p", "d", scenario_key="k")
        assert runtime.invoke(spec, prompt).raw_text == "first"
        assert runtime.invoke(spec, prompt).raw_text == "second"
        assert runtime.invoke(spec, prompt).raw_text == "second"  # last repeats

    def test_glob_pattern_fallback(self):
        runtime = AgentRuntime()
        spec = scripted_spec({"bridge/reverse/*": "echoed"})
        response = runtime.invoke(
            spec, PromptText("p", "d", scenario_key="bridge/reverse/candidate-123"))
        assert response.raw_text == "echoed"


class TestRemoteBackend:
    def _runtime_with(self, handler) -> AgentRuntime:
        return AgentRuntime(client=httpx.Client(transport=httpx.MockTransport(handler)),
                            sleep=lambda _: None)

    def _spec(self, retries=3) -> AgentSpec:
        return AgentSpec(name="remote", role_prompt="{q}",
                         backend=RemoteBackend("http://llm.test/v1", "model-x"),
                         max_retries=retries)

    def test_retry_then_success(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] <= 2:
                return httpx.Response(500)
            return httpx.Response(200, json={
                "choices": [{"message": {"content": "answer"}}]})

        runtime = self._runtime_with(handler)
        response = runtime.invoke(self._spec(), PromptText("q", "d"))
        assert response.raw_text == "answer"
        assert response.attempt_index == 2

    def test_exhausted_retries(self):
        runtime = self._runtime_with(lambda request: httpx.Response(500))
        with pytest.raises(InvocationError):
            runtime.invoke(self._spec(retries=1), PromptText("q", "d"))

    def test_wire_format(self):
        seen = {}

        def handler(request):
            seen["url"] = str(request.url)
            import json

            seen["body"] = json.loads(request.content)
            return httpx.Response(200, json={
                "choices": [{"message": {"content": "ok"}}]})

        runtime = self._runtime_with(handler)
        runtime.invoke(self._spec(), PromptText("the prompt", "d", seed=9))
        assert seen["url"] == "http://llm.test/v1/chat/completions"
        assert seen["body"]["messages"] == [{"role": "user", "content": "the prompt"}]
        assert seen["body"]["temperature"] == 0.2
        assert seen["body"]["seed"] == 9

    def test_missing_credential(self, monkeypatch):
        monkeypatch.delenv("LLM_TOKEN", raising=False)
        spec = AgentSpec(name="remote", role_prompt="{q}",
                         backend=RemoteBackend("http://llm.test/v1", "m",
                                               credential_ref="LLM_TOKEN"))
        runtime = self._runtime_with(lambda request: httpx.Response(200))
        with pytest.raises(CredentialError):
            runtime.invoke(spec, PromptText("q", "d"))


class TestStochasticBackend:
    def test_deterministic_under_seed(self):
        model = StochasticErrorModel(base_correct_prob=0.7, hard_fraction=0.2,
                                     hard_error_prob=0.9, seed=5)
        spec = AgentSpec(name="s", role_prompt="{q}",
                         backend=StochasticMockBackend(model=model))

        def run():
            runtime = AgentRuntime()
            out = []
            for i in range(20):
                prompt = PromptText("q", "d", scenario_key=f"item-{i}", seed=0,
                                    meta=(("item_key", f"item-{i}"),
                                          ("reference_text", "OKAY")))
                out.append(runtime.invoke(spec, prompt).raw_text)
            return out

        assert run() == run()

    def test_mixture_consistency_validated(self):
        with pytest.raises(ValueError):
            StochasticErrorModel(base_correct_prob=0.99, hard_fraction=0.5,
                                 hard_error_prob=0.9)

    def test_mutation_is_parseable_but_different(self):
        text = "assert property (@(posedge clk) req |-> ##1 ack);"
        mutated = mutate_assertion(text, "salt")
        assert mutated != text
        assert check_syntax(mutated).ok


class TestGroups:
    def test_degenerate_group(self):
        runtime = AgentRuntime()
        spec = scripted_spec({"k": "only"})
        out = runtime.invoke_group(spec, 1, lambda i: PromptText("p", "d", scenario_key="k"))
        assert [r.raw_text for r in out] == ["only"]

    def test_member_keys_derived_per_index(self):
        runtime = AgentRuntime()
        spec = scripted_spec({"k#0": "zero", "k#1": "one", "k": "base"})
        out = runtime.invoke_group(spec, 3, lambda i: PromptText("p", "d", scenario_key="k"))
        assert [r.raw_text for r in out] == ["zero", "one", "base"]

    def test_member_failure_carries_partials(self):
        runtime = AgentRuntime()
        spec = scripted_spec({"k#0": "zero", "k#2": "two"})
        with pytest.raises(GroupInvocationError) as err:
            runtime.invoke_group(spec, 3, lambda i: PromptText("p", "d", scenario_key="k"))
        assert err.value.failed_index == 1
        assert {i: r.raw_text for i, r in err.value.partial.items()} == \
            {0: "zero", 2: "two"}

    def test_concurrent_results_ordered_by_index(self):
        runtime = AgentRuntime(max_in_flight=4)
        spec = scripted_spec({f"k#{i}": f"r{i}" for i in range(6)})
        out = runtime.invoke_group(spec, 6, lambda i: PromptText("p", "d", scenario_key="k"))
        assert [r.raw_text for r in out] == [f"r{i}" for i in range(6)]

    def test_raw_response_provenance(self):
        runtime = AgentRuntime()
        spec = scripted_spec({"k": "text"})
        prompt = PromptText("p", "digest-1", scenario_key="k")
        response = runtime.invoke(spec, prompt)
        assert response.prompt_digest == "digest-1"
        assert runtime.response_log[-1] is response
