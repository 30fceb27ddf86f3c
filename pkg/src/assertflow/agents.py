"""Backend-agnostic agent execution.

Three backends speak the same invoke() contract:

* remote -- chat-completion-compatible HTTP POST (``messages`` list,
  ``temperature``, optional ``seed``), reading the first choice's message
  content; retried with exponential backoff on transport errors. The
  credential is read from the environment variable the agent names in
  ``credential_ref`` and is never stored in any artifact.
* scripted mock -- deterministic lookup of (agent name, scenario key);
  a scenario value may be a list to script successive attempts.
* stochastic mock -- seeded draws from a two-component hardness mixture:
  a fraction of items is latently hard with an elevated per-check error
  probability, making unanimous-k survival decay slower than the
  exponential an independent-error model would force.

Every response records the verbatim raw text and the digest of the prompt
that produced it, before any parsing happens.
"""

from __future__ import annotations

import fnmatch
import json
import os
import re
import string
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from assertflow.errors import (
    CredentialError,
    GroupInvocationError,
    InvocationError,
    RenderError,
    ScenarioKeyError,
)
from assertflow.ids import digest_hex
from assertflow.sva import ast as A
from assertflow.sva import parser as sva_parser

DEFAULT_TEMPERATURE = 0.2
_BACKOFF_BASE_S = 0.05

_WORD = re.compile(r"[a-z0-9_]+")


# --------------------------------------------------------------------------
# Retrieval

@dataclass(frozen=True)
class Chunk:
    doc_id: str
    chunk_index: int
    text: str
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class RetrievedChunk:
    chunk: Chunk
    score: float


class ContextStore:
    """Lexical retrieval over text chunks, scored by normalized term overlap."""

    def __init__(self, chunks: list[Chunk] | tuple[Chunk, ...]) -> None:
        seen = set()
        for chunk in chunks:
            if not chunk.text.strip():
                raise ValueError("chunk text must be non-empty")
            key = (chunk.doc_id, chunk.chunk_index)
            if key in seen:
                raise ValueError(f"duplicate chunk key {key}")
            seen.add(key)
        self.chunks = tuple(chunks)

    @classmethod
    def from_texts(cls, docs: dict[str, str], chunk_chars: int = 800) -> "ContextStore":
        chunks = []
        for doc_id, text in sorted(docs.items()):
            parts = [text[i:i + chunk_chars] for i in range(0, len(text), chunk_chars)]
            for k, part in enumerate(parts):
                if part.strip():
                    chunks.append(Chunk(doc_id, k, part))
        return cls(chunks)


def retrieve(store: ContextStore, query: str, top_k: int) -> list[RetrievedChunk]:
    """Top-k chunks by term-frequency-weighted overlap with the query.

    Only positive scores are returned; ties break on (doc_id, chunk_index)
    so the result is deterministic.
    """
    if top_k < 0:
        raise ValueError("top_k must be >= 0")
    if top_k == 0:
        return []
    query_terms = set(_WORD.findall(query.lower()))
    scored: list[RetrievedChunk] = []
    for chunk in store.chunks:
        terms = _WORD.findall(chunk.text.lower())
        if not terms:
            continue
        hits = sum(1 for t in terms if t in query_terms)
        score = hits / len(terms)
        if score > 0:
            scored.append(RetrievedChunk(chunk, score))
    scored.sort(key=lambda r: (-r.score, r.chunk.doc_id, r.chunk.chunk_index))
    return scored[:top_k]


# --------------------------------------------------------------------------
# Agent configuration

@dataclass(frozen=True)
class RemoteBackend:
    base_url: str
    model_name: str
    credential_ref: str | None = None  # environment variable name
    kind = "remote"


@dataclass(frozen=True)
class ScriptedMockBackend:
    scenario_ref: str | None = None  # path to a scenario JSON file
    scenarios: dict | None = None  # or inline map
    kind = "scripted_mock"


@dataclass(frozen=True)
class StochasticMockBackend:
    error_model_ref: str | None = None  # path to an error-model JSON file
    model: "StochasticErrorModel | None" = None
    kind = "stochastic_mock"


@dataclass(frozen=True)
class RetrievalConfig:
    store_ref: str
    top_k: int


@dataclass(frozen=True)
class AgentSpec:
    name: str
    role_prompt: str  # template with named {placeholders}
    backend: RemoteBackend | ScriptedMockBackend | StochasticMockBackend
    temperature: float = DEFAULT_TEMPERATURE
    max_retries: int = 2
    retrieval: RetrievalConfig | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass(frozen=True)
class PromptText:
    text: str
    digest: str
    scenario_key: str | None = None
    seed: int | None = None
    meta: tuple[tuple[str, str], ...] = ()  # simulation-only side channel

    def meta_get(self, key: str) -> str | None:
        for k, v in self.meta:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class AgentResponse:
    agent_name: str
    raw_text: str  # verbatim, recorded before any parsing
    prompt_digest: str
    latency: float
    attempt_index: int
    backend_kind: str


def render_prompt(spec: AgentSpec, bindings: dict, retrieved=()) -> PromptText:
    """Substitute template placeholders and attach the retrieval block.

    A ``{context}`` placeholder receives the block in place; otherwise a
    non-empty block is appended. Unbound placeholders raise RenderError.
    """
    block = _context_block(retrieved)
    fields = [f for _, f, _, _ in string.Formatter().parse(spec.role_prompt)
              if f is not None]
    values = dict(bindings)
    if "context" in fields:
        values.setdefault("context", block)
    for name in fields:
        if name not in values:
            raise RenderError(name)
    text = spec.role_prompt.format(**{k: values[k] for k in fields})
    if "context" not in fields and block:
        text = f"{text}\n{block}"
    meta = tuple(sorted((k[5:], str(v)) for k, v in bindings.items()
                        if k.startswith("meta_")))
    return PromptText(
        text=text,
        digest=digest_hex(text),
        scenario_key=bindings.get("scenario_key"),
        meta=meta,
    )


def _context_block(retrieved) -> str:
    if not retrieved:
        return ""
    lines = ["--- retrieved context ---"]
    for item in retrieved:
        chunk = item.chunk if isinstance(item, RetrievedChunk) else item
        lines.append(f"[{chunk.doc_id}#{chunk.chunk_index}] {chunk.text}")
    lines.append("--- end retrieved context ---")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Stochastic error model

@dataclass(frozen=True)
class StochasticErrorModel:
    """Per-item latent hardness mixture driving simulated check errors.

    ``1 - base_correct_prob`` is the marginal per-check error rate; the
    hard fraction concentrates it so that errors correlate across the k
    checks of one item. The easy-item error probability is derived to
    keep the marginal exact.
    """

    base_correct_prob: float
    hard_fraction: float
    hard_error_prob: float
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("base_correct_prob", "hard_fraction", "hard_error_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if not self.base_correct_prob > 0.0:
            raise ValueError("base_correct_prob must be > 0")
        if not 0.0 <= self.easy_error_prob <= 1.0:
            raise ValueError(
                "inconsistent mixture: derived easy-item error probability "
                f"{self.easy_error_prob:.4f} is outside [0, 1]")

    @property
    def marginal_error_prob(self) -> float:
        return 1.0 - self.base_correct_prob

    @property
    def easy_error_prob(self) -> float:
        if self.hard_fraction >= 1.0:
            return 0.0
        return (self.marginal_error_prob - self.hard_fraction * self.hard_error_prob) \
            / (1.0 - self.hard_fraction)

    def item_is_hard(self, item_key: str) -> bool:
        return _unit_hash(self.seed, "hardness", item_key) < self.hard_fraction

    def item_error_prob(self, item_key: str) -> float:
        return self.hard_error_prob if self.item_is_hard(item_key) else self.easy_error_prob

    def check_errs(self, item_key: str, check_index: int) -> bool:
        return _unit_hash(self.seed, "draw", item_key, check_index) \
            < self.item_error_prob(item_key)

    def to_doc(self) -> dict:
        return {"base_correct_prob": self.base_correct_prob,
                "hard_fraction": self.hard_fraction,
                "hard_error_prob": self.hard_error_prob,
                "seed": self.seed}

    @classmethod
    def from_doc(cls, doc: dict) -> "StochasticErrorModel":
        return cls(base_correct_prob=doc["base_correct_prob"],
                   hard_fraction=doc["hard_fraction"],
                   hard_error_prob=doc["hard_error_prob"],
                   seed=doc.get("seed", 0))


def _unit_hash(*parts) -> float:
    """Deterministic hash of the parts mapped to [0, 1)."""
    digest = digest_hex("\x1f".join(str(p) for p in parts))
    return int(digest[:16], 16) / float(1 << 64)


def load_error_model(path: str | Path) -> StochasticErrorModel:
    return StochasticErrorModel.from_doc(json.loads(Path(path).read_text()))


def mutate_assertion(text: str, salt: str) -> str:
    """Deterministic wrong-but-parseable variant of an assertion.

    Used by the stochastic mock to fabricate an erroneous reverse
    generation; the flavor of damage is picked by the salt.
    """
    try:
        parsed = sva_parser.parse_assertion(text)
    except Exception:
        return text + " // garbled"
    choice = int(digest_hex(f"mutate:{salt}:{text}")[:8], 16) % 3

    def rewrite(prop):
        if isinstance(prop, A.Implication):
            if choice == 0:
                return A.Implication(prop.antecedent, not prop.overlap, prop.consequent)
            if choice == 1:
                return A.Implication(prop.antecedent, prop.overlap,
                                     A.NotProp(prop.consequent))
            return A.Implication(
                prop.antecedent, prop.overlap,
                A.SeqProp(A.DelaySeq(A.BoolSeq(A.Literal(1)), 2, 2,
                                     _first_seq(prop.consequent))))
        return A.NotProp(prop)

    mutated = A.SvaAst(parsed.clock_event, rewrite(parsed.property), parsed.label)
    return A.format_assertion(mutated)


def _first_seq(prop) -> A.SeqNode:
    if isinstance(prop, A.SeqProp):
        return prop.seq
    if isinstance(prop, A.Implication):
        return prop.antecedent
    if isinstance(prop, (A.NotProp,)):
        return _first_seq(prop.arg)
    return _first_seq(prop.left)


# --------------------------------------------------------------------------
# Runtime

class AgentRuntime:
    """Holds backend state: scenario caches, invocation counters, HTTP client.

    Invocations are side-effect-free except for the append-only response
    log; the invocation counter is exposed so resumability tests can
    assert that no repeat calls happen.
    """

    def __init__(self, client: httpx.Client | None = None,
                 sleep=time.sleep, max_in_flight: int = 1,
                 base_dir: str | Path | None = None) -> None:
        self._client = client
        self._sleep = sleep
        self.max_in_flight = max_in_flight
        self.base_dir = Path(base_dir) if base_dir else None
        self.invocation_count = 0
        self.response_log: list[AgentResponse] = []
        self._scenario_cache: dict[str, dict] = {}
        self._scenario_counters: dict[tuple[str, str], int] = {}
        self._model_cache: dict[str, StochasticErrorModel] = {}

    # -- backend helpers -----------------------------------------------------

    def _resolve_path(self, ref: str) -> Path:
        path = Path(ref)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path

    def _scenarios(self, backend: ScriptedMockBackend) -> dict:
        if backend.scenarios is not None:
            return backend.scenarios
        if backend.scenario_ref is None:
            raise InvocationError("scripted mock has neither scenarios nor a scenario_ref")
        key = str(self._resolve_path(backend.scenario_ref))
        if key not in self._scenario_cache:
            self._scenario_cache[key] = json.loads(Path(key).read_text())
        return self._scenario_cache[key]

    def _error_model(self, backend: StochasticMockBackend) -> StochasticErrorModel:
        if backend.model is not None:
            return backend.model
        if backend.error_model_ref is None:
            raise InvocationError("stochastic mock has neither a model nor an error_model_ref")
        key = str(self._resolve_path(backend.error_model_ref))
        if key not in self._model_cache:
            self._model_cache[key] = load_error_model(key)
        return self._model_cache[key]

    # -- invocation ------------------------------------------------------------

    def invoke(self, spec: AgentSpec, prompt: PromptText) -> AgentResponse:
        start = time.monotonic()
        backend = spec.backend
        if isinstance(backend, ScriptedMockBackend):
            raw, attempt = self._invoke_scripted(spec, backend, prompt)
        elif isinstance(backend, StochasticMockBackend):
            raw, attempt = self._invoke_stochastic(spec, backend, prompt), 0
        elif isinstance(backend, RemoteBackend):
            raw, attempt = self._invoke_remote(spec, backend, prompt)
        else:
            raise TypeError(f"unknown backend {backend!r}")
        self.invocation_count += 1
        response = AgentResponse(
            agent_name=spec.name, raw_text=raw, prompt_digest=prompt.digest,
            latency=time.monotonic() - start, attempt_index=attempt,
            backend_kind=backend.kind)
        self.response_log.append(response)
        return response

    def _invoke_scripted(self, spec: AgentSpec, backend: ScriptedMockBackend,
                         prompt: PromptText) -> tuple[str, int]:
        scenarios = self._scenarios(backend)
        key = prompt.scenario_key or prompt.digest
        value = scenarios.get(key)
        if value is None and "#" in key:
            value = scenarios.get(key.rsplit("#", 1)[0])  # group index fallback
        if value is None:
            # glob-style entries let fixtures answer content-addressed keys
            patterns = sorted((p for p in scenarios if "*" in p), key=len, reverse=True)
            for pattern in patterns:
                if fnmatch.fnmatchcase(key, pattern) or \
                        ("#" in key and fnmatch.fnmatchcase(key.rsplit("#", 1)[0], pattern)):
                    value = scenarios[pattern]
                    break
        if value is None:
            raise ScenarioKeyError(spec.name, key)
        counter_key = (spec.name, key)
        count = self._scenario_counters.get(counter_key, 0)
        self._scenario_counters[counter_key] = count + 1
        if isinstance(value, list):
            return str(value[min(count, len(value) - 1)]), count
        return str(value), count

    def _invoke_stochastic(self, spec: AgentSpec, backend: StochasticMockBackend,
                           prompt: PromptText) -> str:
        model = self._error_model(backend)
        item_key = prompt.meta_get("item_key") or prompt.scenario_key or prompt.digest
        check_index = prompt.seed or 0
        reference = prompt.meta_get("reference_text")
        if model.check_errs(item_key, check_index):
            if reference:
                return mutate_assertion(reference, f"{item_key}:{check_index}")
            return "WRONG"
        return reference if reference else "OK"

    def _invoke_remote(self, spec: AgentSpec, backend: RemoteBackend,
                       prompt: PromptText) -> tuple[str, int]:
        headers = {}
        if backend.credential_ref:
            token = os.environ.get(backend.credential_ref)
            if not token:
                raise CredentialError(
                    f"credential environment variable {backend.credential_ref!r} is not set")
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": backend.model_name,
            "messages": [{"role": "user", "content": prompt.text}],
            "temperature": spec.temperature,
        }
        if prompt.seed is not None:
            body["seed"] = prompt.seed
        url = backend.base_url.rstrip("/") + "/chat/completions"
        client = self._client or httpx.Client(timeout=60.0)
        last_error: Exception | None = None
        for attempt in range(spec.max_retries + 1):
            try:
                response = client.post(url, json=body, headers=headers)
                if response.status_code >= 500:
                    raise httpx.TransportError(f"server error {response.status_code}")
                response.raise_for_status()
                data = response.json()
                return data["choices"][0]["message"]["content"], attempt
            except (httpx.TransportError, httpx.TimeoutException) as exc:
                last_error = exc
                if attempt < spec.max_retries:
                    self._sleep(_BACKOFF_BASE_S * (2 ** attempt))
            except httpx.HTTPStatusError as exc:
                raise InvocationError(f"chat backend rejected the request: {exc}") from exc
        raise InvocationError(
            f"transport failed after {spec.max_retries + 1} attempts: {last_error}")

    def invoke_group(self, spec: AgentSpec, k: int, prompt_builder) -> list[AgentResponse]:
        """k independent invocations, results ordered by index.

        Mock backends get derived scenario keys (``key#i``) and per-index
        seeds; remote backends get a nonce line plus a distinct seed, the
        practical approximation of independent model instances. Any member
        failure fails the group with the completed responses attached.
        """
        if k < 1:
            raise ValueError("group size must be >= 1")

        def member_prompt(index: int) -> PromptText:
            prompt = prompt_builder(index)
            scenario_key = prompt.scenario_key
            text = prompt.text
            if isinstance(spec.backend, ScriptedMockBackend) and scenario_key and k > 1:
                scenario_key = f"{scenario_key}#{index}"
            if isinstance(spec.backend, RemoteBackend) and k > 1:
                text = f"{text}\n[group member {index}]"
            return PromptText(text=text, digest=digest_hex(text),
                              scenario_key=scenario_key, seed=index, meta=prompt.meta)

        results: dict[int, AgentResponse] = {}
        failure: tuple[int, Exception] | None = None
        if self.max_in_flight > 1 and k > 1:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                futures = {i: pool.submit(self.invoke, spec, member_prompt(i))
                           for i in range(k)}
                for i in range(k):
                    try:
                        results[i] = futures[i].result()
                    except Exception as exc:  # noqa: BLE001 - partials are the contract
                        if failure is None:
                            failure = (i, exc)
        else:
            for i in range(k):
                try:
                    results[i] = self.invoke(spec, member_prompt(i))
                except Exception as exc:  # noqa: BLE001 - remaining members still run
                    if failure is None:
                        failure = (i, exc)

        if failure is not None:
            index, exc = failure
            raise GroupInvocationError(
                f"group member {index} failed: {exc}", partial=results,
                failed_index=index) from exc
        return [results[i] for i in range(k)]
