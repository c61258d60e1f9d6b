"""Chat-completion and embedding backends.

Two implementations share one interface: an HTTP client for
chat-completions-style endpoints, and a scripted backend that replays a
rule table for fully offline, deterministic runs. Every chat call returns
the elapsed wall-clock time alongside the response; the scripted backend
reports 0.0 so that pipelines built on it are byte-identical across runs.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import requests


class BackendError(Exception):
    """Base class for backend failures."""


class TransportError(BackendError):
    """Network-level failure that persisted through all retries."""


class StatusError(BackendError):
    """Endpoint answered with a non-success HTTP status."""


class MalformedResponseError(BackendError):
    """Endpoint answered 200 but the body could not be interpreted."""


class UnmatchedPromptError(BackendError):
    """A scripted backend received a prompt no rule matches."""


@dataclass(frozen=True)
class DecodingParams:
    """Deterministic decoding defaults: greedy, full nucleus."""

    temperature: float = 0.0
    top_p: float = 1.0
    max_tokens: int | None = None


@dataclass(frozen=True)
class ChatExchange:
    """One prompt/response pair with its wall-clock latency."""

    model_id: str
    prompt: str
    response: str
    elapsed_s: float


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.values)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; 0.0 for degenerate zero-norm inputs."""
    dot = sum(x * y for x, y in zip(a.values, b.values))
    na = math.sqrt(sum(x * x for x in a.values))
    nb = math.sqrt(sum(y * y for y in b.values))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def hashed_bag_of_words(text: str, dim: int) -> EmbeddingVector:
    """Deterministic embedding: hash whitespace tokens into dim buckets, count, L2-normalize.

    Token hashing uses sha256 so vectors are stable across processes and
    platforms. Order-insensitive and whitespace-normalizing by construction.
    """
    if not text.strip():
        raise ValueError("cannot embed empty text")
    counts = [0.0] * dim
    for token in text.lower().split():
        bucket = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big") % dim
        counts[bucket] += 1.0
    norm = math.sqrt(sum(c * c for c in counts))
    return EmbeddingVector(tuple(c / norm for c in counts))


Matcher = Callable[[str], bool]


def contains_all(*needles: str) -> Matcher:
    return lambda prompt: all(n in prompt for n in needles)


@dataclass
class ScriptRule:
    matcher: Matcher
    response: str


class ScriptedBackend:
    """Replays canned responses: first registered rule whose matcher accepts the prompt wins.

    A pure function of (rule table, prompt); embeddings come from the hashed
    bag-of-words embedder at a fixed dimension.
    """

    def __init__(self, model_id: str = "scripted", embed_dim: int = 64):
        self.model_id = model_id
        self.embed_dim = embed_dim
        self._rules: list[ScriptRule] = []

    def register_script(self, matcher: Matcher | str, response: str) -> None:
        if isinstance(matcher, str):
            matcher = contains_all(matcher)
        self._rules.append(ScriptRule(matcher, response))

    def chat(self, prompt: str, params: DecodingParams | None = None) -> ChatExchange:
        for rule in self._rules:
            if rule.matcher(prompt):
                return ChatExchange(
                    model_id=self.model_id,
                    prompt=prompt,
                    response=rule.response.rstrip(),
                    elapsed_s=0.0,
                )
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:12]
        raise UnmatchedPromptError(
            f"no scripted rule matches prompt (sha256 prefix {digest})"
        )

    def embed(self, text: str) -> EmbeddingVector:
        return hashed_bag_of_words(text, self.embed_dim)

    @classmethod
    def from_script(cls, rules: Sequence[dict], model_id: str = "scripted",
                    embed_dim: int = 64) -> "ScriptedBackend":
        """Build from a script file's rule list.

        Each rule is {"contains": str} or {"contains_all": [str, ...]} plus
        a "response" string; rules apply in list order.
        """
        backend = cls(model_id=model_id, embed_dim=embed_dim)
        for rule in rules:
            if "contains_all" in rule:
                matcher = contains_all(*rule["contains_all"])
            elif "contains" in rule:
                matcher = contains_all(rule["contains"])
            else:
                raise ValueError(f"script rule needs 'contains' or 'contains_all': {rule!r}")
            backend.register_script(matcher, rule["response"])
        return backend


class HTTPBackend:
    """Chat-completions / embeddings client over plain HTTP.

    Credentials come from environment variables only and are never logged.
    Transient transport failures are retried with exponential backoff
    (3 attempts, starting at 1 s) before raising TransportError.
    """

    def __init__(
        self,
        model_id: str,
        base_url: str,
        api_key_env: str = "",
        embed_model: str = "",
        timeout_s: float = 60.0,
        retries: int = 3,
        backoff_s: float = 1.0,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.model_id = model_id
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.embed_model = embed_model or model_id
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        self._session = session or requests.Session()
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "") if self.api_key_env else ""
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, path: str, body: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = self._session.post(
                    f"{self.base_url}{path}",
                    json=body,
                    headers=self._headers(),
                    timeout=self.timeout_s,
                )
            except requests.RequestException as exc:
                last_exc = exc
                if attempt + 1 < self.retries:
                    self._sleep(self.backoff_s * (2**attempt))
                continue
            if resp.status_code != 200:
                raise StatusError(f"{path}: HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise MalformedResponseError(f"{path}: non-JSON body") from exc
        raise TransportError(
            f"{path}: transport failure after {self.retries} attempts: {last_exc}"
        )

    def chat(self, prompt: str, params: DecodingParams | None = None) -> ChatExchange:
        params = params or DecodingParams()
        body = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "top_p": params.top_p,
        }
        if params.max_tokens is not None:
            body["max_tokens"] = params.max_tokens
        start = time.perf_counter()
        data = self._post("/chat/completions", body)
        elapsed = time.perf_counter() - start
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError("chat response missing choices[0].message.content") from exc
        if not isinstance(content, str):
            raise MalformedResponseError("chat response content is not a string")
        return ChatExchange(
            model_id=self.model_id,
            prompt=prompt,
            response=content.rstrip(),
            elapsed_s=elapsed,
        )

    def embed(self, text: str) -> EmbeddingVector:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        data = self._post("/embeddings", {"model": self.embed_model, "input": text})
        try:
            values = data["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError("embedding response missing data[0].embedding") from exc
        return EmbeddingVector(tuple(float(v) for v in values))


ChatBackend = ScriptedBackend | HTTPBackend
