"""Scripted and HTTP backend behavior."""

import itertools
import json

import pytest
import requests

from ragbench.backends import (
    ChatExchange,
    DecodingParams,
    HTTPBackend,
    MalformedResponseError,
    ScriptedBackend,
    StatusError,
    TransportError,
    UnmatchedPromptError,
    contains_all,
    cosine,
    hashed_bag_of_words,
)


def test_decoding_defaults_are_greedy():
    params = DecodingParams()
    assert params.temperature == 0.0
    assert params.top_p == 1.0


def test_scripted_first_matching_rule_wins():
    backend = ScriptedBackend()
    backend.register_script("Question:", "first")
    backend.register_script("Question:", "second")
    assert backend.chat("Question: anything").response == "first"


def test_scripted_canned_answer_for_matching_prompt():
    backend = ScriptedBackend()
    backend.register_script("Question:", "B")
    exchange = backend.chat("prefix\nQuestion: what?\nOptions: ...")
    assert exchange.response == "B"
    assert exchange.elapsed_s >= 0.0


def test_scripted_repeat_calls_are_byte_identical():
    backend = ScriptedBackend()
    backend.register_script("x", "canned response\n")
    first = backend.chat("x 1")
    second = backend.chat("x 1")
    assert first.response == second.response
    assert first == second


def test_scripted_unmatched_prompt_names_hash():
    backend = ScriptedBackend()
    with pytest.raises(UnmatchedPromptError, match="sha256 prefix [0-9a-f]{12}"):
        backend.chat("nobody registered this")


def test_contains_all_matcher_requires_every_needle():
    backend = ScriptedBackend()
    backend.register_script(contains_all("alpha", "beta"), "both")
    with pytest.raises(UnmatchedPromptError):
        backend.chat("alpha only")
    assert backend.chat("beta then alpha").response == "both"


def test_from_script_rule_kinds():
    backend = ScriptedBackend.from_script(
        [
            {"contains_all": ["a", "b"], "response": "ab"},
            {"contains": "a", "response": "a"},
        ]
    )
    assert backend.chat("b a").response == "ab"
    assert backend.chat("a").response == "a"
    with pytest.raises(ValueError):
        ScriptedBackend.from_script([{"response": "no matcher"}])


def test_embed_deterministic_and_fixed_dim():
    backend = ScriptedBackend(embed_dim=64)
    one = backend.embed("a")
    two = backend.embed("a")
    assert one == two
    assert one.dim == 64


def test_embed_whitespace_normalizing():
    backend = ScriptedBackend(embed_dim=64)
    assert backend.embed("some words here") == backend.embed("  some   words here ")


def test_embed_rejects_empty_text():
    backend = ScriptedBackend()
    with pytest.raises(ValueError):
        backend.embed("   ")


def test_disjoint_vocabularies_have_zero_cosine():
    # Brute-force collision check over the test vocabulary first: the claim
    # only holds when no two tokens share a bucket.
    vocab_a = ["myxoma", "septum", "atrial"]
    vocab_b = ["tibia", "sclerosis", "cortical"]
    dim = 64
    buckets = {}
    for token in vocab_a + vocab_b:
        vec = hashed_bag_of_words(token, dim)
        buckets[token] = vec.values.index(max(vec.values))
    assert len(set(buckets.values())) == len(buckets), "hash collision in fixture vocabulary"
    a = hashed_bag_of_words(" ".join(vocab_a), dim)
    b = hashed_bag_of_words(" ".join(vocab_b), dim)
    assert cosine(a, b) == pytest.approx(0.0)


def test_cosine_self_similarity_is_one():
    v = hashed_bag_of_words("left atrial mass", 32)
    assert cosine(v, v) == pytest.approx(1.0)


class FakeResponse:
    def __init__(self, status_code=200, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        if self._payload is None:
            raise ValueError("no json")
        return self._payload


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append({"url": url, "json": json, "headers": headers})
        step = self.responses.pop(0)
        if isinstance(step, Exception):
            raise step
        return step


def _chat_payload(content="B"):
    return {"choices": [{"message": {"content": content}}]}


def test_http_chat_parses_first_choice_and_sends_params():
    session = FakeSession([FakeResponse(payload=_chat_payload("Answer: B"))])
    backend = HTTPBackend("m1", "http://host/v1", session=session, sleep=lambda s: None)
    exchange = backend.chat("prompt text", DecodingParams(temperature=0.0, top_p=1.0))
    assert isinstance(exchange, ChatExchange)
    assert exchange.response == "Answer: B"
    assert exchange.elapsed_s >= 0.0
    body = session.calls[0]["json"]
    assert body["temperature"] == 0.0
    assert body["top_p"] == 1.0
    assert body["messages"] == [{"role": "user", "content": "prompt text"}]


def test_http_retries_transient_failures_then_succeeds():
    session = FakeSession(
        [
            requests.ConnectionError("boom"),
            requests.ConnectionError("boom"),
            FakeResponse(payload=_chat_payload()),
        ]
    )
    slept = []
    backend = HTTPBackend(
        "m1", "http://host", session=session, retries=3, backoff_s=1.0, sleep=slept.append
    )
    assert backend.chat("p").response == "B"
    assert slept == [1.0, 2.0]  # exponential backoff starting at 1 s


def test_http_transport_error_after_exhausted_retries():
    session = FakeSession([requests.ConnectionError("boom")] * 3)
    backend = HTTPBackend("m1", "http://host", session=session, retries=3, sleep=lambda s: None)
    with pytest.raises(TransportError, match="after 3 attempts"):
        backend.chat("p")


def test_http_unreachable_endpoint_raises_transport_error():
    backend = HTTPBackend(
        "m1", "http://127.0.0.1:9", retries=2, backoff_s=0.0, timeout_s=0.2,
        sleep=lambda s: None,
    )
    with pytest.raises(TransportError):
        backend.chat("p")


def test_http_status_and_malformed_are_distinguishable():
    backend = HTTPBackend(
        "m1", "http://host",
        session=FakeSession([FakeResponse(status_code=500, text="oops")]),
        sleep=lambda s: None,
    )
    with pytest.raises(StatusError):
        backend.chat("p")
    backend = HTTPBackend(
        "m1", "http://host",
        session=FakeSession([FakeResponse(payload={"weird": True})]),
        sleep=lambda s: None,
    )
    with pytest.raises(MalformedResponseError):
        backend.chat("p")


def test_http_embed_parses_embedding():
    payload = {"data": [{"embedding": [0.1, 0.2, 0.3]}]}
    session = FakeSession([FakeResponse(payload=payload)])
    backend = HTTPBackend("m1", "http://host", embed_model="emb", session=session,
                          sleep=lambda s: None)
    vec = backend.embed("text")
    assert vec.values == (0.1, 0.2, 0.3)
    assert session.calls[0]["json"] == {"model": "emb", "input": "text"}


def test_http_api_key_env_used_but_never_required(monkeypatch):
    session = FakeSession([FakeResponse(payload=_chat_payload())])
    monkeypatch.setenv("TEST_BACKEND_KEY", "secret-token")
    backend = HTTPBackend(
        "m1", "http://host", api_key_env="TEST_BACKEND_KEY", session=session,
        sleep=lambda s: None,
    )
    backend.chat("p")
    assert session.calls[0]["headers"]["Authorization"] == "Bearer secret-token"
