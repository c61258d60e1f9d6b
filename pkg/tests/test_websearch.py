"""Query construction, domain filtering, deduplication, and the search clients."""

import json

import pytest
import requests

from ragbench.backends import StatusError, TransportError
from ragbench.websearch import (
    EvidenceBundle,
    FixtureIndex,
    SearchHit,
    SearxClient,
    build_query,
    dedup_and_bundle,
    filter_domain,
    normalize_url,
)


def hit(url, title="t", snippet="s"):
    return SearchHit(title=title, url=url, snippet=snippet)


def test_build_query_appends_site_clause():
    assert build_query(["cardiac myxoma"], "radiopaedia.org") == "cardiac myxoma site:radiopaedia.org"


def test_build_query_joins_terms_with_single_spaces():
    query = build_query(["left atrial mass", "interatrial septum"], "radiopaedia.org")
    assert query == "left atrial mass interatrial septum site:radiopaedia.org"


def test_build_query_rejects_empty_terms():
    with pytest.raises(ValueError):
        build_query([], "radiopaedia.org")
    with pytest.raises(ValueError):
        build_query(["  "], "radiopaedia.org")


def test_build_query_always_ends_with_site_clause():
    for terms in (["a"], ["a", "b"], ["x y", "z"]):
        assert build_query(terms, "radiopaedia.org").endswith("site:radiopaedia.org")


def test_filter_domain_keeps_exact_host_only():
    hits = [hit("https://radiopaedia.org/articles/x"), hit("https://example.com/y")]
    kept = filter_domain(hits, "radiopaedia.org")
    assert [h.url for h in kept] == ["https://radiopaedia.org/articles/x"]


def test_filter_domain_empty_input():
    assert filter_domain([], "radiopaedia.org") == []


def test_filter_domain_accepts_subdomains():
    hits = [hit("https://www.radiopaedia.org/articles/x"), hit("https://notradiopaedia.org/z")]
    kept = filter_domain(hits, "radiopaedia.org")
    assert [h.url for h in kept] == ["https://www.radiopaedia.org/articles/x"]


def test_filtered_hosts_always_end_with_domain():
    hosts = [
        "radiopaedia.org", "www.radiopaedia.org", "cdn.images.radiopaedia.org",
        "example.org", "radiopaedia.org.evil.com", "xradiopaedia.org",
    ]
    hits = [hit(f"https://{h}/p") for h in hosts]
    for kept in filter_domain(hits, "radiopaedia.org"):
        host = kept.host
        assert host == "radiopaedia.org" or host.endswith(".radiopaedia.org")
    assert len(filter_domain(hits, "radiopaedia.org")) == 3


def test_dedup_identical_urls():
    bundle = dedup_and_bundle("q", [hit("https://radiopaedia.org/a"), hit("https://radiopaedia.org/a")])
    assert len(bundle.hits) == 1


def test_dedup_normalizes_trailing_slash_and_fragment():
    hits = [
        hit("https://radiopaedia.org/a/"),
        hit("https://radiopaedia.org/a"),
        hit("https://radiopaedia.org/a#section"),
        hit("https://radiopaedia.org/a?lang=gb"),
    ]
    bundle = dedup_and_bundle("q", hits)
    # query string is kept, so the ?lang variant is distinct
    assert [h.url for h in bundle.hits] == ["https://radiopaedia.org/a/", "https://radiopaedia.org/a?lang=gb"]


def test_normalize_url_lowercases_host():
    assert normalize_url("https://Radiopaedia.ORG/A/") == normalize_url("https://radiopaedia.org/A")


def test_dedup_is_idempotent():
    hits = [hit(f"https://radiopaedia.org/{i}") for i in (1, 2, 2, 3)]
    once = dedup_and_bundle("q", hits)
    twice = dedup_and_bundle("q", list(once.hits))
    assert twice.hits == once.hits
    assert twice.markdown == once.markdown


def test_markdown_lists_every_hit_with_title_and_url():
    hits = [hit(f"https://radiopaedia.org/{i}", title=f"T{i}", snippet=f"S{i}") for i in range(3)]
    bundle = dedup_and_bundle("q", hits)
    assert bundle.markdown.count("### ") == 3
    for h in hits:
        assert f"### {h.title}\n{h.url}\n\n{h.snippet}\n" in bundle.markdown


def _write_pages(tmp_path, pages):
    for i, page in enumerate(pages):
        (tmp_path / f"p{i}.json").write_text(json.dumps(page), encoding="utf-8")
    return FixtureIndex(tmp_path)


def test_fixture_index_matches_and_ranks(tmp_path):
    index = _write_pages(
        tmp_path,
        [
            {"url": "https://radiopaedia.org/a", "title": "Myxoma overview", "body": "cardiac myxoma facts"},
            {"url": "https://radiopaedia.org/b", "title": "Myxoma case", "body": "a myxoma case"},
            {"url": "https://radiopaedia.org/c", "title": "Thrombus", "body": "no match term"},
        ],
    )
    hits = index.search("myxoma", max_results=10)
    assert [h.url for h in hits] == ["https://radiopaedia.org/a", "https://radiopaedia.org/b"]


def test_fixture_index_empty_result_is_not_an_error(tmp_path):
    index = _write_pages(tmp_path, [{"url": "https://radiopaedia.org/a", "title": "x", "body": "y"}])
    assert index.search("nothing matches this") == []


def test_fixture_index_truncates_to_max_results(tmp_path):
    pages = [
        {"url": f"https://radiopaedia.org/{i}", "title": "term", "body": "term"} for i in range(3)
    ]
    index = _write_pages(tmp_path, pages)
    assert len(index.search("term", max_results=1)) == 1


def test_fixture_index_ranks_by_match_count_then_url(tmp_path):
    index = _write_pages(
        tmp_path,
        [
            {"url": "https://radiopaedia.org/z-two", "title": "alpha beta", "body": ""},
            {"url": "https://radiopaedia.org/a-two", "title": "alpha beta", "body": ""},
            {"url": "https://radiopaedia.org/one", "title": "alpha", "body": ""},
        ],
    )
    hits = index.search("alpha beta")
    assert [h.url for h in hits] == [
        "https://radiopaedia.org/a-two",
        "https://radiopaedia.org/z-two",
        "https://radiopaedia.org/one",
    ]


def test_fixture_index_honors_site_clause(tmp_path):
    index = _write_pages(
        tmp_path,
        [
            {"url": "https://radiopaedia.org/a", "title": "alpha", "body": ""},
            {"url": "https://example.com/b", "title": "alpha", "body": ""},
        ],
    )
    hits = index.search("alpha site:radiopaedia.org")
    assert [h.url for h in hits] == ["https://radiopaedia.org/a"]


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)

    def get(self, url, params=None, timeout=None):
        step = self.responses.pop(0)
        if isinstance(step, Exception):
            raise step
        return step


class FakeResponse:
    def __init__(self, status_code=200, payload=None):
        self.status_code = status_code
        self._payload = payload

    def json(self):
        if self._payload is None:
            raise ValueError("no json")
        return self._payload


def test_searx_client_parses_results():
    payload = {
        "results": [
            {"url": "https://radiopaedia.org/a", "title": "A", "content": "c"},
            {"title": "missing url ignored"},
        ]
    }
    client = SearxClient("http://searx", session=FakeSession([FakeResponse(payload=payload)]))
    hits = client.search("q")
    assert len(hits) == 1
    assert hits[0].url == "https://radiopaedia.org/a"


def test_searx_client_errors():
    client = SearxClient("http://searx", session=FakeSession([requests.ConnectionError("x")]))
    with pytest.raises(TransportError):
        client.search("q")
    client = SearxClient("http://searx", session=FakeSession([FakeResponse(status_code=503)]))
    with pytest.raises(StatusError):
        client.search("q")
