"""Meta-search access with domain filtering, deduplication, and markdown bundling.

Two clients share one `search()` interface: a SearXNG-style JSON API client
and an offline fixture index (a directory of JSON page records) that makes
retrieval fully deterministic in tests. Results flow through a two-layer
domain restriction: a `site:` clause on the query itself, then an explicit
host check on every hit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlparse

import requests

from .backends import StatusError, MalformedResponseError, TransportError


@dataclass(frozen=True)
class SearchHit:
    title: str
    url: str
    snippet: str
    content: str = ""

    @property
    def host(self) -> str:
        return (urlparse(self.url).hostname or "").lower()


@dataclass(frozen=True)
class EvidenceBundle:
    """Deduplicated hits for one query, rendered as a markdown block."""

    query: str
    hits: tuple[SearchHit, ...]
    markdown: str

    @property
    def urls(self) -> list[str]:
        return [h.url for h in self.hits]


def build_query(terms: list[str], site: str) -> str:
    """Join terms with single spaces and append one `site:` clause."""
    terms = [t for t in terms if t and t.strip()]
    if not terms:
        raise ValueError("build_query requires at least one non-empty term")
    if not site:
        raise ValueError("build_query requires a site")
    return " ".join(t.strip() for t in terms) + f" site:{site}"


def host_allowed(host: str, allowed: str) -> bool:
    allowed = allowed.lower()
    host = host.lower()
    return host == allowed or host.endswith("." + allowed)


def filter_domain(hits: list[SearchHit], allowed: str) -> list[SearchHit]:
    """Keep hits whose URL host equals `allowed` or is one of its subdomains."""
    return [h for h in hits if host_allowed(h.host, allowed)]


def normalize_url(url: str) -> str:
    """Dedup key: lowercase host, strip trailing slash, drop fragment, keep query."""
    parsed = urlparse(url)
    host = (parsed.hostname or "").lower()
    path = parsed.path.rstrip("/")
    key = f"{parsed.scheme}://{host}{path}"
    if parsed.query:
        key += f"?{parsed.query}"
    return key


def render_markdown(hits: list[SearchHit]) -> str:
    return "".join(f"### {h.title}\n{h.url}\n\n{h.snippet}\n" for h in hits)


def dedup_and_bundle(query: str, hits: list[SearchHit]) -> EvidenceBundle:
    """Keep the first occurrence of each normalized URL and render the bundle."""
    seen: set[str] = set()
    kept: list[SearchHit] = []
    for hit in hits:
        key = normalize_url(hit.url)
        if key in seen:
            continue
        seen.add(key)
        kept.append(hit)
    return EvidenceBundle(query=query, hits=tuple(kept), markdown=render_markdown(kept))


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> set[str]:
    return set(_TOKEN_RE.findall(text.lower()))


class FixtureIndex:
    """Offline search over a directory of JSON page records {url, title, body}.

    Matching is case-insensitive token overlap between the query and
    title+body, ranked by the number of distinct matching tokens; ties break
    by URL lexicographic order. A `site:<domain>` clause in the query is
    honored as a host restriction rather than matched as text.
    """

    def __init__(self, pages_dir: str | Path):
        self.pages: list[dict] = []
        pages_dir = Path(pages_dir)
        if not pages_dir.is_dir():
            raise FileNotFoundError(f"fixture index directory not found: {pages_dir}")
        for path in sorted(pages_dir.glob("*.json")):
            record = json.loads(path.read_text(encoding="utf-8"))
            record.setdefault("title", "")
            record.setdefault("body", "")
            record["_tokens"] = _tokens(record["title"] + " " + record["body"])
            self.pages.append(record)

    def search(self, query: str, max_results: int = 10) -> list[SearchHit]:
        site = None
        terms = []
        for word in query.split():
            if word.lower().startswith("site:"):
                site = word[len("site:"):].lower()
            else:
                terms.append(word)
        query_tokens = _tokens(" ".join(terms))
        scored = []
        for page in self.pages:
            if site is not None:
                host = (urlparse(page["url"]).hostname or "").lower()
                if not host_allowed(host, site):
                    continue
            count = len(query_tokens & page["_tokens"])
            if count > 0:
                scored.append((-count, page["url"], page))
        scored.sort()
        hits = []
        for _, _, page in scored[:max_results]:
            body = page["body"]
            hits.append(
                SearchHit(
                    title=page["title"],
                    url=page["url"],
                    snippet=body[:200],
                    content=body,
                )
            )
        return hits


class SearxClient:
    """Client for a SearXNG-style JSON search endpoint (GET with q, format=json)."""

    def __init__(self, base_url: str, timeout_s: float = 30.0,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._session = session or requests.Session()

    def search(self, query: str, max_results: int = 10) -> list[SearchHit]:
        try:
            resp = self._session.get(
                f"{self.base_url}/search",
                params={"q": query, "format": "json"},
                timeout=self.timeout_s,
            )
        except requests.RequestException as exc:
            raise TransportError(f"search transport failure: {exc}") from exc
        if resp.status_code != 200:
            raise StatusError(f"search: HTTP {resp.status_code}")
        try:
            results = resp.json().get("results", [])
        except ValueError as exc:
            raise MalformedResponseError("search: non-JSON body") from exc
        hits = []
        for item in results[:max_results]:
            url = item.get("url")
            if not url:
                continue
            hits.append(
                SearchHit(
                    title=item.get("title", "") or "",
                    url=url,
                    snippet=item.get("content", "") or "",
                    content=item.get("content", "") or "",
                )
            )
        return hits


SearchClient = FixtureIndex | SearxClient


def searched_bundle(client: SearchClient, query: str, allowed_domain: str,
                    max_results: int = 10) -> EvidenceBundle:
    """search -> filter_domain -> dedup_and_bundle, as one retrieval step."""
    hits = client.search(query, max_results=max_results)
    return dedup_and_bundle(query, filter_domain(hits, allowed_domain))
