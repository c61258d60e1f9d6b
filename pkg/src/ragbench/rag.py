"""Single-pass retrieval baseline: keywords -> articles -> chunks -> embeddings -> top-k.

Tokens are whitespace-delimited words, not model-tokenizer tokens, so
chunk boundaries are deterministic. The vector store is temporary and
scoped to one question.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import ChatBackend, EmbeddingVector, cosine
from .dataset import Question
from .websearch import SearchClient, build_query, searched_bundle

RAG_KEYWORD_PROMPT_TEMPLATE = (
    "You are assisting with literature retrieval for a radiology question. "
    "List up to five representative radiology keywords for the question below, "
    "comma-separated, and nothing else.\n"
    "Question: {question_text}\n"
    "Keywords:"
)

DEFAULT_CHUNK_SIZE = 1000
DEFAULT_CHUNK_OVERLAP = 200
DEFAULT_TOP_K = 3
DEFAULT_ARTICLES_PER_KEYWORD = 3


class RagError(Exception):
    pass


@dataclass(frozen=True)
class Chunk:
    source_url: str
    text: str
    index: int
    token_count: int


@dataclass
class VectorStore:
    entries: list[tuple[Chunk, EmbeddingVector]]

    def __len__(self) -> int:
        return len(self.entries)


def extract_rag_keywords(question: Question, backend: ChatBackend) -> list[str]:
    """Extract at most five non-empty keywords; error on an empty response."""
    prompt = RAG_KEYWORD_PROMPT_TEMPLATE.format(question_text=question.stem)
    exchange = backend.chat(prompt)
    keywords = [k.strip() for k in exchange.response.split(",") if k.strip()]
    if not keywords:
        raise RagError(f"question {question.id}: keyword extraction returned nothing")
    return keywords[:5]


def chunk_text(text: str, source_url: str = "", size: int = DEFAULT_CHUNK_SIZE,
               overlap: int = DEFAULT_CHUNK_OVERLAP) -> list[Chunk]:
    """Split into overlapping word-token chunks; chunk i starts at token i*(size-overlap)."""
    if overlap < 0 or size <= overlap:
        raise ValueError(f"chunk size ({size}) must exceed overlap ({overlap}) and overlap >= 0")
    tokens = text.split()
    chunks = []
    stride = size - overlap
    start = 0
    index = 0
    while start < len(tokens):
        window = tokens[start : start + size]
        chunks.append(
            Chunk(
                source_url=source_url,
                text=" ".join(window),
                index=index,
                token_count=len(window),
            )
        )
        start += stride
        index += 1
    return chunks


def build_store(chunks: list[Chunk], backend: ChatBackend) -> VectorStore:
    """Embed every chunk, preserving order; embedding failures name the chunk."""
    entries = []
    for chunk in chunks:
        try:
            vector = backend.embed(chunk.text)
        except Exception as exc:
            raise RagError(
                f"embedding failed for chunk {chunk.index} of {chunk.source_url or '<text>'}: {exc}"
            ) from exc
        entries.append((chunk, vector))
    return VectorStore(entries)


def top_k(question_text: str, store: VectorStore, backend: ChatBackend,
          k: int = DEFAULT_TOP_K) -> list[Chunk]:
    """The k chunks most cosine-similar to the embedded question, ties by store order."""
    if not store.entries:
        return []
    query_vec = backend.embed(question_text)
    scored = [(-cosine(query_vec, vec), i) for i, (_, vec) in enumerate(store.entries)]
    scored.sort()  # ties resolved by store index
    return [store.entries[i][0] for _, i in scored[:k]]


def render_context(chunks: list[Chunk]) -> str:
    """Chunks as '[source: <url>]\\n<text>' blocks separated by blank lines."""
    return "\n\n".join(f"[source: {c.source_url}]\n{c.text}" for c in chunks)


def rag_context(
    question: Question,
    search: SearchClient,
    keyword_backend: ChatBackend,
    embed_backend: ChatBackend,
    domain: str = "radiopaedia.org",
    articles_per_keyword: int = DEFAULT_ARTICLES_PER_KEYWORD,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    chunk_overlap: int = DEFAULT_CHUNK_OVERLAP,
    k: int = DEFAULT_TOP_K,
) -> str:
    """Full single-pass pipeline producing the context block for one question.

    Zero retrieved pages yield an empty context rather than an error.
    """
    keywords = extract_rag_keywords(question, keyword_backend)
    pages: dict[str, str] = {}
    for keyword in keywords:
        bundle = searched_bundle(
            search, build_query([keyword], domain), domain, max_results=articles_per_keyword
        )
        for hit in bundle.hits:
            text = hit.content or hit.snippet
            if text and hit.url not in pages:
                pages[hit.url] = text
    chunks: list[Chunk] = []
    for url, text in pages.items():
        chunks.extend(chunk_text(text, source_url=url, size=chunk_size, overlap=chunk_overlap))
    if not chunks:
        return ""
    store = build_store(chunks, embed_backend)
    selected = top_k(question.stem, store, embed_backend, k=k)
    return render_context(selected)
