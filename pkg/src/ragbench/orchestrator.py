"""Multi-step research orchestration producing structured diagnostic reports.

A supervisor role plans one research section per option, per-option research
workers climb a bounded retrieval ladder (focused query, contextual query,
then up to two controller-proposed refinements), and the supervisor
synthesizes an introduction, per-option sections with citations, and a
neutral conclusion into a single report. All state for one question lives in
a GraphState owned by that question's run; option research may execute
concurrently and is merged deterministically by option letter.
"""

from __future__ import annotations

import re
import time
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlparse

from .backends import BackendError, ChatBackend
from .dataset import Dataset, Question
from .preprocess import KeywordExtractionError, KeywordSummary, extract_keywords
from .websearch import EvidenceBundle, SearchClient, build_query, host_allowed, searched_bundle
from . import persistence


class OrchestratorError(Exception):
    pass


class PlanError(OrchestratorError):
    """The controller failed to produce a complete research plan."""


class CitationError(OrchestratorError):
    """A section cited a URL absent from its evidence, twice."""


class NeutralityError(OrchestratorError):
    """Introduction or conclusion failed the structural neutrality check, twice."""


class AssemblyError(OrchestratorError):
    """Report assembly found a missing or empty section."""


@dataclass(frozen=True)
class OrchestratorConfig:
    domain: str = "radiopaedia.org"
    max_attempts: int = 4
    adequacy_min_hits: int = 2
    max_results: int = 10
    stem_feature_count: int = 2
    concurrent_research: bool = True


@dataclass(frozen=True)
class ResearchPlan:
    sections: tuple[tuple[str, str], ...]  # (option letter, directive), in option order

    def directive(self, letter: str) -> str:
        for lt, directive in self.sections:
            if lt == letter:
                return directive
        raise KeyError(letter)


@dataclass(frozen=True)
class RetrievalAttempt:
    attempt_index: int  # 1-based
    query: str
    kind: str  # focused | contextual | refined
    adequate: bool
    bundle: EvidenceBundle


@dataclass(frozen=True)
class SectionDraft:
    option_letter: str
    body: str
    supporting_points: tuple[str, ...]
    contradicting_points: tuple[str, ...]
    citations: tuple[str, ...]
    limitation_note: str | None = None

    def to_json(self) -> dict:
        return {
            "option_letter": self.option_letter,
            "body": self.body,
            "supporting_points": list(self.supporting_points),
            "contradicting_points": list(self.contradicting_points),
            "citations": list(self.citations),
            "limitation_note": self.limitation_note,
        }


@dataclass(frozen=True)
class DiagnosticReport:
    question_id: str
    introduction: str
    sections: tuple[SectionDraft, ...]
    conclusion: str
    all_sources: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "introduction": self.introduction,
            "sections": [s.to_json() for s in self.sections],
            "conclusion": self.conclusion,
            "all_sources": list(self.all_sources),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DiagnosticReport":
        return cls(
            question_id=obj["question_id"],
            introduction=obj["introduction"],
            sections=tuple(
                SectionDraft(
                    option_letter=s["option_letter"],
                    body=s["body"],
                    supporting_points=tuple(s["supporting_points"]),
                    contradicting_points=tuple(s["contradicting_points"]),
                    citations=tuple(s["citations"]),
                    limitation_note=s.get("limitation_note"),
                )
                for s in obj["sections"]
            ),
            conclusion=obj["conclusion"],
            all_sources=tuple(obj["all_sources"]),
        )


@dataclass
class GraphState:
    """Shared memory for one question's run: plan, evidence, drafts, and an append-only log."""

    question: Question
    keywords: KeywordSummary | None = None
    plan: ResearchPlan | None = None
    evidence: dict[str, list[EvidenceBundle]] = field(default_factory=dict)
    attempts: dict[str, list[RetrievalAttempt]] = field(default_factory=dict)
    drafts: dict[str, SectionDraft] = field(default_factory=dict)
    interactions: list[tuple[str, float, str]] = field(default_factory=list)
    introduction_text: str = ""
    conclusion_text: str = ""
    report: DiagnosticReport | None = None
    _log_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def log(self, step: str, summary: str) -> None:
        with self._log_lock:
            self.interactions.append((step, time.time(), summary))


# Generic function words stripped when reducing an option to its essential
# search terms.
STOP_WORDS = frozenset(
    """a an the of in on at to for from with without and or nor due most likely
    is are was were be been than then its it this that these those other""".split()
)

_WORD_RE = re.compile(r"[A-Za-z0-9']+")


def essential_terms(option_text: str) -> list[str]:
    """Lowercased content words of an option, stop-words removed."""
    words = [w.lower() for w in _WORD_RE.findall(option_text)]
    terms = [w for w in words if w not in STOP_WORDS]
    return terms or words


def _term_present(term: str, text: str) -> bool:
    return re.search(rf"(?<![A-Za-z0-9]){re.escape(term)}(?![A-Za-z0-9])", text, re.I) is not None


def bundle_is_adequate(bundle: EvidenceBundle, terms: list[str], min_hits: int) -> bool:
    """At least `min_hits` deduplicated in-domain hits mention an option term."""
    matching = sum(
        1
        for hit in bundle.hits
        if any(_term_present(t, hit.title) or _term_present(t, hit.snippet) for t in terms)
    )
    return matching >= min_hits


PLAN_PROMPT_TEMPLATE = (
    "You are supervising research for a multiple-choice diagnostic question.\n"
    "Question ID: {question_id}\n"
    "Question: {stem}\n"
    "Key concepts: {keywords}\n"
    "Options:\n{options}\n"
    "Produce a research plan with exactly one line per option, formatted as\n"
    "\"<letter>: <directive>\". Each directive must name the option and the\n"
    "clinical features to verify against it. Remain neutral: plan evidence\n"
    "gathering for every option without favoring any."
)

REFINE_PROMPT_TEMPLATE = (
    "Retrieval attempt {attempt_index} for option {letter} ({option_text}) of\n"
    "Question ID: {question_id}\n"
    "Earlier queries found insufficient evidence:\n{prior_queries}\n"
    "Simplify or substitute synonyms for these terms: {terms}\n"
    "Reply with a single revised search phrase and nothing else."
)

SECTION_PROMPT_TEMPLATE = (
    "Write the diagnostic report section for option {letter}: {option_text}.\n"
    "Question ID: {question_id}\n"
    "Directive: {directive}\n"
    "Evidence:\n{evidence}\n"
    "Respond in exactly this layout:\n"
    "BODY:\n<concise synthesis of the evidence>\n"
    "SUPPORTING:\n- <point>\n"
    "CONTRADICTING:\n- <point>\n"
    "CITATIONS:\n- <url>\n"
    "Cite only URLs that appear in the evidence above."
)

INTRO_PROMPT_TEMPLATE = (
    "Write a brief, neutral introduction for a diagnostic report.\n"
    "Question ID: {question_id}\n"
    "Question: {stem}\n"
    "Summarize the essential clinical details without naming or preferring any\n"
    "answer option."
)

CONCLUSION_PROMPT_TEMPLATE = (
    "Write a neutral conclusion for a diagnostic report.\n"
    "Question ID: {question_id}\n"
    "Options:\n{options}\n"
    "Section summaries:\n{summaries}\n"
    "Compare the diagnostic considerations for every option by name, weighing\n"
    "supporting and contradicting evidence. Do not select, rank, or reveal a\n"
    "final answer."
)

RETRY_PLAN_NOTE = "\nYour previous plan was missing options: {missing}. Cover every option."
RETRY_CITATION_NOTE = "\nYour previous draft cited URLs outside the evidence. Cite only the provided sources."
RETRY_NEUTRALITY_NOTE = "\nYour previous text violated neutrality. Mention every option and never state a final answer."


def limitation_note_text(attempts: int) -> str:
    return f"No adequate evidence was retrieved after {attempts} search attempts."


def _neutrality_verdict_marker(text: str, letters: list[str]) -> bool:
    """True when the text declares a single-letter verdict (e.g. 'Final Answer: B')."""
    pattern = re.compile(
        r"(?i)\b(?:final\s+)?answer\b[\s:\-]*(?:is\s+)?\(?([A-Z])\)?(?![A-Za-z0-9])"
    )
    return any(m.group(1).upper() in letters for m in pattern.finditer(text))


def _options_block(question: Question) -> str:
    return "\n".join(f"{letter}: {text}" for letter, text in question.options.items())


def parse_plan_response(text: str, letters: list[str]) -> dict[str, str]:
    """Extract '<letter>: directive' lines for the requested letters."""
    directives: dict[str, str] = {}
    for line in text.splitlines():
        m = re.match(r"\s*\(?([A-Z])\)?\s*[:\-]\s+(.+)$", line)
        if m and m.group(1) in letters and m.group(1) not in directives:
            directives[m.group(1)] = m.group(2).strip()
    return directives


def make_plan(question: Question, keywords: KeywordSummary, controller: ChatBackend) -> ResearchPlan:
    """One directive per option, in option order; one retry on an incomplete plan."""
    prompt = PLAN_PROMPT_TEMPLATE.format(
        question_id=question.id,
        stem=question.stem,
        keywords=", ".join(keywords.keywords),
        options=_options_block(question),
    )
    letters = question.letters
    directives = parse_plan_response(controller.chat(prompt).response, letters)
    missing = [lt for lt in letters if lt not in directives]
    if missing:
        retry = prompt + RETRY_PLAN_NOTE.format(missing=", ".join(missing))
        directives = parse_plan_response(controller.chat(retry).response, letters)
        missing = [lt for lt in letters if lt not in directives]
        if missing:
            raise PlanError(
                f"question {question.id}: plan incomplete after retry, missing {missing}"
            )
    return ResearchPlan(sections=tuple((lt, directives[lt]) for lt in letters))


def _refined_query(
    question: Question,
    letter: str,
    attempt_index: int,
    terms: list[str],
    tried: list[str],
    controller: ChatBackend,
    config: OrchestratorConfig,
) -> str:
    prompt = REFINE_PROMPT_TEMPLATE.format(
        attempt_index=attempt_index,
        letter=letter,
        option_text=question.options[letter],
        question_id=question.id,
        prior_queries="\n".join(f"- {q}" for q in tried),
        terms=", ".join(terms),
    )
    proposal = controller.chat(prompt).response.strip().strip('"')
    words = proposal.split()
    # Mechanical uniqueness guard: a refinement must differ from every prior
    # query for this option.
    candidates = [proposal]
    if len(words) > 1:
        candidates.append(" ".join(words[:-1]))
        candidates.append(" ".join(words[1:]))
    candidates.extend(terms)
    for candidate in candidates:
        if candidate and build_query([candidate], config.domain) not in tried:
            return build_query([candidate], config.domain)
    return build_query([f"{proposal} alternative"], config.domain)


def research_option(
    letter: str,
    directive: str,
    question: Question,
    keywords: KeywordSummary,
    search: SearchClient,
    controller: ChatBackend,
    config: OrchestratorConfig,
) -> tuple[list[RetrievalAttempt], SectionDraft]:
    """Climb the retrieval ladder for one option, then write its section.

    Attempt 1 uses the option's essential terms; attempt 2 adds clinical
    features from the keyword summary; attempts 3 and 4 are controller
    refinements. The ladder stops at the first adequate attempt, and a draft
    written with no adequate attempt carries a limitation note.
    """
    terms = essential_terms(question.options[letter])
    features = list(keywords.keywords[: config.stem_feature_count])
    attempts: list[RetrievalAttempt] = []
    tried: list[str] = []
    for index in range(1, config.max_attempts + 1):
        if index == 1:
            kind, query = "focused", build_query(terms, config.domain)
        elif index == 2:
            kind, query = "contextual", build_query(terms + features, config.domain)
        else:
            kind = "refined"
            query = _refined_query(question, letter, index, terms, tried, controller, config)
        tried.append(query)
        bundle = searched_bundle(search, query, config.domain, max_results=config.max_results)
        adequate = bundle_is_adequate(bundle, terms, config.adequacy_min_hits)
        attempts.append(
            RetrievalAttempt(
                attempt_index=index, query=query, kind=kind, adequate=adequate, bundle=bundle
            )
        )
        if adequate:
            break
    evidence = [a.bundle for a in attempts]
    draft = write_section(
        letter,
        question,
        directive,
        evidence,
        controller,
        limitation=not any(a.adequate for a in attempts),
        ladder_length=len(attempts),
    )
    return attempts, draft


_SECTION_MARKERS = ("BODY:", "SUPPORTING:", "CONTRADICTING:", "CITATIONS:")


def parse_section_response(text: str) -> tuple[str, list[str], list[str], list[str]]:
    """Parse the BODY/SUPPORTING/CONTRADICTING/CITATIONS layout.

    Tolerates missing markers: text outside any marker becomes body, absent
    lists come back empty.
    """
    body_lines: list[str] = []
    buckets: dict[str, list[str]] = {"SUPPORTING:": [], "CONTRADICTING:": [], "CITATIONS:": []}
    current = "BODY:"
    for line in text.splitlines():
        stripped = line.strip()
        if stripped in _SECTION_MARKERS:
            current = stripped
            continue
        if current == "BODY:":
            body_lines.append(line)
        elif stripped.startswith("- "):
            buckets[current].append(stripped[2:].strip())
        elif stripped:
            buckets[current].append(stripped)
    return (
        "\n".join(body_lines).strip(),
        buckets["SUPPORTING:"],
        buckets["CONTRADICTING:"],
        buckets["CITATIONS:"],
    )


def write_section(
    letter: str,
    question: Question,
    directive: str,
    evidence: list[EvidenceBundle],
    controller: ChatBackend,
    limitation: bool = False,
    ladder_length: int = 0,
) -> SectionDraft:
    """Synthesize one option's section; citations must stay inside the evidence."""
    evidence_urls = {url for bundle in evidence for url in bundle.urls}
    evidence_md = "\n".join(b.markdown for b in evidence if b.markdown).strip()
    prompt = SECTION_PROMPT_TEMPLATE.format(
        letter=letter,
        option_text=question.options[letter],
        question_id=question.id,
        directive=directive,
        evidence=evidence_md or "(no evidence retrieved)",
    )
    body, supporting, contradicting, citations = parse_section_response(
        controller.chat(prompt).response
    )
    if any(url not in evidence_urls for url in citations):
        body, supporting, contradicting, citations = parse_section_response(
            controller.chat(prompt + RETRY_CITATION_NOTE).response
        )
        bad = [url for url in citations if url not in evidence_urls]
        if bad:
            raise CitationError(
                f"question {question.id} option {letter}: cited URLs outside evidence: {bad}"
            )
    note = limitation_note_text(ladder_length) if limitation else None
    return SectionDraft(
        option_letter=letter,
        body=body,
        supporting_points=tuple(supporting),
        contradicting_points=tuple(contradicting),
        citations=tuple(citations),
        limitation_note=note,
    )


def _checked_neutral_text(
    prompt: str,
    controller: ChatBackend,
    letters: list[str],
    required_mentions: list[str],
    what: str,
    question_id: str,
) -> str:
    def violations(text: str) -> list[str]:
        out = []
        if _neutrality_verdict_marker(text, letters):
            out.append("declares a final answer")
        missing = [name for name in required_mentions if name.lower() not in text.lower()]
        if missing:
            out.append(f"does not mention: {missing}")
        return out

    text = controller.chat(prompt).response
    if violations(text):
        text = controller.chat(prompt + RETRY_NEUTRALITY_NOTE).response
        problems = violations(text)
        if problems:
            raise NeutralityError(
                f"question {question_id}: {what} failed neutrality check: {'; '.join(problems)}"
            )
    return text


def write_introduction(state: GraphState, controller: ChatBackend) -> str:
    """Restate stem facts without preferring an option; one retry on violation."""
    q = state.question
    prompt = INTRO_PROMPT_TEMPLATE.format(question_id=q.id, stem=q.stem)
    return _checked_neutral_text(prompt, controller, q.letters, [], "introduction", q.id)


def write_conclusion(state: GraphState, controller: ChatBackend) -> str:
    """Compare all options by name without advocating one; one retry on violation."""
    q = state.question
    if set(state.drafts) != set(q.letters):
        raise AssemblyError(f"question {q.id}: conclusion requires drafts for all options")
    summaries = "\n".join(
        f"{letter}: {state.drafts[letter].body.splitlines()[0] if state.drafts[letter].body else '(empty)'}"
        for letter in q.letters
    )
    prompt = CONCLUSION_PROMPT_TEMPLATE.format(
        question_id=q.id, options=_options_block(q), summaries=summaries
    )
    return _checked_neutral_text(
        prompt, controller, q.letters, list(q.options.values()), "conclusion", q.id
    )


def assemble_report(state: GraphState) -> DiagnosticReport:
    """Order sections by letter, verify completeness, and deduplicate sources."""
    q = state.question
    if not state.introduction_text:
        raise AssemblyError(f"question {q.id}: missing introduction")
    if not state.conclusion_text:
        raise AssemblyError(f"question {q.id}: missing conclusion")
    sections = []
    for letter in q.letters:
        draft = state.drafts.get(letter)
        if draft is None:
            raise AssemblyError(f"question {q.id}: missing section for option {letter}")
        if not draft.body.strip():
            raise AssemblyError(f"question {q.id}: empty section body for option {letter}")
        sections.append(draft)
    sources: list[str] = []
    for draft in sections:
        for url in draft.citations:
            if url not in sources:
                sources.append(url)
    return DiagnosticReport(
        question_id=q.id,
        introduction=state.introduction_text,
        sections=tuple(sections),
        conclusion=state.conclusion_text,
        all_sources=tuple(sources),
    )


def run_graph(
    question: Question,
    search: SearchClient,
    controller: ChatBackend,
    summarizer: ChatBackend | None = None,
    config: OrchestratorConfig | None = None,
) -> tuple[DiagnosticReport, GraphState]:
    """Execute preprocess -> plan -> per-option research -> synthesis -> assembly.

    Research for distinct options may run concurrently; results are merged by
    option letter so the report is independent of completion order.
    """
    config = config or OrchestratorConfig()
    summarizer = summarizer or controller
    state = GraphState(question=question)

    state.keywords = extract_keywords(question, summarizer)
    state.log("keywords", f"{len(state.keywords.keywords)} phrases")

    state.plan = make_plan(question, state.keywords, controller)
    state.log("plan", f"{len(state.plan.sections)} sections")

    def _research(item: tuple[str, str]) -> tuple[str, list[RetrievalAttempt], SectionDraft]:
        letter, directive = item
        attempts, draft = research_option(
            letter, directive, question, state.keywords, search, controller, config
        )
        state.log(f"research:{letter}", f"{len(attempts)} attempts")
        return letter, attempts, draft

    if config.concurrent_research and len(state.plan.sections) > 1:
        with ThreadPoolExecutor(max_workers=len(state.plan.sections)) as pool:
            results = list(pool.map(_research, state.plan.sections))
    else:
        results = [_research(item) for item in state.plan.sections]
    # Join point: merge worker results into shared state in option order.
    results.sort(key=lambda r: question.letters.index(r[0]))
    for letter, attempts, draft in results:
        state.attempts[letter] = attempts
        state.evidence[letter] = [a.bundle for a in attempts]
        state.drafts[letter] = draft

    state.introduction_text = write_introduction(state, controller)
    state.log("introduction", f"{len(state.introduction_text)} chars")
    state.conclusion_text = write_conclusion(state, controller)
    state.log("conclusion", f"{len(state.conclusion_text)} chars")

    report = assemble_report(state)
    state.report = report
    state.log("assembly", f"{len(report.all_sources)} sources")
    return report, state


def check_report_invariants(
    report: DiagnosticReport,
    state: GraphState,
    config: OrchestratorConfig | None = None,
) -> list[str]:
    """Citation closure, domain closure, ladder bound, and the limitation biconditional."""
    config = config or OrchestratorConfig()
    problems = []
    for section in report.sections:
        letter = section.option_letter
        evidence_urls = {
            url for bundle in state.evidence.get(letter, []) for url in bundle.urls
        }
        for url in section.citations:
            if url not in evidence_urls:
                problems.append(f"option {letter}: citation outside evidence: {url}")
        attempts = state.attempts.get(letter, [])
        if not 1 <= len(attempts) <= config.max_attempts:
            problems.append(f"option {letter}: {len(attempts)} attempts outside [1, 4]")
        if any(a.adequate for a in attempts[:-1]):
            problems.append(f"option {letter}: ladder continued past an adequate attempt")
        adequate_ever = any(a.adequate for a in attempts)
        if adequate_ever and section.limitation_note is not None:
            problems.append(f"option {letter}: limitation note despite adequate evidence")
        if not adequate_ever and section.limitation_note is None:
            problems.append(f"option {letter}: no adequate attempt but no limitation note")
    for url in report.all_sources:
        host = (urlparse(url).hostname or "").lower()
        if not host_allowed(host, config.domain):
            problems.append(f"source outside allowed domain: {url}")
    return problems


@dataclass
class BatchResult:
    completed: list[str]
    failed: list[tuple[str, str]]
    skipped: list[str]
    checkpoint: Path
    consolidated: Path
    elapsed_s: float


# Failures of these kinds abort one question, never the batch.
QUESTION_ERRORS = (OrchestratorError, BackendError, KeywordExtractionError, ValueError)


def generate_reports_batch(
    dataset: Dataset,
    search: SearchClient,
    controller: ChatBackend,
    summarizer: ChatBackend | None = None,
    out_dir: str | Path = "out",
    config: OrchestratorConfig | None = None,
    parallelism: int = 1,
    after_append=None,
) -> BatchResult:
    """Generate one report per question with NDJSON checkpointing and resume.

    Already-completed questions are skipped; failures produce error records
    and the batch continues. Appends happen in dataset order regardless of
    parallelism, so checkpoints and consolidated output are reproducible.
    """
    out_dir = Path(out_dir)
    checkpoint = out_dir / "reports.ndjson"
    writer = persistence.CheckpointWriter(checkpoint, after_append=after_append)
    done = persistence.completed_ids(checkpoint, "report")
    pending = [q for q in dataset if q.id not in done]
    skipped = [q.id for q in dataset if q.id in done]

    start = time.perf_counter()

    def _one(question: Question):
        report, state = run_graph(question, search, controller, summarizer, config)
        return report

    completed: list[str] = []
    failed: list[tuple[str, str]] = []
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        futures = [(q, pool.submit(_one, q)) for q in pending]
        for question, future in futures:
            try:
                report = future.result()
            except QUESTION_ERRORS as exc:
                writer.append(
                    {"kind": "error", "question_id": question.id, "error": str(exc)}
                )
                failed.append((question.id, str(exc)))
                continue
            writer.append({"kind": "report", **report.to_json()})
            completed.append(question.id)
    elapsed = time.perf_counter() - start

    consolidated = out_dir / "reports.json"
    persistence.consolidate(checkpoint, consolidated)
    return BatchResult(
        completed=completed,
        failed=failed,
        skipped=skipped,
        checkpoint=checkpoint,
        consolidated=consolidated,
        elapsed_s=elapsed,
    )


def load_reports(consolidated: str | Path) -> dict[str, DiagnosticReport]:
    """Reports keyed by question id from a consolidated checkpoint."""
    reports = {}
    for record in persistence.load_consolidated(consolidated):
        if record.get("kind") == "report":
            reports[record["question_id"]] = DiagnosticReport.from_json(record)
    return reports
