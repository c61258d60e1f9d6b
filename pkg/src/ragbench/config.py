"""Run configuration: one JSON file wiring datasets, backends, search, and outputs.

Relative paths inside a config resolve against the config file's directory,
so fixture configs are location-independent. Remote-backend credentials stay
in environment variables named by the config.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .backends import HTTPBackend, ScriptedBackend, ChatBackend
from .orchestrator import OrchestratorConfig
from .websearch import FixtureIndex, SearxClient, SearchClient


class ConfigError(Exception):
    pass


@dataclass
class ModelSpec:
    name: str
    backend: ChatBackend


@dataclass
class RunConfig:
    base_dir: Path
    dataset_path: Path
    strategies: list[str]
    models: list[ModelSpec]
    controller: ChatBackend
    summarizer: ChatBackend
    judge: ChatBackend | None
    search: SearchClient
    output_dir: Path
    parallelism: int = 1
    seed: int = 0
    orchestrator: OrchestratorConfig = field(default_factory=OrchestratorConfig)
    rag_keyword_backend: ChatBackend | None = None
    rag_embed_backend: ChatBackend | None = None
    rag_articles_per_keyword: int = 3
    rag_chunk_size: int = 1000
    rag_chunk_overlap: int = 200
    rag_top_k: int = 3


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def build_backend(spec: dict, base_dir: Path) -> ChatBackend:
    kind = spec.get("type")
    if kind == "scripted":
        script_path = _resolve(base_dir, spec["script"])
        if not script_path.is_file():
            raise ConfigError(f"script file not found: {script_path}")
        rules = json.loads(script_path.read_text(encoding="utf-8"))
        return ScriptedBackend.from_script(
            rules,
            model_id=spec.get("model", "scripted"),
            embed_dim=int(spec.get("embed_dim", 64)),
        )
    if kind == "http":
        base_url = spec.get("base_url")
        if not base_url and spec.get("base_url_env"):
            base_url = os.environ.get(spec["base_url_env"], "")
        if not base_url:
            raise ConfigError(f"http backend needs base_url or base_url_env: {spec}")
        return HTTPBackend(
            model_id=spec.get("model", "default"),
            base_url=base_url,
            api_key_env=spec.get("api_key_env", ""),
            embed_model=spec.get("embed_model", ""),
            timeout_s=float(spec.get("timeout_s", 60.0)),
            retries=int(spec.get("retries", 3)),
            backoff_s=float(spec.get("backoff_s", 1.0)),
        )
    raise ConfigError(f"unknown backend type: {kind!r}")


def build_search(spec: dict, base_dir: Path) -> SearchClient:
    kind = spec.get("type")
    if kind == "fixture":
        pages_dir = _resolve(base_dir, spec["pages_dir"])
        if not pages_dir.is_dir():
            raise ConfigError(f"fixture pages directory not found: {pages_dir}")
        return FixtureIndex(pages_dir)
    if kind == "searx":
        base_url = spec.get("base_url") or os.environ.get(spec.get("base_url_env", ""), "")
        if not base_url:
            raise ConfigError("searx search needs base_url or base_url_env")
        return SearxClient(base_url, timeout_s=float(spec.get("timeout_s", 30.0)))
    raise ConfigError(f"unknown search type: {kind!r}")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    base_dir = path.parent

    dataset_path = _resolve(base_dir, raw.get("dataset", ""))
    if not dataset_path.is_file():
        raise ConfigError(f"dataset file not found: {dataset_path}")

    strategies = raw.get("strategies", ["zero_shot"])
    for strategy in strategies:
        if strategy not in ("zero_shot", "rag", "rar"):
            raise ConfigError(f"unknown strategy: {strategy!r}")

    models = []
    for model_spec in raw.get("models", []):
        if "name" not in model_spec or "backend" not in model_spec:
            raise ConfigError(f"model spec needs name and backend: {model_spec}")
        models.append(
            ModelSpec(name=model_spec["name"], backend=build_backend(model_spec["backend"], base_dir))
        )

    if "controller" not in raw:
        raise ConfigError("config requires a controller backend")
    controller = build_backend(raw["controller"], base_dir)
    summarizer = (
        build_backend(raw["summarizer"], base_dir) if "summarizer" in raw else controller
    )
    judge = build_backend(raw["judge"], base_dir) if "judge" in raw else None

    if "search" not in raw:
        raise ConfigError("config requires a search client")
    search = build_search(raw["search"], base_dir)

    parallelism = int(raw.get("parallelism", 1))
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")

    orch_raw = raw.get("orchestrator", {})
    orchestrator = OrchestratorConfig(
        domain=orch_raw.get("domain", "radiopaedia.org"),
        max_attempts=int(orch_raw.get("max_attempts", 4)),
        adequacy_min_hits=int(orch_raw.get("adequacy_min_hits", 2)),
        max_results=int(orch_raw.get("max_results", 10)),
        stem_feature_count=int(orch_raw.get("stem_feature_count", 2)),
        concurrent_research=bool(orch_raw.get("concurrent_research", True)),
    )

    rag_raw = raw.get("rag", {})
    rag_keyword_backend = (
        build_backend(rag_raw["keyword_backend"], base_dir)
        if "keyword_backend" in rag_raw
        else None
    )
    rag_embed_backend = (
        build_backend(rag_raw["embed_backend"], base_dir) if "embed_backend" in rag_raw else None
    )

    return RunConfig(
        base_dir=base_dir,
        dataset_path=dataset_path,
        strategies=list(strategies),
        models=models,
        controller=controller,
        summarizer=summarizer,
        judge=judge,
        search=search,
        output_dir=_resolve(base_dir, raw.get("output_dir", "out")),
        parallelism=parallelism,
        seed=int(raw.get("seed", 0)),
        orchestrator=orchestrator,
        rag_keyword_backend=rag_keyword_backend,
        rag_embed_backend=rag_embed_backend,
        rag_articles_per_keyword=int(rag_raw.get("articles_per_keyword", 3)),
        rag_chunk_size=int(rag_raw.get("chunk_size", 1000)),
        rag_chunk_overlap=int(rag_raw.get("chunk_overlap", 200)),
        rag_top_k=int(rag_raw.get("top_k", 3)),
    )
