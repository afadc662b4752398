"""Extract, enumerate paths, reason per path, aggregate."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    AllPathsFailed,
    ClientError,
    ExtractionError,
    FixtureMiss,
    PathReasonError,
    UnknownNode,
)
from .extraction import ParsedExtraction, build_extraction_prompt, load_template, parse_extraction
from .graph import RelationGraph, RelationQuery
from .llm import LLMClient, complete_many
from .paths import DEFAULT_MAX_LEN, DEFAULT_MAX_PATHS, ReasoningPath, find_paths, format_path
from .reasoners import aggregate_answers, parse_bracketed_answer, path_to_text, solve_path
from .reasoners.kinship import KinshipRuleTable
from .vocab import SYMBOLIC_DOMAINS

MODES = ("symbolic", "llm")


@dataclass
class PathOutcome:
    path: ReasoningPath
    answer: frozenset[str] = frozenset()
    error: str | None = None


@dataclass
class PipelineOutcome:
    """Everything needed to re-derive a prediction offline."""

    predicted: frozenset[str] = frozenset()
    status: str = "ok"
    detail: str = ""
    paths: list[PathOutcome] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    query_form: str = ""

    def diagnostics(self) -> dict:
        out: dict = {
            "status": self.status,
            "paths": [format_path(p.path) for p in self.paths],
            "per_path": [sorted(p.answer) if p.error is None else {"error": p.error} for p in self.paths],
        }
        if self.detail:
            out["detail"] = self.detail
        if self.warnings:
            out["warnings"] = list(self.warnings)
        if self.query_form:
            out["query_form"] = self.query_form
        return out


def client_status(exc: ClientError) -> str:
    return "fixture-miss" if isinstance(exc, FixtureMiss) else "client-error"


def extract_graph(domain: str, story: str, client: LLMClient) -> ParsedExtraction:
    """One LLM call plus parsing; raises ClientError or ExtractionError."""
    exchange = client.complete(build_extraction_prompt(domain, story))
    return parse_extraction(exchange.completion, domain)


def reason_over_graph(
    graph: RelationGraph,
    query: RelationQuery,
    mode: str = "symbolic",
    *,
    story: str = "",
    client: LLMClient | None = None,
    max_len: int = DEFAULT_MAX_LEN,
    max_paths: int = DEFAULT_MAX_PATHS,
    table: KinshipRuleTable | None = None,
) -> PipelineOutcome:
    """Answer ``query`` from every reasoning path in ``graph``; never raises for data problems."""
    domain = graph.domain
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "symbolic" and domain not in SYMBOLIC_DOMAINS:
        raise ValueError(f"symbolic mode supports {SYMBOLIC_DOMAINS}, not {domain!r}")
    out = PipelineOutcome()
    try:
        paths = find_paths(graph, query, max_len=max_len, max_paths=max_paths)
    except UnknownNode as exc:
        out.status, out.detail = "disconnected-query", str(exc)
        return out
    if not paths:
        out.status = "disconnected-query"
        return out
    if mode == "symbolic":
        genders = graph.genders()
        for path in paths:
            try:
                out.paths.append(PathOutcome(path, solve_path(path, domain, genders, table)))
            except PathReasonError as exc:
                out.paths.append(PathOutcome(path, error=f"{type(exc).__name__}: {exc}"))
    else:
        if client is None:
            raise ValueError("llm mode needs a client")
        template = load_template("reason", domain)
        prompts = [template.render(input=story, path=path_to_text(p, domain, graph)) for p in paths]
        for path, result in zip(paths, complete_many(client, prompts)):
            if isinstance(result, ClientError):
                out.paths.append(PathOutcome(path, error=f"{client_status(result)}: {result}"))
                continue
            try:
                answer = parse_bracketed_answer(result.completion, graph.vocabulary)
                out.paths.append(PathOutcome(path, answer))
            except PathReasonError as exc:
                out.paths.append(PathOutcome(path, error=f"{type(exc).__name__}: {exc}"))
    try:
        answers = aggregate_answers([p.answer if p.error is None else None for p in out.paths])
        out.predicted = answers.relations
    except AllPathsFailed:
        out.status = "all-paths-failed"
    return out


def run_story(
    domain: str,
    story: str,
    client: LLMClient,
    mode: str = "symbolic",
    max_len: int = DEFAULT_MAX_LEN,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> PipelineOutcome:
    """Full pipeline from a story: extraction, path enumeration, per-path reasoning."""
    try:
        parsed = extract_graph(domain, story, client)
    except ClientError as exc:
        return PipelineOutcome(status=client_status(exc), detail=str(exc))
    except ExtractionError as exc:
        return PipelineOutcome(status="extraction-failed", detail=f"{type(exc).__name__}: {exc}")
    out = reason_over_graph(
        parsed.to_graph(), parsed.query, mode, story=story, client=client, max_len=max_len, max_paths=max_paths
    )
    out.warnings = parsed.warnings
    out.query_form = parsed.query_form
    return out
