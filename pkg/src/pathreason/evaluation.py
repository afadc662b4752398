"""Datasets, pipeline and baseline runs, the at-least-one accuracy metric, and reports."""

from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import (
    ClientError,
    EmptyResults,
    GraphFormatError,
    NotApplicable,
    PathReasonError,
    SchemaError,
    UnknownRelationLabel,
)
from .extraction import asset_hashes, load_template
from .graph import RelationGraph, RelationQuery
from .llm import LLMClient
from .noise import NOISE_TYPES, GoldSample, NoiseSpec, generate_gold_corpus, inject, inject_n, parse_corpus, substream
from .paths import DEFAULT_MAX_LEN, DEFAULT_MAX_PATHS
from .pipeline import MODES, client_status, reason_over_graph, run_story
from .reasoners import parse_bracketed_answer, whole_graph_solve
from .vocab import get_vocabulary, map_spartun_concept

BASELINE_MODES = ("io", "few_shot", "cot", "cot_sc")
FORMATS = ("jsonl", "csv", "graph-corpus")


@dataclass
class DatasetRecord:
    id: str
    story: str
    gold: frozenset[str]
    domain: str
    hops: int | None = None
    graph: RelationGraph | None = None
    query: RelationQuery | None = None


@dataclass
class EvalResult:
    record_id: str
    predicted: frozenset[str]
    gold: frozenset[str]
    mode: str
    hops: int | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def correct(self) -> bool:
        return bool(self.predicted & self.gold)

    def to_dict(self) -> dict:
        return {
            "id": self.record_id,
            "predicted": sorted(self.predicted),
            "gold": sorted(self.gold),
            "correct": self.correct,
            "hops": self.hops,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class EvalConfig:
    max_len: int = DEFAULT_MAX_LEN
    max_paths: int = DEFAULT_MAX_PATHS
    workers: int = 1
    sc_rounds: int = 5


# ---------------------------------------------------------------- datasets

_STORY_KEYS = ("story", "context", "text", "input")
_QUESTION_KEYS = ("question", "query_text")
_GOLD_KEYS = ("gold", "answer", "answers", "label", "labels", "target")
_HOP_KEYS = ("hops", "k", "num_hops")


def _first(row: dict, keys: Sequence[str]):
    for key in keys:
        if key in row and row[key] not in (None, ""):
            return row[key]
    return None


def _gold_labels(value, domain: str, line: int) -> frozenset[str]:
    if isinstance(value, str):
        text = value.strip()
        if text.startswith("["):
            try:
                value = json.loads(text)
            except json.JSONDecodeError:
                value = text.strip("[]").split(",")
        else:
            value = text.split(",")
    if not isinstance(value, (list, tuple)):
        raise SchemaError(f"gold must be a label or list of labels, got {value!r}", line)
    vocab = get_vocabulary(domain)
    out = set()
    for item in value:
        label = str(item).strip().strip("'\"")
        if not label:
            continue
        try:
            out.add(map_spartun_concept(label) if domain == "spartun" else vocab.canonical(label, answer=True))
        except UnknownRelationLabel as exc:
            raise SchemaError(str(exc), line) from None
    if not out:
        raise SchemaError("empty gold label set", line)
    return frozenset(out)


def _query_pair(value) -> tuple[str, str] | None:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return str(value[0]), str(value[1])
    if isinstance(value, str):
        names = re.findall(r"['\"]([^'\"]+)['\"]", value)
        if len(names) == 2:
            return names[0], names[1]
    return None


def _normalize_row(row: dict, domain: str, line: int, default_id: str) -> DatasetRecord:
    story = _first(row, _STORY_KEYS)
    if not isinstance(story, str) or not story.strip():
        raise SchemaError(f"missing story (one of {_STORY_KEYS})", line)
    gold_value = _first(row, _GOLD_KEYS)
    if gold_value is None:
        raise SchemaError(f"missing gold answer (one of {_GOLD_KEYS})", line)
    story = story.strip()
    if domain == "clutrr":
        # raw CLUTRR tags names as [Name]; the merged form reads as plain prose
        story = re.sub(r"\[([^\[\]]+)\]", r"\1", story)
        pair = _query_pair(row.get("query"))
        if pair is not None and "address" not in story:
            story = f"{story} How should {pair[0]} address {pair[1]}?"
    question = _first(row, _QUESTION_KEYS)
    if isinstance(question, str) and question.strip() and question.strip() not in story:
        story = f"{story} {question.strip()}"
    hops = _first(row, _HOP_KEYS)
    try:
        hops = int(hops) if hops is not None else None
    except (TypeError, ValueError):
        raise SchemaError(f"hops must be an integer, got {hops!r}", line) from None
    rid = row.get("id")
    return DatasetRecord(
        id=str(rid) if rid not in (None, "") else default_id,
        story=story,
        gold=_gold_labels(gold_value, domain, line),
        domain=domain,
        hops=hops,
    )


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".json", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    return "graph-corpus"


def load_dataset(path: str | Path, format: str | None = None, domain: str = "stepgame") -> list[DatasetRecord]:
    get_vocabulary(domain)
    fmt = format or detect_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown dataset format {fmt!r}; expected one of {FORMATS}")
    text = Path(path).read_text(encoding="utf-8")
    return parse_dataset(text, fmt, domain)


def parse_dataset(text: str, format: str, domain: str) -> list[DatasetRecord]:
    records: list[DatasetRecord] = []
    if format == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno) from None
            if not isinstance(row, dict):
                raise SchemaError("each line must be a JSON object", lineno)
            records.append(_normalize_row(row, domain, lineno, f"{lineno}"))
    elif format == "csv":
        reader = csv.DictReader(io.StringIO(text))
        for row in reader:
            lineno = reader.line_num
            records.append(_normalize_row(dict(row), domain, lineno, f"{lineno}"))
    else:
        try:
            samples = parse_corpus(text, domain)
        except (GraphFormatError, UnknownRelationLabel) as exc:
            raise SchemaError(str(exc), getattr(exc, "line", None)) from None
        for s in samples:
            if s.graph.domain != domain:
                raise SchemaError(f"sample {s.sample_id} is {s.graph.domain}, expected {domain}")
            records.append(sample_to_record(s))
    return records


def sample_to_record(sample: GoldSample) -> DatasetRecord:
    return DatasetRecord(
        id=sample.sample_id,
        story="",
        gold=sample.answers,
        domain=sample.graph.domain,
        hops=sample.hops,
        graph=sample.graph,
        query=sample.query,
    )


# ---------------------------------------------------------------- runs

T = TypeVar("T")
R = TypeVar("R")


def _map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_pot(
    records: Sequence[DatasetRecord],
    mode: str = "symbolic",
    client: LLMClient | None = None,
    config: EvalConfig | None = None,
) -> list[EvalResult]:
    """Path-based pipeline over every record; failures score as incorrect with a diagnostic."""
    cfg = config or EvalConfig()
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")

    def one(rec: DatasetRecord) -> EvalResult:
        if rec.graph is not None and rec.query is not None:
            out = reason_over_graph(
                rec.graph, rec.query, mode, story=rec.story, client=client, max_len=cfg.max_len, max_paths=cfg.max_paths
            )
            out.detail = out.detail or "pre-extracted graph"
        else:
            if client is None:
                raise ValueError("records without a graph need an LLM client for extraction")
            out = run_story(rec.domain, rec.story, client, mode, cfg.max_len, cfg.max_paths)
        return EvalResult(rec.id, out.predicted, rec.gold, f"pot-{mode}", rec.hops, out.diagnostics())

    return _map(one, list(records), cfg.workers)


def majority_vote(votes: Sequence[frozenset[str] | None]) -> tuple[frozenset[str], dict]:
    """Most frequent answer set; ties go to the set first seen in the earliest round."""
    valid = [(i, v) for i, v in enumerate(votes) if v]
    if not valid:
        return frozenset(), {"votes": [], "tie_break": False}
    counts = Counter(v for _, v in valid)
    first_seen: dict[frozenset[str], int] = {}
    for i, v in valid:
        first_seen.setdefault(v, i)
    best = max(counts.values())
    leaders = sorted((first_seen[v], v) for v in counts if counts[v] == best)
    winner = leaders[0][1]
    info = {
        "votes": [sorted(v) if v else None for v in votes],
        "tie_break": len(leaders) > 1,
    }
    return winner, info


def run_baseline(
    records: Sequence[DatasetRecord],
    mode: str,
    client: LLMClient,
    config: EvalConfig | None = None,
) -> list[EvalResult]:
    """Direct prompting baselines; ``cot_sc`` samples ``sc_rounds`` CoT answers and votes."""
    cfg = config or EvalConfig()
    if mode not in BASELINE_MODES:
        raise ValueError(f"unknown baseline {mode!r}; expected one of {BASELINE_MODES}")

    def ask(rec: DatasetRecord, round_index: int) -> tuple[frozenset[str] | None, str]:
        template = load_template("cot" if mode == "cot_sc" else mode, rec.domain)
        try:
            exchange = client.complete(template.render(input=rec.story), round_index)
            return parse_bracketed_answer(exchange.completion, rec.domain), "ok"
        except ClientError as exc:
            return None, client_status(exc)
        except PathReasonError:
            return None, "no-answer"

    def one(rec: DatasetRecord) -> EvalResult:
        if mode != "cot_sc":
            answer, status = ask(rec, 0)
            diag = {"status": status if answer else (status if status != "ok" else "no-answer")}
            return EvalResult(rec.id, answer or frozenset(), rec.gold, mode, rec.hops, diag)
        rounds = [ask(rec, r) for r in range(cfg.sc_rounds)]
        winner, info = majority_vote([a for a, _ in rounds])
        info["status"] = "ok" if winner else "no-answer"
        info["round_status"] = [s for _, s in rounds]
        return EvalResult(rec.id, winner, rec.gold, mode, rec.hops, info)

    return _map(one, list(records), cfg.workers)


def accuracy(results: Iterable[EvalResult]) -> float:
    results = list(results)
    if not results:
        raise EmptyResults("accuracy of an empty result list is undefined")
    return sum(r.correct for r in results) / len(results)


# ---------------------------------------------------------------- reports


@dataclass
class Report:
    mode: str
    domain: str
    results: list[EvalResult]
    config: dict = field(default_factory=dict)
    assets: dict = field(default_factory=asset_hashes)

    @property
    def accuracy(self) -> float:
        return accuracy(self.results)

    def per_hops(self) -> dict[str, dict]:
        groups: dict[int, list[EvalResult]] = {}
        for r in self.results:
            if r.hops is not None:
                groups.setdefault(r.hops, []).append(r)
        return {str(k): {"n": len(v), "accuracy": round(accuracy(v), 6)} for k, v in sorted(groups.items())}

    def status_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(r.diagnostics.get("status", "ok") for r in self.results).items()))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "domain": self.domain,
            "n": len(self.results),
            "accuracy": round(self.accuracy, 6),
            "per_hops": self.per_hops(),
            "status": self.status_counts(),
            "assets_sha256": self.assets,
            "config": self.config,
            "results": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [
            f"mode      {self.mode}",
            f"domain    {self.domain}",
            f"records   {len(self.results)}",
            f"accuracy  {self.accuracy:.4f}",
        ]
        hops = self.per_hops()
        if hops:
            lines.append("")
            lines.append(f"{'hops':>6} {'n':>6} {'accuracy':>10}")
            for k, row in hops.items():
                lines.append(f"{k:>6} {row['n']:>6} {row['accuracy']:>10.4f}")
        lines.append("")
        lines.append(f"{'status':<20} {'count':>6}")
        for status, count in self.status_counts().items():
            lines.append(f"{status:<20} {count:>6}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- robustness


def _path_based_correct(sample: GoldSample, cfg: EvalConfig) -> bool:
    out = reason_over_graph(sample.graph, sample.query, "symbolic", max_len=cfg.max_len, max_paths=cfg.max_paths)
    return bool(out.predicted & sample.answers)


def _whole_graph(sample: GoldSample) -> tuple[bool, bool]:
    got = whole_graph_solve(sample.graph, sample.query)
    if not isinstance(got, frozenset):
        return False, True
    return bool(got & sample.answers), False


@dataclass
class RobustnessRow:
    table: str  # "type" or "n"
    key: str
    samples: int
    path_based: float
    whole_graph: float
    whole_graph_conflicts: int
    skipped: int = 0


@dataclass
class RobustnessReport:
    domain: str
    seed: int
    per_type: list[RobustnessRow]
    per_n: list[RobustnessRow]
    config: dict = field(default_factory=dict)
    assets: dict = field(default_factory=asset_hashes)

    def rows(self) -> list[RobustnessRow]:
        return self.per_type + self.per_n

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(asdict(self.per_type[0] if self.per_type else self.per_n[0]))
        writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            d = asdict(row)
            d["path_based"] = f"{row.path_based:.4f}"
            d["whole_graph"] = f"{row.whole_graph:.4f}"
            writer.writerow(d)
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "domain": self.domain,
            "seed": self.seed,
            "per_type": [asdict(r) for r in self.per_type],
            "per_n": [asdict(r) for r in self.per_n],
            "assets_sha256": self.assets,
            "config": self.config,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"robustness study: {self.domain}, seed {self.seed}", ""]
        lines.append(f"{'table':<6} {'key':<4} {'samples':>8} {'path-based':>11} {'whole-graph':>12} {'conflicts':>10}")
        for r in self.rows():
            lines.append(
                f"{r.table:<6} {r.key:<4} {r.samples:>8} {r.path_based:>11.4f} {r.whole_graph:>12.4f} {r.whole_graph_conflicts:>10}"
            )
        return "\n".join(lines) + "\n"


def _score(table: str, key: str, noisy: list[GoldSample], skipped: int, cfg: EvalConfig) -> RobustnessRow:
    pb = [_path_based_correct(s, cfg) for s in noisy]
    wg = [_whole_graph(s) for s in noisy]
    n = len(noisy)
    return RobustnessRow(
        table,
        key,
        n,
        sum(pb) / n if n else 0.0,
        sum(ok for ok, _ in wg) / n if n else 0.0,
        sum(c for _, c in wg),
        skipped,
    )


def run_robustness_study(
    domain: str,
    per_type_count: int = 100,
    n_range: Iterable[int] = range(6),
    seed: int = 0,
    hop_range: tuple[int, int] | None = None,
    types: Sequence[str] = tuple(NOISE_TYPES),
    config: EvalConfig | None = None,
    corpus: list[GoldSample] | None = None,
) -> RobustnessReport:
    """Path-based pipeline against the whole-graph baseline, per noise type and per noise count."""
    cfg = config or EvalConfig()
    hop_range = hop_range or ((2, 6) if domain == "clutrr" else (1, 10))
    gold = corpus if corpus is not None else generate_gold_corpus(domain, per_type_count, hop_range, seed)
    per_type = []
    for code in types:
        noisy, skipped = [], 0
        for s in gold:
            try:
                noisy.append(inject(s, code, substream(seed, "type", code, s.sample_id)))
            except NotApplicable:
                skipped += 1
        per_type.append(_score("type", code, noisy, skipped, cfg))
    per_n = []
    for n in n_range:
        spec = NoiseSpec(tuple(types), n, seed)
        noisy, skipped = [], 0
        for s in gold:
            try:
                noisy.append(inject_n(s, spec))
            except NotApplicable:
                skipped += 1
        per_n.append(_score("n", str(n), noisy, skipped, cfg))
    echo = {
        "domain": domain,
        "per_type_count": per_type_count,
        "hop_range": list(hop_range),
        "types": "".join(types),
        "seed": seed,
        "max_len": cfg.max_len,
        "max_paths": cfg.max_paths,
    }
    return RobustnessReport(domain, seed, per_type, per_n, echo)
