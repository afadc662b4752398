"""Extraction prompts and the RELATIONSHIP/QUERY output parser."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import (
    EmptyExtraction,
    MalformedTag,
    NoQueryFound,
    UnknownRelationLabel,
    UnsupportedDomain,
)
from .graph import AGES, GENDERS, EntityNode, RelationEdge, RelationGraph, RelationQuery
from .vocab import DOMAINS, get_vocabulary

PROMPT_KINDS = ("extract", "reason", "io", "few_shot", "cot")
STRATEGIES = ("sectional_markup", "syntactic_delimiters", "predefined_categories", "decomposition")


@dataclass(frozen=True)
class PromptTemplate:
    domain: str
    kind: str
    template_text: str
    strategy_tags: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return f"{self.kind}_{self.domain}"

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.template_text.encode("utf-8")).hexdigest()

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(p for p in ("{input}", "{path}") if p in self.template_text)

    def render(self, **values: str) -> str:
        # plain replacement: templates contain literal braces elsewhere
        text = self.template_text
        for key, value in values.items():
            text = text.replace("{" + key + "}", value)
        return text


def _strategy_tags(text: str) -> tuple[str, ...]:
    tags = []
    if re.search(r"(?m)^#+ ", text):
        tags.append("sectional_markup")
    if "[(" in text or "[FILL_IN]" in text:
        tags.append("syntactic_delimiters")
    if re.search(r"(?i)possible relations|predefined|relation_query|could only be one of", text):
        tags.append("predefined_categories")
    if "RELATIONSHIP" in text and "QUERY" in text:
        tags.append("decomposition")
    return tuple(tags)


@lru_cache(maxsize=None)
def load_template(kind: str, domain: str) -> PromptTemplate:
    if domain not in DOMAINS:
        raise UnsupportedDomain(f"unsupported domain {domain!r}; expected one of {DOMAINS}")
    if kind not in PROMPT_KINDS:
        raise ValueError(f"unknown prompt kind {kind!r}; expected one of {PROMPT_KINDS}")
    res = resources.files("pathreason").joinpath(f"assets/prompts/{kind}_{domain}.txt")
    text = res.read_text("utf-8")
    return PromptTemplate(domain, kind, text, _strategy_tags(text))


def build_extraction_prompt(domain: str, story: str) -> str:
    if not story or not story.strip():
        raise ValueError("story must be non-empty")
    return load_template("extract", domain).render(input=story)


def asset_hashes() -> dict[str, str]:
    """sha256 of every shipped asset, keyed by path relative to the assets directory."""
    root = resources.files("pathreason").joinpath("assets")
    out = {}
    for sub in ("prompts",):
        for res in sorted(root.joinpath(sub).iterdir(), key=lambda r: r.name):
            if res.name.endswith(".txt"):
                out[f"{sub}/{res.name}"] = hashlib.sha256(res.read_bytes()).hexdigest()
    out["kinship_rules.txt"] = hashlib.sha256(root.joinpath("kinship_rules.txt").read_bytes()).hexdigest()
    return out


def load_manifest() -> dict[str, str]:
    res = resources.files("pathreason").joinpath("assets/manifest.json")
    return json.loads(res.read_text("utf-8"))["sha256"]


# ---------------------------------------------------------------- parsing

_TAG = re.compile(r"^(?P<name>[^<>]*?)\s*(?:<\s*(?P<tag>[^<>]*?)\s*>)?$")


def _split_tag(token: str) -> tuple[str, str | None]:
    token = token.strip().strip("'\"`").strip()
    if token.count("<") != token.count(">") or token.count("<") > 1:
        raise MalformedTag(f"unbalanced angle brackets in {token!r}")
    m = _TAG.match(token)
    if m is None:
        raise MalformedTag(f"malformed tag in {token!r}")
    name = m.group("name").strip().strip("'\"").strip()
    tag = m.group("tag")
    return name, (tag.strip().lower() if tag is not None else None)


def parse_entity_tag(token: str) -> EntityNode:
    """``Name`` or ``Name<gender>`` to a node; a missing tag means unknown gender."""
    name, tag = _split_tag(token)
    if not name:
        raise MalformedTag(f"empty entity name in {token!r}")
    if tag is None or tag == "":
        return EntityNode(name)
    if tag not in GENDERS:
        raise MalformedTag(f"unknown gender tag <{tag}> in {token!r}")
    return EntityNode(name, gender=tag)  # type: ignore[arg-type]


def _parse_relation_token(token: str) -> tuple[str, str | None]:
    name, tag = _split_tag(token)
    if tag is not None and tag not in AGES:
        raise MalformedTag(f"unknown age tag <{tag}> in {token!r}")
    return name, tag


@dataclass
class ParsedExtraction:
    triplets: list[RelationEdge]
    query: RelationQuery
    nodes: dict[str, EntityNode] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    domain: str = ""
    query_form: str = ""  # "pair", "triple" or "triple+gender"

    def to_graph(self) -> RelationGraph:
        """Graph of the triplets; query endpoints no triplet mentions become flagged placeholders."""
        used = {n for e in self.triplets for n in (e.head, e.tail)}
        graph = RelationGraph(self.domain, [n for n in self.nodes.values() if n.id in used])
        for edge in self.triplets:
            graph.add_edge(edge)
        for endpoint in (self.query.source, self.query.target):
            if endpoint not in graph:
                node = self.nodes.get(endpoint)
                gender = node.gender if node else "unknown"
                graph.add_node(EntityNode(endpoint, gender=gender, auto_created=True))
        return graph


_HEADER = re.compile(r"(?im)^[\s\-\*#>]*\**\s*(RELATIONSHIPS?|QUERY|QUERIES)\s*\**\s*:[ \t]*\**")
_GROUP = re.compile(r"\(([^()]*)\)")
_NOISE_LINE = re.compile(r"^[\s\[\](),.;:…。、，'\"`-]*$")


def _sections(raw: str) -> tuple[list[str], list[str]]:
    rel_parts, query_parts = [], []
    matches = list(_HEADER.finditer(raw))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        body = raw[m.end() : end]
        (query_parts if m.group(1).upper().startswith("QUER") else rel_parts).append(body)
    return rel_parts, query_parts


def _fields(group: str) -> list[str]:
    return [f.strip() for f in re.split(r"[,，]", group)]


def parse_extraction(raw: str, domain: str) -> ParsedExtraction:
    """Parse an extraction completion into triplets and the query.

    Total over arbitrary text: problems in individual lines become warnings;
    only a missing query or an empty triplet list raise.
    """
    vocab = get_vocabulary(domain)
    raw = raw if isinstance(raw, str) else ""
    rel_parts, query_parts = _sections(raw)
    warnings: list[str] = []
    nodes: dict[str, EntityNode] = {}
    triplets: list[RelationEdge] = []

    def note_node(node: EntityNode) -> None:
        old = nodes.get(node.id)
        if old is None or old.gender == "unknown":
            nodes[node.id] = node if old is None or node.gender != "unknown" else old
        elif node.gender not in ("unknown", old.gender):
            warnings.append(f"conflicting gender tags for {node.id!r}; keeping {old.gender}")

    for body in rel_parts:
        for line in body.splitlines():
            groups = _GROUP.findall(line)
            if not groups:
                if line.strip() and not _NOISE_LINE.match(line):
                    warnings.append(f"unparsed line: {line.strip()!r}")
                elif "..." in line or "…" in line:
                    warnings.append(f"unparsed line: {line.strip()!r}")
                continue
            for group in groups:
                parts = _fields(group)
                if len(parts) != 3:
                    warnings.append(f"expected a triplet, got ({group})")
                    continue
                try:
                    head = parse_entity_tag(parts[0])
                    tail = parse_entity_tag(parts[2])
                    rel, age = _parse_relation_token(parts[1])
                    rel = vocab.canonical(rel)
                except (MalformedTag, UnknownRelationLabel) as exc:
                    warnings.append(f"skipped ({group}): {exc}")
                    continue
                note_node(head)
                note_node(tail)
                triplets.append(RelationEdge(head.id, rel, tail.id, age=age))  # type: ignore[arg-type]

    query = None
    query_form = ""
    for body in query_parts:
        for group in _GROUP.findall(body):
            parts = _fields(group)
            if len(parts) == 3 and _split_tag_safe(parts[1]) == "relation_query":
                parts = [parts[0], parts[2]]
                form = "triple"
            elif len(parts) == 2:
                form = "pair"
            else:
                warnings.append(f"unparsed query ({group})")
                continue
            try:
                a, b = parse_entity_tag(parts[0]), parse_entity_tag(parts[1])
            except MalformedTag as exc:
                warnings.append(f"unparsed query ({group}): {exc}")
                continue
            if form == "triple" and (a.gender != "unknown" or b.gender != "unknown"):
                form = "triple+gender"
            note_node(a)
            note_node(b)
            query, query_form = RelationQuery(a.id, b.id), form
            break
        if query is not None:
            break
    if query is None:
        raise NoQueryFound("no parseable QUERY section")
    if not triplets:
        raise EmptyExtraction("no triplet could be parsed from the RELATIONSHIP section")
    used = {n for e in triplets for n in (e.head, e.tail)}
    for endpoint in dict.fromkeys((query.source, query.target)):
        if endpoint not in used:
            warnings.append(f"query entity {endpoint!r} appears in no triplet")
    return ParsedExtraction(triplets, query, nodes, warnings, domain, query_form)


def _split_tag_safe(token: str) -> str | None:
    try:
        return _split_tag(token)[0].lower()
    except MalformedTag:
        return None


def format_triplets(parsed: ParsedExtraction) -> str:
    """Serialize back to the bracket grammar (inverse of parse_extraction)."""

    def ent(node_id: str) -> str:
        node = parsed.nodes.get(node_id)
        return f"{node_id}<{node.gender}>" if node and node.gender != "unknown" else node_id

    lines = ["RELATIONSHIP:"]
    for e in parsed.triplets:
        rel = f"{e.relation}<{e.age}>" if e.age else e.relation
        lines.append(f"[({ent(e.head)},{rel},{ent(e.tail)})]")
    lines.append("QUERY:")
    lines.append(f"[({ent(parsed.query.source)},{ent(parsed.query.target)})]")
    return "\n".join(lines) + "\n"
