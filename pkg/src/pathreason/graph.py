"""Entity-relation graphs, queries, and the line-oriented graph file format.

A graph file holds one record per line::

    N <id> gender=<g> age=<a>
    E <head> <relation> <tail>
    Q <src> <tar>

Identifiers containing whitespace or quotes are written as double-quoted
JSON strings. Several graphs may share a file; blocks are separated by a
blank line and may start with an ``S <sample-id> [key=value ...]`` header.
"""

from __future__ import annotations

import json
import re
import shlex
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Literal

from .errors import GraphFormatError, UnknownNode
from .vocab import RelationVocabulary, get_vocabulary

Gender = Literal["male", "female", "unknown"]
Age = Literal["older", "younger", "unknown"]
Orientation = Literal["forward", "backward"]

GENDERS = ("male", "female", "unknown")
AGES = ("older", "younger", "unknown")


@dataclass(frozen=True)
class EntityNode:
    id: str
    display_name: str = ""
    gender: Gender = "unknown"
    relative_age: Age = "unknown"
    auto_created: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("node id must be non-empty")
        if self.gender not in GENDERS:
            raise ValueError(f"bad gender {self.gender!r}")
        if self.relative_age not in AGES:
            raise ValueError(f"bad relative age {self.relative_age!r}")
        if not self.display_name:
            object.__setattr__(self, "display_name", self.id)


@dataclass(frozen=True)
class RelationEdge:
    """``(head, relation, tail)``: the tail is the head's ``relation``.

    For spatial domains this reads "head is ``relation`` of tail".
    ``age`` carries the optional seniority tag from kinship extraction.
    """

    head: str
    relation: str
    tail: str
    age: Age | None = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.head, self.relation, self.tail)

    def __str__(self) -> str:
        return f"({self.head}, {self.relation}, {self.tail})"


@dataclass(frozen=True)
class RelationQuery:
    source: str
    target: str


class RelationGraph:
    """Nodes plus a duplicate-free edge list over one relation vocabulary.

    Edge order is insertion order and edge indices are stable, so main
    chains can refer to edges by position.
    """

    def __init__(
        self,
        vocabulary: RelationVocabulary | str,
        nodes: Iterable[EntityNode] = (),
        edges: Iterable[RelationEdge] = (),
    ) -> None:
        if isinstance(vocabulary, str):
            vocabulary = get_vocabulary(vocabulary)
        self.vocabulary = vocabulary
        self._nodes: dict[str, EntityNode] = {}
        self._edges: list[RelationEdge] = []
        self._keys: set[tuple[str, str, str]] = set()
        self._incident: dict[str, list[int]] = {}
        for node in nodes:
            self.add_node(node)
        for edge in edges:
            self.add_edge(edge)

    @property
    def domain(self) -> str:
        return self.vocabulary.domain

    @property
    def nodes(self) -> dict[str, EntityNode]:
        return dict(self._nodes)

    @property
    def edges(self) -> list[RelationEdge]:
        return list(self._edges)

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._nodes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationGraph):
            return NotImplemented
        return (
            self.domain == other.domain
            and list(self._nodes.values()) == list(other._nodes.values())
            and self._edges == other._edges
        )

    def __repr__(self) -> str:
        return f"RelationGraph({self.domain!r}, {len(self._nodes)} nodes, {len(self._edges)} edges)"

    def node(self, node_id: str) -> EntityNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def gender(self, node_id: str) -> Gender:
        node = self._nodes.get(node_id)
        return node.gender if node else "unknown"

    def genders(self) -> dict[str, Gender]:
        return {nid: n.gender for nid, n in self._nodes.items()}

    def add_node(self, node: EntityNode) -> EntityNode:
        """Insert ``node``; an existing node keeps its id and gains any known attributes."""
        old = self._nodes.get(node.id)
        if old is None:
            self._nodes[node.id] = node
            self._incident[node.id] = []
            return node
        merged = replace(
            old,
            gender=old.gender if old.gender != "unknown" else node.gender,
            relative_age=old.relative_age if old.relative_age != "unknown" else node.relative_age,
            auto_created=old.auto_created and node.auto_created,
        )
        self._nodes[node.id] = merged
        return merged

    def ensure_node(self, node_id: str) -> EntityNode:
        """Return the node, creating a flagged placeholder when absent."""
        if node_id not in self._nodes:
            self.add_node(EntityNode(node_id, auto_created=True))
        return self._nodes[node_id]

    def add_edge(self, edge: RelationEdge) -> RelationGraph:
        """Add ``edge`` (validating its label); exact duplicates are ignored."""
        relation = self.vocabulary.canonical(edge.relation)
        if relation != edge.relation:
            edge = replace(edge, relation=relation)
        if edge.key in self._keys:
            return self
        for endpoint in (edge.head, edge.tail):
            if endpoint not in self._nodes:
                self.add_node(EntityNode(endpoint))
        index = len(self._edges)
        self._edges.append(edge)
        self._keys.add(edge.key)
        self._incident[edge.head].append(index)
        if edge.tail != edge.head:
            self._incident[edge.tail].append(index)
        return self

    def has_edge(self, edge: RelationEdge | tuple[str, str, str]) -> bool:
        key = edge.key if isinstance(edge, RelationEdge) else tuple(edge)
        return key in self._keys

    def edge_index(self, edge: RelationEdge) -> int:
        for i, e in enumerate(self._edges):
            if e.key == edge.key:
                return i
        raise KeyError(str(edge))

    def replace_edge(self, index: int, edge: RelationEdge) -> RelationGraph:
        """Swap the edge at ``index`` in place, keeping every other index stable."""
        relation = self.vocabulary.canonical(edge.relation)
        edge = replace(edge, relation=relation)
        old = self._edges[index]
        if edge.key != old.key and edge.key in self._keys:
            raise ValueError(f"edge {edge} already present")
        for endpoint in (edge.head, edge.tail):
            if endpoint not in self._nodes:
                self.add_node(EntityNode(endpoint))
        self._keys.discard(old.key)
        for endpoint in {old.head, old.tail}:
            self._incident[endpoint].remove(index)
        self._edges[index] = edge
        self._keys.add(edge.key)
        for endpoint in {edge.head, edge.tail}:
            bucket = self._incident[endpoint]
            bucket.append(index)
            bucket.sort()
        return self

    def incident_edges(self, node_id: str) -> list[tuple[RelationEdge, Orientation]]:
        """Edges touching ``node_id`` in insertion order, oriented away from it."""
        if node_id not in self._nodes:
            raise UnknownNode(node_id)
        out: list[tuple[RelationEdge, Orientation]] = []
        for index in self._incident[node_id]:
            edge = self._edges[index]
            if edge.head == node_id:
                out.append((edge, "forward"))
            if edge.tail == node_id:
                out.append((edge, "backward"))
        return out

    def incident_indices(self, node_id: str) -> list[int]:
        return list(self._incident[node_id])

    def copy(self) -> RelationGraph:
        return RelationGraph(self.vocabulary, self._nodes.values(), self._edges)


def add_edge(graph: RelationGraph, edge: RelationEdge) -> RelationGraph:
    """Return a copy of ``graph`` that contains ``edge`` exactly once."""
    return graph.copy().add_edge(edge)


def incident_edges(graph: RelationGraph, node_id: str) -> list[tuple[RelationEdge, Orientation]]:
    return graph.incident_edges(node_id)


# ---------------------------------------------------------------- file format

_BARE = re.compile(r'^[^\s"\'\\=#]+$')


def quote_token(token: str) -> str:
    if _BARE.match(token):
        return token
    return json.dumps(token, ensure_ascii=False)


def _split(line: str, lineno: int) -> list[str]:
    try:
        return shlex.split(line, comments=False, posix=True)
    except ValueError as exc:
        raise GraphFormatError(str(exc), lineno) from None


@dataclass
class GraphRecord:
    """One block of a graph file: graph, optional query, and extra lines."""

    graph: RelationGraph
    query: RelationQuery | None = None
    sample_id: str | None = None
    header: dict[str, str] = field(default_factory=dict)
    main_chain: list[int] | None = None
    answers: list[str] | None = None


def format_graph(
    graph: RelationGraph,
    query: RelationQuery | None = None,
    *,
    sample_id: str | None = None,
    header: dict[str, str] | None = None,
    main_chain: Iterable[int] | None = None,
    answers: Iterable[str] | None = None,
) -> str:
    lines: list[str] = []
    if sample_id is not None:
        extra = "".join(f" {k}={quote_token(v)}" for k, v in (header or {}).items())
        lines.append(f"S {quote_token(sample_id)}{extra}")
    lines.append(f"D {graph.domain}")
    for node in graph.nodes.values():
        parts = [f"N {quote_token(node.id)} gender={node.gender} age={node.relative_age}"]
        if node.display_name != node.id:
            parts.append(f"name={quote_token(node.display_name)}")
        if node.auto_created:
            parts.append("auto=1")
        lines.append(" ".join(parts))
    for edge in graph.edges:
        line = f"E {quote_token(edge.head)} {quote_token(edge.relation)} {quote_token(edge.tail)}"
        if edge.age is not None:
            line += f" age={edge.age}"
        lines.append(line)
    if query is not None:
        lines.append(f"Q {quote_token(query.source)} {quote_token(query.target)}")
    if main_chain is not None:
        lines.append("M " + " ".join(str(i) for i in main_chain))
    if answers is not None:
        lines.append("A " + ",".join(answers))
    return "\n".join(lines) + "\n"


def _attrs(tokens: list[str], lineno: int) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise GraphFormatError(f"expected key=value, got {tok!r}", lineno)
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def iter_graph_records(text: str, default_domain: str | None = None) -> Iterator[GraphRecord]:
    """Parse every block of a graph file."""
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            if block:
                yield _parse_block(block, default_domain)
                block = []
            continue
        block.append((lineno, line))
    if block:
        yield _parse_block(block, default_domain)


def _parse_block(block: list[tuple[int, str]], default_domain: str | None) -> GraphRecord:
    domain = default_domain
    graph: RelationGraph | None = None
    record = GraphRecord(graph=None)  # type: ignore[arg-type]

    def need_graph(lineno: int) -> RelationGraph:
        nonlocal graph
        if graph is None:
            if domain is None:
                raise GraphFormatError("domain unknown: add a 'D <domain>' line", lineno)
            graph = RelationGraph(domain)
        return graph

    for lineno, line in block:
        tokens = _split(line, lineno)
        kind, args = tokens[0], tokens[1:]
        try:
            if kind == "S":
                record.sample_id = args[0]
                record.header = _attrs(args[1:], lineno)
            elif kind == "D":
                if graph is not None:
                    raise GraphFormatError("'D' line must precede nodes and edges", lineno)
                domain = args[0]
                get_vocabulary(domain)
            elif kind == "N":
                attrs = _attrs(args[1:], lineno)
                need_graph(lineno).add_node(
                    EntityNode(
                        args[0],
                        display_name=attrs.get("name", ""),
                        gender=attrs.get("gender", "unknown"),  # type: ignore[arg-type]
                        relative_age=attrs.get("age", "unknown"),  # type: ignore[arg-type]
                        auto_created=attrs.get("auto") == "1",
                    )
                )
            elif kind == "E":
                attrs = _attrs(args[3:], lineno)
                need_graph(lineno).add_edge(
                    RelationEdge(args[0], args[1], args[2], age=attrs.get("age"))  # type: ignore[arg-type]
                )
            elif kind == "Q":
                record.query = RelationQuery(args[0], args[1])
            elif kind == "M":
                record.main_chain = [int(a) for a in args]
            elif kind == "A":
                record.answers = [a.strip() for a in " ".join(args).split(",") if a.strip()]
            else:
                raise GraphFormatError(f"unknown record type {kind!r}", lineno)
        except GraphFormatError:
            raise
        except (IndexError, ValueError) as exc:
            raise GraphFormatError(f"malformed {kind!r} line: {exc}", lineno) from None
    record.graph = need_graph(block[0][0])
    if record.query is not None:
        for endpoint in (record.query.source, record.query.target):
            record.graph.ensure_node(endpoint)
    return record


def parse_graph(text: str, default_domain: str | None = None) -> GraphRecord:
    """Parse a file holding exactly one graph block."""
    records = list(iter_graph_records(text, default_domain))
    if len(records) != 1:
        raise GraphFormatError(f"expected one graph, found {len(records)}")
    return records[0]
