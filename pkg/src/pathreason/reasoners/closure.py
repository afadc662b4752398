"""Whole-graph baseline: one closure over every extracted fact at once.

Unlike the per-path reasoners, a single contradictory fact anywhere in the
graph poisons the answer, which is the failure mode this baseline exists
to exhibit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..errors import UnsupportedDomain
from ..graph import RelationGraph, RelationQuery
from ..vocab import CLUTRR, kin_gender
from .kinship import KinshipRuleTable, default_table
from .spatial import SpatialOffset, label_of, offset_of


@dataclass(frozen=True)
class Conflict:
    """The closure derived incompatible facts about ``pair``."""

    pair: tuple[str, str]
    relations: tuple[str, ...]

    def __bool__(self) -> bool:
        return False


def whole_graph_solve(
    graph: RelationGraph, query: RelationQuery, table: KinshipRuleTable | None = None
) -> frozenset[str] | Conflict:
    """Relation(s) of the query pair under the closure of all edges, or Conflict.

    An empty set means the closure says nothing about the pair.
    """
    if graph.domain == "stepgame":
        return _spatial_closure(graph, query)
    if graph.domain == "clutrr":
        return _kinship_closure(graph, query, table or default_table())
    raise UnsupportedDomain(f"no whole-graph solver for {graph.domain!r}")


def _spatial_closure(graph: RelationGraph, query: RelationQuery) -> frozenset[str] | Conflict:
    # exact grid positions per component; any edge disagreeing with them is a contradiction
    pos: dict[str, SpatialOffset] = {}
    for root in graph.nodes:
        if root in pos:
            continue
        pos[root] = SpatialOffset(0, 0)
        queue = deque([root])
        while queue:
            here = queue.popleft()
            for edge, orientation in graph.incident_edges(here):
                delta = offset_of(edge.relation)  # pos(head) - pos(tail)
                if orientation == "forward":
                    other, want = edge.tail, pos[here] + -delta
                else:
                    other, want = edge.head, pos[here] + delta
                if other not in pos:
                    pos[other] = want
                    queue.append(other)
                elif pos[other] != want:
                    return Conflict((edge.head, edge.tail), (edge.relation,))
    src, tar = query.source, query.target
    if src not in pos or tar not in pos or not _connected(graph, src, tar):
        return frozenset()
    return frozenset({label_of(SpatialOffset(pos[src].dx - pos[tar].dx, pos[src].dy - pos[tar].dy))})


def _connected(graph: RelationGraph, a: str, b: str) -> bool:
    seen, queue = {a}, deque([a])
    while queue:
        here = queue.popleft()
        if here == b:
            return True
        for edge, orientation in graph.incident_edges(here):
            other = edge.tail if orientation == "forward" else edge.head
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return False


def _kinship_closure(
    graph: RelationGraph, query: RelationQuery, table: KinshipRuleTable
) -> frozenset[str] | Conflict:
    genders = graph.genders()
    facts: dict[tuple[str, str], str] = {}  # (x, y) -> r  means "y is x's r"
    out_of: dict[str, set[str]] = {}
    into: dict[str, set[str]] = {}
    queue: deque[tuple[str, str]] = deque()

    def assert_fact(x: str, y: str, rel: str) -> Conflict | None:
        known = genders.get(y, "unknown")
        if known != "unknown" and known != kin_gender(rel):
            return Conflict((x, y), (rel,))
        old = facts.get((x, y))
        if old is not None:
            return None if old == rel else Conflict((x, y), tuple(sorted((old, rel))))
        facts[(x, y)] = rel
        out_of.setdefault(x, set()).add(y)
        into.setdefault(y, set()).add(x)
        queue.append((x, y))
        return None

    for edge in graph.edges:
        rel = CLUTRR.canonical(edge.relation)
        conflict = assert_fact(edge.head, edge.tail, rel)
        if conflict is not None:
            return conflict
        g = genders.get(edge.head, "unknown")
        if g != "unknown":
            (inv,) = table.inverse(rel, g)
            conflict = assert_fact(edge.tail, edge.head, inv)
            if conflict is not None:
                return conflict

    def derive(x: str, y: str, z: str) -> Conflict | None:
        if x == z:
            return None
        entry = table.lookup(facts[(x, y)], facts[(y, z)])
        if entry is None or not entry.complete or len(entry.results) != 1:
            return None
        (rel,) = entry.results
        return assert_fact(x, z, rel)

    while queue:
        x, y = queue.popleft()
        for z in list(out_of.get(y, ())):
            conflict = derive(x, y, z)
            if conflict is not None:
                return conflict
        for w in list(into.get(x, ())):
            conflict = derive(w, x, y)
            if conflict is not None:
                return conflict
    rel = facts.get((query.source, query.target))
    return frozenset({rel}) if rel is not None else frozenset()
