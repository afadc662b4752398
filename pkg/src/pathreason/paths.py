"""Reasoning-path enumeration between the two queried entities."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidGold, InvalidPath, UnknownNode
from .graph import Orientation, RelationEdge, RelationGraph, RelationQuery

DEFAULT_MAX_LEN = 12
DEFAULT_MAX_PATHS = 64


@dataclass(frozen=True)
class PathStep:
    edge: RelationEdge
    orientation: Orientation

    @property
    def start(self) -> str:
        return self.edge.head if self.orientation == "forward" else self.edge.tail

    @property
    def end(self) -> str:
        return self.edge.tail if self.orientation == "forward" else self.edge.head


@dataclass(frozen=True)
class ReasoningPath:
    steps: tuple[PathStep, ...]
    source: str
    target: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        validate_path(self)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def nodes(self) -> tuple[str, ...]:
        return (self.source,) + tuple(step.end for step in self.steps)

    @property
    def edges(self) -> tuple[RelationEdge, ...]:
        return tuple(step.edge for step in self.steps)

    def reversed(self) -> ReasoningPath:
        flipped = tuple(
            PathStep(s.edge, "backward" if s.orientation == "forward" else "forward")
            for s in reversed(self.steps)
        )
        return ReasoningPath(flipped, self.target, self.source)

    def __str__(self) -> str:
        return format_path(self)


def validate_path(path: ReasoningPath) -> None:
    if not path.steps:
        raise InvalidPath("a reasoning path needs at least one step")
    current = path.source
    seen = {current}
    for i, step in enumerate(path.steps):
        if step.orientation not in ("forward", "backward"):
            raise InvalidPath(f"step {i}: bad orientation {step.orientation!r}")
        if step.start != current:
            raise InvalidPath(f"step {i} departs {step.start!r}, expected {current!r}")
        current = step.end
        if current in seen:
            raise InvalidPath(f"step {i} revisits node {current!r}")
        seen.add(current)
    if current != path.target:
        raise InvalidPath(f"path ends at {current!r}, expected {path.target!r}")


def path_from_edges(edges: Sequence[RelationEdge], source: str, target: str) -> ReasoningPath:
    """Orient an edge sequence walking from ``source``; raises InvalidPath if it does not chain."""
    steps = []
    current = source
    for i, edge in enumerate(edges):
        if edge.head == current:
            steps.append(PathStep(edge, "forward"))
            current = edge.tail
        elif edge.tail == current:
            steps.append(PathStep(edge, "backward"))
            current = edge.head
        else:
            raise InvalidPath(f"edge {i} {edge} does not touch {current!r}")
    return ReasoningPath(tuple(steps), source, target)


def format_path(path: ReasoningPath) -> str:
    """Render as ``src -[rel>]- mid -[<rel]- tar``."""
    parts = [path.source]
    for step in path.steps:
        if step.orientation == "forward":
            parts.append(f"-[{step.edge.relation}>]-")
        else:
            parts.append(f"-[<{step.edge.relation}]-")
        parts.append(step.end)
    return " ".join(parts)


def _distances_to(graph: RelationGraph, target: str) -> dict[str, int]:
    dist = {target: 0}
    queue = deque([target])
    while queue:
        node = queue.popleft()
        for edge, orientation in graph.incident_edges(node):
            other = edge.tail if orientation == "forward" else edge.head
            if other not in dist:
                dist[other] = dist[node] + 1
                queue.append(other)
    return dist


def find_paths(
    graph: RelationGraph,
    query: RelationQuery,
    max_len: int = DEFAULT_MAX_LEN,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> list[ReasoningPath]:
    """All simple paths from ``query.source`` to ``query.target`` of at most ``max_len`` edges.

    Edges are walkable in both orientations. Results are ordered by length,
    then by node-id sequence, then by edge position, and cut at ``max_paths``.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    src, tar = query.source, query.target
    for endpoint in (src, tar):
        if endpoint not in graph:
            raise UnknownNode(endpoint)
    if src == tar or max_paths <= 0:
        return []
    dist = _distances_to(graph, tar)
    if src not in dist:
        return []
    index_of = {e.key: i for i, e in enumerate(graph.edges)}
    results: list[ReasoningPath] = []
    # iterative deepening keeps the cut at max_paths cheap on dense graphs
    for length in range(dist[src], max_len + 1):
        found: list[tuple[tuple[str, ...], tuple[int, ...], tuple[PathStep, ...]]] = []
        _dfs(graph, tar, length, dist, [src], {src}, [], found, index_of)
        found.sort(key=lambda item: (item[0], item[1]))
        for nodes, _, steps in found:
            results.append(ReasoningPath(steps, src, tar))
            if len(results) >= max_paths:
                return results
    return results


def _dfs(graph, tar, length, dist, nodes, visited, steps, found, index_of) -> None:
    here = nodes[-1]
    remaining = length - len(steps)
    if here == tar:
        if remaining == 0:
            found.append(
                (tuple(nodes), tuple(index_of[s.edge.key] for s in steps), tuple(steps))
            )
        return
    if remaining <= 0:
        return
    for edge, orientation in graph.incident_edges(here):
        other = edge.tail if orientation == "forward" else edge.head
        if other in visited or dist.get(other, remaining) > remaining - 1:
            continue
        visited.add(other)
        nodes.append(other)
        steps.append(PathStep(edge, orientation))
        _dfs(graph, tar, length, dist, nodes, visited, steps, found, index_of)
        steps.pop()
        nodes.pop()
        visited.discard(other)


def main_chain_of(sample) -> ReasoningPath:
    """Return a gold sample's annotated main chain as a validated ReasoningPath.

    ``sample`` needs ``graph``, ``query`` and either ``main_chain`` (a path) or
    ``main_chain_indices`` (edge positions in ``graph``).
    """
    graph: RelationGraph = sample.graph
    query: RelationQuery = sample.query
    chain = getattr(sample, "main_chain", None)
    try:
        if isinstance(chain, ReasoningPath):
            edges: Iterable[RelationEdge] = chain.edges
        else:
            indices = getattr(sample, "main_chain_indices", None) or chain
            all_edges = graph.edges
            edges = [all_edges[i] for i in indices]
        edges = list(edges)
        for edge in edges:
            if not graph.has_edge(edge):
                raise InvalidGold(f"main-chain edge {edge} missing from graph")
        path = path_from_edges(edges, query.source, query.target)
    except InvalidGold:
        raise
    except (InvalidPath, IndexError, TypeError) as exc:
        raise InvalidGold(str(exc)) from None
    return path
