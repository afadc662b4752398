"""Synthetic gold corpora and the seven graph perturbations used in robustness studies.

Perturbations only ever append edges or rewrite edges outside the main
chain, so main-chain edge indices stay valid and gold answers are never
recomputed.
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import GraphFormatError, InvalidGold, NotApplicable
from .genealogy import FEMALE_NAMES, MALE_NAMES, FamilyTree, random_family
from .graph import EntityNode, RelationEdge, RelationGraph, RelationQuery, format_graph, iter_graph_records
from .paths import ReasoningPath, main_chain_of, path_from_edges
from .reasoners import solve_path
from .reasoners.kinship import compose_sets, default_table
from .reasoners.spatial import spatial_solve
from .vocab import CLUTRR_RELATIONS, KIN_GENERATION, STEPGAME, STEPGAME_DIRECTIONS, kin_gender

NOISE_TYPES = {
    "A": "A_flip_irrelevant",
    "B": "B_add_node_edge",
    "C": "C_add_conflict_edges",
    "D": "D_add_irrelevant_edge",
    "E": "E_add_main_edge",
    "F": "F_replace_irrelevant_relation",
    "G": "G_add_disconnected",
}


def noise_code(name: str) -> str:
    """``"C"`` or ``"C_add_conflict_edges"`` to ``"C"``."""
    token = name.strip()
    code = token[:1].upper()
    if code not in NOISE_TYPES or (len(token) > 1 and token.lower() != NOISE_TYPES[code].lower()):
        raise ValueError(f"unknown noise type {name!r}; expected one of {sorted(NOISE_TYPES)}")
    return code


@dataclass
class GoldSample:
    sample_id: str
    graph: RelationGraph
    query: RelationQuery
    main_chain_indices: tuple[int, ...]
    answers: frozenset[str]
    hops: int
    noise: tuple[str, ...] = ()

    @property
    def path(self) -> ReasoningPath:
        return main_chain_of(self)

    @property
    def main_nodes(self) -> frozenset[str]:
        return frozenset(self.path.nodes)

    def copy(self) -> GoldSample:
        return replace(self, graph=self.graph.copy())

    def solve_main_chain(self) -> frozenset[str]:
        return solve_path(self.path, self.graph.domain, self.graph.genders())


@dataclass(frozen=True)
class NoiseSpec:
    types: tuple[str, ...] = tuple(NOISE_TYPES)
    count: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("noise count must be >= 0")
        if not self.types:
            raise ValueError("at least one noise type is required")
        object.__setattr__(self, "types", tuple(noise_code(t) for t in self.types))


def substream(seed: int, *keys: int | str) -> np.random.Generator:
    """Generator for ``(seed, keys...)``; string keys are hashed so order of generation never matters."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            key = int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "little")
        words.append(int(key))
    return np.random.default_rng(np.random.SeedSequence(words))


# ---------------------------------------------------------------- perturbations


def _labels(domain: str) -> tuple[str, ...]:
    return STEPGAME_DIRECTIONS if domain == "stepgame" else CLUTRR_RELATIONS


def _pick(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


def _fresh_node(graph: RelationGraph, rng: np.random.Generator, gender: str = "unknown") -> EntityNode:
    taken = set(graph.nodes)
    if graph.domain == "stepgame":
        free = [c for c in string.ascii_uppercase if c not in taken]
        if free:
            return EntityNode(_pick(rng, free))
        i = 1
        while f"N{i}" in taken:
            i += 1
        return EntityNode(f"N{i}")
    if gender == "unknown":
        gender = _pick(rng, ("male", "female"))
    pool = MALE_NAMES if gender == "male" else FEMALE_NAMES
    free = [n for n in pool if n not in taken]
    if free:
        return EntityNode(_pick(rng, free), gender=gender)  # type: ignore[arg-type]
    i = 1
    while f"Person{i}" in taken:
        i += 1
    return EntityNode(f"Person{i}", gender=gender)  # type: ignore[arg-type]


def _tail_gender(graph: RelationGraph, relation: str) -> str:
    return kin_gender(relation) if graph.domain == "clutrr" else "unknown"


def _add_new_edge(graph: RelationGraph, edge: RelationEdge) -> None:
    if graph.has_edge(edge):
        raise NotApplicable(f"edge {edge} already present")
    graph.add_edge(edge)


def _irrelevant_edges(sample: GoldSample) -> list[int]:
    main = set(sample.main_chain_indices)
    return [i for i in range(len(sample.graph.edges)) if i not in main]


def _irrelevant_nodes(sample: GoldSample) -> list[str]:
    main = sample.main_nodes
    return [n for n in sample.graph.nodes if n not in main]


def _flip(sample: GoldSample, rng: np.random.Generator) -> None:
    candidates = _irrelevant_edges(sample)
    graph = sample.graph
    candidates = [
        i for i in candidates
        if graph.edges[i].head != graph.edges[i].tail
        and not graph.has_edge((graph.edges[i].tail, graph.edges[i].relation, graph.edges[i].head))
    ]
    if not candidates:
        raise NotApplicable("no irrelevant edge to flip")
    index = _pick(rng, candidates)
    old = graph.edges[index]
    graph.replace_edge(index, RelationEdge(old.tail, old.relation, old.head, old.age))


def _add_node_edge(sample: GoldSample, rng: np.random.Generator) -> None:
    graph = sample.graph
    anchor = _pick(rng, list(graph.nodes))
    relation = _pick(rng, _labels(graph.domain))
    if rng.random() < 0.5:
        node = _fresh_node(graph, rng, _tail_gender(graph, relation))
        graph.add_node(node)
        _add_new_edge(graph, RelationEdge(anchor, relation, node.id))
    else:
        node = _fresh_node(graph, rng)
        graph.add_node(node)
        _add_new_edge(graph, RelationEdge(node.id, relation, anchor))


def _conflicting_pair(domain: str, rng: np.random.Generator) -> tuple[str, str]:
    labels = _labels(domain)
    first = _pick(rng, labels)
    if domain == "stepgame":
        rest = [r for r in labels if r != first]
    else:
        rest = [
            r for r in labels
            if kin_gender(r) != kin_gender(first) or KIN_GENERATION[r] != KIN_GENERATION[first]
        ]
    return first, _pick(rng, rest)


def _add_conflict_edges(sample: GoldSample, rng: np.random.Generator) -> None:
    graph = sample.graph
    anchor = _pick(rng, list(graph.nodes))
    r1, r2 = _conflicting_pair(graph.domain, rng)
    node = _fresh_node(graph, rng, _tail_gender(graph, r1))
    graph.add_node(node)
    if graph.domain == "stepgame":
        # both edges state where the new node sits relative to the anchor
        _add_new_edge(graph, RelationEdge(node.id, r1, anchor))
        _add_new_edge(graph, RelationEdge(node.id, r2, anchor))
    else:
        _add_new_edge(graph, RelationEdge(anchor, r1, node.id))
        _add_new_edge(graph, RelationEdge(anchor, r2, node.id))


def _add_edge_between(sample: GoldSample, rng: np.random.Generator, pool: list[str], what: str) -> None:
    graph = sample.graph
    if len(pool) < 2:
        raise NotApplicable(f"fewer than two {what} nodes")
    for _ in range(16):
        i, j = rng.choice(len(pool), size=2, replace=False)
        edge = RelationEdge(pool[int(i)], _pick(rng, _labels(graph.domain)), pool[int(j)])
        if not graph.has_edge(edge):
            graph.add_edge(edge)
            return
    raise NotApplicable(f"could not place a fresh edge between {what} nodes")


def _add_irrelevant_edge(sample: GoldSample, rng: np.random.Generator) -> None:
    _add_edge_between(sample, rng, _irrelevant_nodes(sample), "irrelevant")


def _add_main_edge(sample: GoldSample, rng: np.random.Generator) -> None:
    _add_edge_between(sample, rng, list(sample.path.nodes), "main-chain")


def _replace_relation(sample: GoldSample, rng: np.random.Generator) -> None:
    graph = sample.graph
    candidates = _irrelevant_edges(sample)
    if not candidates:
        raise NotApplicable("no irrelevant edge to rewrite")
    index = _pick(rng, candidates)
    old = graph.edges[index]
    choices = [
        r for r in _labels(graph.domain)
        if r != old.relation and not graph.has_edge((old.head, r, old.tail))
    ]
    if not choices:
        raise NotApplicable("no replacement relation available")
    graph.replace_edge(index, RelationEdge(old.head, _pick(rng, choices), old.tail, old.age))


def _add_disconnected(sample: GoldSample, rng: np.random.Generator) -> None:
    graph = sample.graph
    relation = _pick(rng, _labels(graph.domain))
    head = _fresh_node(graph, rng)
    graph.add_node(head)
    tail = _fresh_node(graph, rng, _tail_gender(graph, relation))
    graph.add_node(tail)
    graph.add_edge(RelationEdge(head.id, relation, tail.id))


_OPS: dict[str, Callable[[GoldSample, np.random.Generator], None]] = {
    "A": _flip,
    "B": _add_node_edge,
    "C": _add_conflict_edges,
    "D": _add_irrelevant_edge,
    "E": _add_main_edge,
    "F": _replace_relation,
    "G": _add_disconnected,
}


def inject(sample: GoldSample, noise_type: str, rng: np.random.Generator) -> GoldSample:
    """Apply one perturbation to a copy of ``sample``; raises NotApplicable when its precondition fails."""
    code = noise_code(noise_type)
    out = sample.copy()
    _OPS[code](out, rng)
    out.noise = sample.noise + (code,)
    return out


def inject_n(sample: GoldSample, spec: NoiseSpec) -> GoldSample:
    """Apply ``spec.count`` types drawn with replacement, redrawing when a type does not apply.

    The draw sequence depends only on ``(spec.seed, sample.sample_id)``, so a
    run with count n is a prefix of the run with count n + 1.
    """
    rng = substream(spec.seed, sample.sample_id)
    current = sample
    for _ in range(spec.count):
        remaining = list(spec.types)
        while True:
            if not remaining:
                raise NotApplicable(f"no noise type in {spec.types} applies to {sample.sample_id}")
            code = remaining[int(rng.integers(len(remaining)))]
            try:
                current = inject(current, code, rng)
                break
            except NotApplicable:
                remaining = [t for t in remaining if t != code]
    return current


# ---------------------------------------------------------------- gold corpora


def _stepgame_sample(sample_id: str, hops: int, rng: np.random.Generator, irrelevant: tuple[int, int]) -> GoldSample:
    extra = int(rng.integers(irrelevant[0], irrelevant[1] + 1))
    letters = list(rng.permutation(list(string.ascii_uppercase))[: hops + 1 + extra])
    chain_nodes, others = letters[: hops + 1], letters[hops + 1 :]
    graph = RelationGraph("stepgame")
    edges = []
    for a, b in zip(chain_nodes, chain_nodes[1:]):
        rel = _pick(rng, STEPGAME_DIRECTIONS)
        if rng.random() < 0.5:
            edges.append(RelationEdge(a, rel, b))
        else:
            edges.append(RelationEdge(b, STEPGAME.inverse_map[rel], a))
    main_positions = set(rng.choice(hops + extra, size=hops, replace=False).tolist())
    attached = list(chain_nodes)
    extra_edges = []
    for node in others:
        anchor = _pick(rng, attached)
        rel = _pick(rng, STEPGAME_DIRECTIONS)
        extra_edges.append(RelationEdge(node, rel, anchor) if rng.random() < 0.5 else RelationEdge(anchor, rel, node))
        attached.append(node)
    # interleave chain and distractor edges so the chain is not simply the first k lines
    order, main_iter, extra_iter, main_idx = [], iter(edges), iter(extra_edges), []
    for pos in range(hops + extra):
        if pos in main_positions:
            main_idx.append(pos)
            order.append(next(main_iter))
        else:
            order.append(next(extra_iter))
    for node in rng.permutation(letters):
        graph.add_node(EntityNode(str(node)))
    for edge in order:
        graph.add_edge(edge)
    query = RelationQuery(chain_nodes[0], chain_nodes[-1])
    path = path_from_edges(edges, query.source, query.target)
    return GoldSample(sample_id, graph, query, tuple(main_idx), frozenset({spatial_solve(path)}), hops)


def _clutrr_chain(tree: FamilyTree, hops: int, rng: np.random.Generator, budget: int = 4000) -> list[str] | None:
    """Simple path whose every prefix folds to a single, exact relation (randomized backtracking)."""
    table = default_table()
    pairs = tree.related_pairs()
    neighbours: dict[str, list[str]] = {}
    for x, y in sorted(pairs):
        neighbours.setdefault(x, []).append(y)
    people = sorted(neighbours)
    if not people:
        return None
    visits = 0

    def extend(walk: list[str], state: frozenset[str]) -> list[str] | None:
        nonlocal visits
        if len(walk) == hops + 1:
            return walk
        options = [y for y in neighbours.get(walk[-1], []) if y not in walk]
        for i in rng.permutation(len(options)):
            visits += 1
            if visits > budget:
                return None
            nxt = options[int(i)]
            step = frozenset({pairs[(walk[-1], nxt)]})
            new, complete = compose_sets(state, step, table, allow_partial=False)
            if complete and new == {pairs.get((walk[0], nxt))}:
                found = extend(walk + [nxt], new)
                if found is not None:
                    return found
        return None

    for start in rng.permutation(people)[:8]:
        start = str(start)
        for first in rng.permutation(neighbours[start]):
            first = str(first)
            found = extend([start, first], frozenset({pairs[(start, first)]}))
            if found is not None:
                return found
            if visits > budget:
                return None
    return None


def _clutrr_sample(sample_id: str, hops: int, rng: np.random.Generator, irrelevant: tuple[int, int]) -> GoldSample:
    while True:
        tree = random_family(rng, generations=int(rng.integers(4, 6)), max_people=45)
        walk = _clutrr_chain(tree, hops, rng)
        if walk is None:
            continue
        pairs = tree.related_pairs()
        extra = int(rng.integers(irrelevant[0], irrelevant[1] + 1))
        included = list(walk)
        extra_edges = []
        for _ in range(extra):
            options = sorted({(x, y) for (x, y) in pairs if x in included and y not in included})
            if not options:
                break
            x, y = _pick(rng, options)
            extra_edges.append(RelationEdge(x, pairs[(x, y)], y) if rng.random() < 0.5 else RelationEdge(y, pairs[(y, x)], x))
            included.append(y)
        if len(extra_edges) >= irrelevant[0]:
            break
    edges = []
    for a, b in zip(walk, walk[1:]):
        edges.append(RelationEdge(a, pairs[(a, b)], b) if rng.random() < 0.5 else RelationEdge(b, pairs[(b, a)], a))
    n_total = len(edges) + len(extra_edges)
    main_positions = set(rng.choice(n_total, size=len(edges), replace=False).tolist())
    order, main_idx, mi, ei = [], [], iter(edges), iter(extra_edges)
    for pos in range(n_total):
        if pos in main_positions:
            main_idx.append(pos)
            order.append(next(mi))
        else:
            order.append(next(ei))
    graph = RelationGraph("clutrr")
    for pid in rng.permutation(included):
        graph.add_node(EntityNode(str(pid), gender=tree.people[str(pid)].gender))  # type: ignore[arg-type]
    for edge in order:
        graph.add_edge(edge)
    query = RelationQuery(walk[0], walk[-1])
    return GoldSample(sample_id, graph, query, tuple(main_idx), frozenset({pairs[(walk[0], walk[-1])]}), hops)


def generate_gold_corpus(
    domain: str,
    count: int,
    hop_range: tuple[int, int] | Iterable[int],
    seed: int,
    irrelevant: tuple[int, int] = (2, 5),
) -> list[GoldSample]:
    """Clean samples: a random main chain plus a tree of consistent distractor facts."""
    if domain not in ("stepgame", "clutrr"):
        raise ValueError(f"gold corpora exist for stepgame and clutrr, not {domain!r}")
    lo, hi = tuple(hop_range)[0], tuple(hop_range)[-1]
    make = _stepgame_sample if domain == "stepgame" else _clutrr_sample
    out = []
    for i in range(count):
        rng = substream(seed, i)
        hops = int(rng.integers(lo, hi + 1))
        out.append(make(f"{domain}-{seed}-{i:05d}", hops, rng, irrelevant))
    return out


# ---------------------------------------------------------------- corpus files


def format_corpus(samples: Iterable[GoldSample]) -> str:
    blocks = []
    for s in samples:
        header = {"hops": str(s.hops)}
        if s.noise:
            header["noise"] = "".join(s.noise)
        blocks.append(
            format_graph(
                s.graph,
                s.query,
                sample_id=s.sample_id,
                header=header,
                main_chain=s.main_chain_indices,
                answers=sorted(s.answers),
            )
        )
    return "\n".join(blocks)


def write_corpus(samples: Iterable[GoldSample], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_corpus(samples))


def parse_corpus(text: str, default_domain: str | None = None) -> list[GoldSample]:
    out = []
    for i, rec in enumerate(iter_graph_records(text, default_domain)):
        if rec.query is None or rec.main_chain is None or not rec.answers:
            raise GraphFormatError(f"corpus block {i} needs Q, M and A lines")
        sample = GoldSample(
            sample_id=rec.sample_id or f"sample-{i:05d}",
            graph=rec.graph,
            query=rec.query,
            main_chain_indices=tuple(rec.main_chain),
            answers=frozenset(rec.graph.vocabulary.canonical(a, answer=True) for a in rec.answers),
            hops=int(rec.header.get("hops", len(rec.main_chain))),
            noise=tuple(rec.header.get("noise", "")),
        )
        try:
            sample.path
        except InvalidGold as exc:
            raise GraphFormatError(f"corpus block {i}: {exc}") from None
        out.append(sample)
    return out


def read_corpus(path, default_domain: str | None = None) -> list[GoldSample]:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh.read(), default_domain)
