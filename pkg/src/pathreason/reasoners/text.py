"""Serialize reasoning paths for the LLM reasoner and parse its bracketed answers."""

from __future__ import annotations

import logging
import re

from ..errors import NoAnswerFound, UnknownRelationLabel
from ..graph import RelationEdge, RelationGraph
from ..paths import ReasoningPath
from ..vocab import RelationVocabulary, get_vocabulary

log = logging.getLogger(__name__)

_STEPGAME_PHRASE = {
    "top": "top",
    "down": "bottom",
    "left": "left",
    "right": "right",
    "top_left": "top left",
    "top_right": "top right",
    "down_left": "bottom left",
    "down_right": "bottom right",
}

_SPARTUN_VERB = {
    "far": "is far from",
    "in": "is inside",
    "touch": "touches",
    "has": "has",
    "covered_by": "is covered by",
    "cover": "covers",
    "right": "is to the right of",
    "left": "is to the left of",
    "overlap": "overlaps",
    "front": "is in front of",
    "behind": "is behind",
    "disconnected_from": "is disconnected from",
    "below": "is below",
    "above": "is above",
    "near": "is near",
}

_ZH_GENDER = {"male": "男", "female": "女"}


def _name(graph: RelationGraph | None, node_id: str) -> str:
    if graph is not None and node_id in graph:
        return graph.node(node_id).display_name
    return node_id


def _gender(graph: RelationGraph | None, node_id: str) -> str:
    return graph.gender(node_id) if graph is not None else "unknown"


def _edge_sentence(edge: RelationEdge, domain: str, graph: RelationGraph | None) -> str:
    h, t = _name(graph, edge.head), _name(graph, edge.tail)
    if domain == "clutrr":
        return f"{t} is {h}'s {edge.relation}"
    if domain == "stepgame":
        return f"{h} is at the {_STEPGAME_PHRASE.get(edge.relation, edge.relation)} of {t}"
    if domain == "spartun":
        verb = _SPARTUN_VERB.get(edge.relation, f"is {edge.relation.replace('_', ' ')}")
        return f"{h} {verb} {t}"
    return f"{h}的{edge.relation}是{t}"


def path_to_text(path: ReasoningPath, domain: str, graph: RelationGraph | None = None) -> str:
    """Render a path as the short story the reasoning prompt expects.

    Edges keep their stored direction. ``graph`` supplies display names and
    genders; without it node ids are used and gender sentences are omitted.
    """
    get_vocabulary(domain)
    sentences = [_edge_sentence(e, domain, graph) for e in path.edges]
    src, tar = _name(graph, path.source), _name(graph, path.target)
    known = [(n, _gender(graph, n)) for n in path.nodes if _gender(graph, n) != "unknown"]
    if domain == "chinese_kinship":
        text = "，".join(sentences) + "。"
        if known:
            text += "其中，" + "，".join(f"{_name(graph, n)}是{_ZH_GENDER[g]}的" for n, g in known) + "。"
        return text
    text = ", ".join(sentences) + "."
    if domain == "clutrr":
        if known:
            text += " " + ", ".join(f"{_name(graph, n)} is {g}" for n, g in known) + "."
        return text + f" How should {src} address {tar}?"
    if domain == "stepgame":
        return text + f" What is the relation of the {src} to the {tar}?"
    return text


_BRACKETS = re.compile(r"\[([^\[\]]*)\]")


def parse_bracketed_answer(raw: str, vocabulary: RelationVocabulary | str) -> frozenset[str]:
    """Labels in the last bracketed group that names at least one valid relation."""
    if isinstance(vocabulary, str):
        vocabulary = get_vocabulary(vocabulary)
    for group in reversed(_BRACKETS.findall(raw or "")):
        found = set()
        for token in re.split(r"[,，、]", group):
            token = token.strip()
            if not token:
                continue
            try:
                found.add(vocabulary.canonical(token, answer=True))
            except UnknownRelationLabel:
                log.warning("dropping unknown %s label %r", vocabulary.domain, token)
        if found:
            return frozenset(found)
    raise NoAnswerFound("no bracketed group holds a valid relation label")
