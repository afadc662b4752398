"""Per-path reasoners: spatial vector algebra, kinship composition, and LLM-reasoner text."""

from __future__ import annotations

from typing import Mapping

from ..errors import MissingInverse, UnsupportedDomain
from ..paths import PathStep, ReasoningPath
from ..vocab import SYMBOLIC_DOMAINS, get_vocabulary
from .answers import AnswerSet, aggregate_answers
from .closure import Conflict, whole_graph_solve
from .kinship import KinshipRuleTable, default_table, kinship_fold, kinship_step_relation
from .spatial import SpatialOffset, spatial_solve, spatial_step_relation
from .text import parse_bracketed_answer, path_to_text

__all__ = [
    "AnswerSet",
    "Conflict",
    "KinshipRuleTable",
    "SpatialOffset",
    "aggregate_answers",
    "default_table",
    "kinship_fold",
    "parse_bracketed_answer",
    "path_to_text",
    "solve_path",
    "spatial_solve",
    "step_relation",
    "whole_graph_solve",
]


def step_relation(
    step: PathStep,
    domain: str,
    genders: Mapping[str, str] | None = None,
    table: KinshipRuleTable | None = None,
) -> frozenset[str]:
    """Relation(s) the step's start bears to its end (spatial) or its end bears to its start (kinship).

    Only an unknown gender on a backward kinship step yields more than one label.
    """
    if domain == "stepgame":
        return frozenset({spatial_step_relation(step)})
    if domain == "clutrr":
        return kinship_step_relation(step, genders, table)
    vocab = get_vocabulary(domain)
    if step.orientation == "forward":
        return frozenset({vocab.canonical(step.edge.relation)})
    inverse = vocab.inverse_map.get(vocab.canonical(step.edge.relation))
    if not isinstance(inverse, str):
        raise MissingInverse(f"no inverse for {step.edge.relation!r} in {domain}")
    return frozenset({inverse})


def solve_path(
    path: ReasoningPath,
    domain: str,
    genders: Mapping[str, str] | None = None,
    table: KinshipRuleTable | None = None,
) -> frozenset[str]:
    """Symbolic answer for one path (stepgame or clutrr)."""
    if domain == "stepgame":
        return frozenset({spatial_solve(path)})
    if domain == "clutrr":
        return kinship_fold(path, table, genders)
    raise UnsupportedDomain(f"no symbolic reasoner for {domain!r}; symbolic domains are {SYMBOLIC_DOMAINS}")
