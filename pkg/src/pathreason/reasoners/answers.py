"""Union of per-path answers with provenance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ..errors import AllPathsFailed


@dataclass(frozen=True)
class AnswerSet:
    relations: frozenset[str]
    per_path: Mapping[int, frozenset[str]]

    def __post_init__(self) -> None:
        union = frozenset().union(*self.per_path.values()) if self.per_path else frozenset()
        if not self.relations or self.relations != union:
            raise ValueError("relations must be the non-empty union of per-path answers")


def aggregate_answers(
    per_path_answers: Mapping[int, Iterable[str] | None] | Iterable[Iterable[str] | None],
) -> AnswerSet:
    """Union across paths; ``None`` or empty entries mark paths that failed."""
    if isinstance(per_path_answers, Mapping):
        items = per_path_answers.items()
    else:
        items = enumerate(per_path_answers)
    kept = {i: frozenset(a) for i, a in items if a}
    if not kept:
        raise AllPathsFailed("no reasoning path produced an answer")
    return AnswerSet(frozenset().union(*kept.values()), kept)
