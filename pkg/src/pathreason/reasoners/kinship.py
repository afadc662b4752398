"""Kinship composition over the 24 CLUTRR surface relations.

The rule table is a shipped text asset. ``COMPOSE`` entries are exhaustive;
``PARTIAL`` entries list every in-vocabulary outcome but the chain may also
end on a relation the vocabulary cannot name (a brother-in-law, a cousin).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

from ..errors import CompositionGap, MissingInverse, UnknownRelationLabel
from ..paths import PathStep, ReasoningPath
from ..vocab import CLUTRR, kin_gender

GENDER_CHOICES = ("male", "female")


@dataclass(frozen=True)
class RuleEntry:
    results: frozenset[str]
    complete: bool


@dataclass
class KinshipRuleTable:
    entries: dict[tuple[str, str, str], RuleEntry] = field(default_factory=dict)
    inverses: dict[tuple[str, str], str] = field(default_factory=dict)
    sha256: str = ""

    @classmethod
    def parse(cls, text: str) -> KinshipRuleTable:
        table = cls(sha256=hashlib.sha256(text.encode("utf-8")).hexdigest())
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                lhs, rhs = (part.split() for part in line.split("->"))
                kind = lhs[0]
                results = [CLUTRR.canonical(r) for r in "".join(rhs).split(",") if r]
                if kind in ("COMPOSE", "PARTIAL"):
                    _, r1, r2, gender = lhs
                    key = (CLUTRR.canonical(r1), CLUTRR.canonical(r2), gender)
                    table.entries[key] = RuleEntry(frozenset(results), kind == "COMPOSE")
                elif kind == "INVERSE":
                    _, rel, gender = lhs
                    (result,) = results
                    table.inverses[(CLUTRR.canonical(rel), gender)] = result
                else:
                    raise ValueError(f"unknown rule kind {kind!r}")
            except (ValueError, UnknownRelationLabel) as exc:
                raise ValueError(f"kinship table line {lineno}: {exc}") from None
        return table

    @classmethod
    def load(cls, path: str | None = None) -> KinshipRuleTable:
        if path is None:
            return default_table()
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def lookup(self, r1: str, r2: str) -> RuleEntry | None:
        return self.entries.get((r1, r2, kin_gender(r2)))

    def inverse(self, relation: str, subject_gender: str) -> frozenset[str]:
        """Relations ``x`` may bear to ``y`` given "y is x's relation"; unknown gender widens."""
        genders = GENDER_CHOICES if subject_gender not in GENDER_CHOICES else (subject_gender,)
        out = set()
        for g in genders:
            try:
                out.add(self.inverses[(relation, g)])
            except KeyError:
                raise MissingInverse(f"no inverse for {relation!r} with a {g} subject") from None
        return frozenset(out)


@lru_cache(maxsize=1)
def default_table() -> KinshipRuleTable:
    text = resources.files("pathreason").joinpath("assets/kinship_rules.txt").read_text("utf-8")
    return KinshipRuleTable.parse(text)


def kinship_step_relation(
    step: PathStep, genders: Mapping[str, str] | None = None, table: KinshipRuleTable | None = None
) -> frozenset[str]:
    """Relation(s) the step's end node bears to its start node."""
    relation = CLUTRR.canonical(step.edge.relation)
    if step.orientation == "forward":
        return frozenset({relation})
    table = table or default_table()
    return table.inverse(relation, (genders or {}).get(step.end, "unknown"))


def compose_sets(
    left: Iterable[str], right: Iterable[str], table: KinshipRuleTable, allow_partial: bool
) -> tuple[frozenset[str], bool]:
    """Pointwise composition; the flag reports whether every pair hit a complete entry."""
    out: set[str] = set()
    complete = True
    for a in left:
        for b in right:
            entry = table.lookup(a, b)
            if entry is None or not entry.complete:
                complete = False
                if entry is None or not allow_partial:
                    continue
            out |= entry.results
    return frozenset(out), complete


def kinship_fold(
    path: ReasoningPath,
    table: KinshipRuleTable | None = None,
    genders: Mapping[str, str] | None = None,
) -> frozenset[str]:
    """Relations the path's target may bear to its source ("target is source's r")."""
    table = table or default_table()
    steps = [kinship_step_relation(s, genders, table) for s in path.steps]
    state = steps[0]
    complete = True
    for nxt in steps[1:]:
        state, ok = compose_sets(state, nxt, table, allow_partial=False)
        if not ok:
            complete = False
            break
    if complete and state:
        return state
    result = _chart(steps, table)
    if not result:
        raise CompositionGap(f"no composition covers {path}")
    return result


def _chart(steps: list[frozenset[str]], table: KinshipRuleTable) -> frozenset[str]:
    # a chain that leaves the vocabulary under one bracketing may stay inside it under another
    n = len(steps)
    span: dict[tuple[int, int], frozenset[str]] = {(i, i + 1): steps[i] for i in range(n)}
    for width in range(2, n + 1):
        for i in range(0, n - width + 1):
            j = i + width
            acc: set[str] = set()
            for k in range(i + 1, j):
                got, _ = compose_sets(span[(i, k)], span[(k, j)], table, allow_partial=True)
                acc |= got
            span[(i, j)] = frozenset(acc)
    return span[(0, n)]
