"""Closed relation vocabularies for the four supported domains."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import UnknownRelationLabel, UnsupportedDomain

DOMAINS = ("stepgame", "clutrr", "spartun", "chinese_kinship")
SYMBOLIC_DOMAINS = ("stepgame", "clutrr")

STEPGAME_DIRECTIONS = (
    "top",
    "down",
    "left",
    "right",
    "top_left",
    "top_right",
    "down_left",
    "down_right",
)

CLUTRR_RELATIONS = (
    "son",
    "grandmother",
    "daughter-in-law",
    "grandson",
    "greatgrandson",
    "grandfather",
    "mother-in-law",
    "greatgranddaughter",
    "uncle",
    "son-in-law",
    "wife",
    "greatgrandfather",
    "brother",
    "husband",
    "daughter",
    "father-in-law",
    "sister",
    "greatgrandmother",
    "granddaughter",
    "aunt",
    "nephew",
    "niece",
    "mother",
    "father",
)

SPARTUN_RELATIONS = (
    "far",
    "in",
    "touch",
    "has",
    "covered_by",
    "right",
    "overlap",
    "front",
    "behind",
    "cover",
    "left",
    "disconnected_from",
    "below",
    "above",
    "near",
)

SPARTUN_CONCEPTS = {
    "FAR": "far",
    "NTPP": "in",
    "EC": "touch",
    "NTPPI": "has",
    "TPP": "covered_by",
    "RIGHT": "right",
    "PO": "overlap",
    "FRONT": "front",
    "BEHIND": "behind",
    "TPPI": "cover",
    "LEFT": "left",
    "DC": "disconnected_from",
    "BELOW": "below",
    "ABOVE": "above",
    "NEAR": "near",
}

_STEPGAME_ALIASES = {
    "bottom": "down",
    "bottom_left": "down_left",
    "bottom_right": "down_right",
    "above": "top",
    "below": "down",
    "upper_left": "top_left",
    "upper_right": "top_right",
    "lower_left": "down_left",
    "lower_right": "down_right",
}

_STEPGAME_INVERSE = {
    "top": "down",
    "down": "top",
    "left": "right",
    "right": "left",
    "top_left": "down_right",
    "down_right": "top_left",
    "top_right": "down_left",
    "down_left": "top_right",
}

# (inverse when the subject is male, inverse when the subject is female)
_CLUTRR_INVERSE: dict[str, tuple[str, str]] = {}
for _pair, _inv in [
    (("father", "mother"), ("son", "daughter")),
    (("son", "daughter"), ("father", "mother")),
    (("husband", "wife"), ("husband", "wife")),
    (("brother", "sister"), ("brother", "sister")),
    (("grandfather", "grandmother"), ("grandson", "granddaughter")),
    (("grandson", "granddaughter"), ("grandfather", "grandmother")),
    (("greatgrandfather", "greatgrandmother"), ("greatgrandson", "greatgranddaughter")),
    (("greatgrandson", "greatgranddaughter"), ("greatgrandfather", "greatgrandmother")),
    (("uncle", "aunt"), ("nephew", "niece")),
    (("nephew", "niece"), ("uncle", "aunt")),
    (("son-in-law", "daughter-in-law"), ("father-in-law", "mother-in-law")),
    (("father-in-law", "mother-in-law"), ("son-in-law", "daughter-in-law")),
]:
    for _label in _pair:
        _CLUTRR_INVERSE[_label] = _inv

_SPARTUN_INVERSE = {
    "far": "far",
    "in": "has",
    "has": "in",
    "touch": "touch",
    "covered_by": "cover",
    "cover": "covered_by",
    "right": "left",
    "left": "right",
    "overlap": "overlap",
    "front": "behind",
    "behind": "front",
    "disconnected_from": "disconnected_from",
    "below": "above",
    "above": "below",
    "near": "near",
}

FEMALE_KIN = frozenset(
    {
        "mother",
        "daughter",
        "wife",
        "sister",
        "grandmother",
        "granddaughter",
        "greatgrandmother",
        "greatgranddaughter",
        "aunt",
        "niece",
        "daughter-in-law",
        "mother-in-law",
    }
)

# generations above the subject (negative: below)
KIN_GENERATION = {
    "father": 1,
    "mother": 1,
    "son": -1,
    "daughter": -1,
    "husband": 0,
    "wife": 0,
    "brother": 0,
    "sister": 0,
    "grandfather": 2,
    "grandmother": 2,
    "grandson": -2,
    "granddaughter": -2,
    "greatgrandfather": 3,
    "greatgrandmother": 3,
    "greatgrandson": -3,
    "greatgranddaughter": -3,
    "uncle": 1,
    "aunt": 1,
    "nephew": -1,
    "niece": -1,
    "son-in-law": -1,
    "daughter-in-law": -1,
    "father-in-law": 1,
    "mother-in-law": 1,
}


def kin_gender(label: str) -> str:
    """Gender implied for the person a kinship label points to."""
    return "female" if label in FEMALE_KIN else "male"


@dataclass(frozen=True)
class RelationVocabulary:
    """A domain's closed label set plus inverse metadata.

    ``labels`` is ``None`` for open vocabularies (Chinese kinship titles),
    in which case any non-empty token is accepted verbatim.
    """

    domain: str
    labels: frozenset[str] | None
    answer_labels: frozenset[str] | None = None
    inverse_map: Mapping[str, object] = field(default_factory=dict)
    aliases: Mapping[str, str] = field(default_factory=dict)

    def __contains__(self, label: object) -> bool:
        if not isinstance(label, str):
            return False
        try:
            self.canonical(label)
        except UnknownRelationLabel:
            return False
        return True

    def canonical(self, label: str, *, answer: bool = False) -> str:
        """Return the canonical spelling of ``label`` or raise UnknownRelationLabel."""
        token = label.strip()
        if not token:
            raise UnknownRelationLabel(label, self.domain)
        if self.labels is None:
            return token
        allowed = self.answer_labels if answer and self.answer_labels else self.labels
        key = _normalize(token, self.domain)
        if key in allowed:
            return key
        if key in self.aliases and self.aliases[key] in allowed:
            return self.aliases[key]
        raise UnknownRelationLabel(label, self.domain)

    @property
    def edge_labels(self) -> tuple[str, ...]:
        """Labels that may appear on extracted edges, in a stable order."""
        if self.labels is None:
            return ()
        return tuple(sorted(self.labels))


def _normalize(token: str, domain: str) -> str:
    key = token.strip().strip("'\"").strip().lower()
    if domain == "clutrr":
        key = re.sub(r"[\s_]+", "-", key)
        key = re.sub(r"^great-?grand-?", "greatgrand", key)
        key = re.sub(r"^grand-", "grand", key)
        return key
    if domain == "spartun" and key.upper() in SPARTUN_CONCEPTS:
        return SPARTUN_CONCEPTS[key.upper()]
    return re.sub(r"[\s\-]+", "_", key)


STEPGAME = RelationVocabulary(
    domain="stepgame",
    labels=frozenset(STEPGAME_DIRECTIONS),
    answer_labels=frozenset(STEPGAME_DIRECTIONS) | {"overlap"},
    inverse_map=_STEPGAME_INVERSE,
    aliases=_STEPGAME_ALIASES,
)

CLUTRR = RelationVocabulary(
    domain="clutrr",
    labels=frozenset(CLUTRR_RELATIONS),
    inverse_map=_CLUTRR_INVERSE,
)

SPARTUN = RelationVocabulary(
    domain="spartun",
    labels=frozenset(SPARTUN_RELATIONS),
    inverse_map=_SPARTUN_INVERSE,
)

CHINESE_KINSHIP = RelationVocabulary(domain="chinese_kinship", labels=None)

_VOCABULARIES = {
    "stepgame": STEPGAME,
    "clutrr": CLUTRR,
    "spartun": SPARTUN,
    "chinese_kinship": CHINESE_KINSHIP,
}


def get_vocabulary(domain: str) -> RelationVocabulary:
    try:
        return _VOCABULARIES[domain]
    except KeyError:
        raise UnsupportedDomain(f"unsupported domain {domain!r}; expected one of {DOMAINS}") from None


def map_spartun_concept(label: str) -> str:
    """Map a SPARTUN concept code (``NTPP``) or plain label to its canonical name."""
    token = label.strip()
    if token.upper() in SPARTUN_CONCEPTS:
        return SPARTUN_CONCEPTS[token.upper()]
    return SPARTUN.canonical(token)
