"""Direction calculus over unit grid offsets (StepGame).

An edge ``(X, r, Y)`` contributes ``pos(X) - pos(Y) = OFFSETS[r]``. Summing
oriented steps from source to target gives the source's displacement from
the target, which collapses back to one of eight directions or ``overlap``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnknownRelationLabel
from ..paths import PathStep, ReasoningPath
from ..vocab import STEPGAME


@dataclass(frozen=True)
class SpatialOffset:
    dx: int  # east-positive
    dy: int  # north-positive

    def __add__(self, other: SpatialOffset) -> SpatialOffset:
        return SpatialOffset(self.dx + other.dx, self.dy + other.dy)

    def __neg__(self) -> SpatialOffset:
        return SpatialOffset(-self.dx, -self.dy)

    def sign(self) -> SpatialOffset:
        return SpatialOffset((self.dx > 0) - (self.dx < 0), (self.dy > 0) - (self.dy < 0))


OFFSETS = {
    "top": SpatialOffset(0, 1),
    "down": SpatialOffset(0, -1),
    "left": SpatialOffset(-1, 0),
    "right": SpatialOffset(1, 0),
    "top_left": SpatialOffset(-1, 1),
    "top_right": SpatialOffset(1, 1),
    "down_left": SpatialOffset(-1, -1),
    "down_right": SpatialOffset(1, -1),
}

_LABELS = {offset: label for label, offset in OFFSETS.items()}
_LABELS[SpatialOffset(0, 0)] = "overlap"


def offset_of(label: str) -> SpatialOffset:
    try:
        return OFFSETS[STEPGAME.canonical(label)]
    except UnknownRelationLabel:
        raise
    except KeyError:
        raise UnknownRelationLabel(label, "stepgame") from None


def label_of(offset: SpatialOffset) -> str:
    return _LABELS[offset.sign()]


def step_offset(step: PathStep) -> SpatialOffset:
    """Displacement of the step's start node from its end node."""
    offset = offset_of(step.edge.relation)
    return offset if step.orientation == "forward" else -offset


def spatial_step_relation(step: PathStep) -> str:
    return label_of(step_offset(step))


def path_offset(path: ReasoningPath) -> SpatialOffset:
    total = SpatialOffset(0, 0)
    for step in path.steps:
        total = total + step_offset(step)
    return total


def spatial_solve(path: ReasoningPath) -> str:
    """Direction of the path's source relative to its target."""
    return label_of(path_offset(path))
