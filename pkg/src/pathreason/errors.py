"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PathReasonError(Exception):
    """Base class for every error raised by this package."""


class UnknownRelationLabel(PathReasonError, ValueError):
    def __init__(self, label: str, domain: str | None = None) -> None:
        self.label = label
        self.domain = domain
        where = f" for domain {domain!r}" if domain else ""
        super().__init__(f"unknown relation label {label!r}{where}")


class UnknownNode(PathReasonError, KeyError):
    def __init__(self, node_id: str) -> None:
        self.node_id = node_id
        super().__init__(node_id)

    def __str__(self) -> str:
        return f"unknown node {self.node_id!r}"


class UnsupportedDomain(PathReasonError, ValueError):
    pass


class GraphFormatError(PathReasonError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


# extraction


class ExtractionError(PathReasonError):
    pass


class MalformedTag(ExtractionError, ValueError):
    pass


class NoQueryFound(ExtractionError):
    pass


class EmptyExtraction(ExtractionError):
    pass


# llm client


class ClientError(PathReasonError):
    pass


class AuthError(ClientError):
    pass


class RateLimited(ClientError):
    pass


class RequestTimeout(ClientError):
    pass


class MalformedResponse(ClientError):
    pass


class FixtureMiss(MalformedResponse):
    """The mock backend has no stored completion for a prompt."""

    def __init__(self, key: str) -> None:
        self.key = key
        super().__init__(f"fixture-miss: no stored completion for key {key}")


# paths and reasoning


class InvalidPath(PathReasonError, ValueError):
    pass


class InvalidGold(InvalidPath):
    pass


class ReasoningError(PathReasonError):
    pass


class MissingInverse(ReasoningError):
    pass


class CompositionGap(ReasoningError):
    pass


class NoAnswerFound(ReasoningError):
    pass


class AllPathsFailed(ReasoningError):
    pass


# noise and evaluation


class NotApplicable(PathReasonError):
    pass


class SchemaError(PathReasonError, ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class EmptyResults(PathReasonError, ValueError):
    pass
