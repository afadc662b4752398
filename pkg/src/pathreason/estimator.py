"""scikit-learn style wrapper around the path-based pipeline.

Nothing is learned: ``fit`` validates parameters and binds the knowledge
assets, ``predict`` maps stories (or pre-extracted graphs) to answer sets.
"""

from __future__ import annotations

from typing import Sequence

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .evaluation import DatasetRecord
from .graph import RelationGraph, RelationQuery
from .llm import ClientConfig, LLMClient, MockClient
from .noise import GoldSample
from .paths import DEFAULT_MAX_LEN, DEFAULT_MAX_PATHS
from .pipeline import MODES, PipelineOutcome, reason_over_graph, run_story
from .reasoners.kinship import KinshipRuleTable
from .vocab import SYMBOLIC_DOMAINS, get_vocabulary


def _at_least_one(predicted: Sequence[frozenset[str]], gold: Sequence) -> float:
    if len(predicted) != len(gold):
        raise ValueError(f"got {len(predicted)} predictions for {len(gold)} gold labels")
    if not predicted:
        raise ValueError("cannot score an empty sample")
    hits = 0
    for p, g in zip(predicted, gold):
        g = {g} if isinstance(g, str) else set(g)
        hits += bool(p & g)
    return hits / len(predicted)


class PathOfThoughts(BaseEstimator):
    """Answer relational queries by reasoning along every path between the queried entities.

    Parameters
    ----------
    domain : one of stepgame, clutrr, spartun, chinese_kinship
    mode : "symbolic" (stepgame, clutrr only) or "llm"
    max_len, max_paths : path enumeration limits
    client : an LLM client; required unless every input is a pre-extracted graph
    fixtures : directory of recorded completions; builds a MockClient when ``client`` is None
    kinship_table : path to an alternative kinship rule file
    """

    def __init__(
        self,
        domain: str = "stepgame",
        mode: str = "symbolic",
        max_len: int = DEFAULT_MAX_LEN,
        max_paths: int = DEFAULT_MAX_PATHS,
        client: LLMClient | None = None,
        fixtures: str | None = None,
        kinship_table: str | None = None,
    ) -> None:
        self.domain = domain
        self.mode = mode
        self.max_len = max_len
        self.max_paths = max_paths
        self.client = client
        self.fixtures = fixtures
        self.kinship_table = kinship_table

    def fit(self, X=None, y=None) -> PathOfThoughts:
        self.vocabulary_ = get_vocabulary(self.domain)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "symbolic" and self.domain not in SYMBOLIC_DOMAINS:
            raise ValueError(f"symbolic mode supports {SYMBOLIC_DOMAINS}, not {self.domain!r}")
        if self.max_len < 1 or self.max_paths < 1:
            raise ValueError("max_len and max_paths must be positive")
        self.table_ = KinshipRuleTable.load(self.kinship_table) if self.domain == "clutrr" else None
        if self.client is not None:
            self.client_ = self.client
        elif self.fixtures is not None:
            self.client_ = MockClient(self.fixtures, ClientConfig())
        else:
            self.client_ = None
        return self

    def _one(self, item) -> PipelineOutcome:
        if isinstance(item, GoldSample):
            item = (item.graph, item.query)
        elif isinstance(item, DatasetRecord) and item.graph is not None:
            item = (item.graph, item.query)
        elif isinstance(item, DatasetRecord):
            item = item.story
        if isinstance(item, tuple):
            graph, query = item
            if not isinstance(graph, RelationGraph) or not isinstance(query, RelationQuery):
                raise TypeError("tuple inputs must be (RelationGraph, RelationQuery)")
            return reason_over_graph(
                graph, query, self.mode, client=self.client_, max_len=self.max_len,
                max_paths=self.max_paths, table=self.table_,
            )
        if not isinstance(item, str):
            raise TypeError(f"cannot predict on {type(item).__name__}")
        if self.client_ is None:
            raise ValueError("story inputs need a client or a fixtures directory")
        return run_story(self.domain, item, self.client_, self.mode, self.max_len, self.max_paths)

    def predict_outcomes(self, X) -> list[PipelineOutcome]:
        check_is_fitted(self, "vocabulary_")
        return [self._one(x) for x in X]

    def predict(self, X) -> list[frozenset[str]]:
        """One answer set per input; an empty set marks a failed record."""
        return [o.predicted for o in self.predict_outcomes(X)]

    def score(self, X, y) -> float:
        """At-least-one-match accuracy against gold labels (strings or sets)."""
        return _at_least_one(self.predict(X), list(y))
