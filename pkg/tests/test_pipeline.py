import pytest

from fakes import ScriptClient
from pathreason.errors import FixtureMiss
from pathreason.graph import RelationEdge, RelationGraph, RelationQuery
from pathreason.llm import MockClient
from pathreason.pipeline import reason_over_graph, run_story

STORY = "A is above B. C is to the left of B. What is the relation of A to C?"
EXTRACTED = "RELATIONSHIP:\n[(A,top,B)],\n[(C,left,B)]\nQUERY:\n[(A,C)]\n"


def extractor(reason_reply="[top_right]"):
    def reply(prompt, _):
        return EXTRACTED if "FILL_IN" in prompt else reason_reply
    return ScriptClient(reply)


def test_symbolic_story():
    out = run_story("stepgame", STORY, extractor())
    assert out.status == "ok" and out.predicted == {"top_right"}
    assert out.query_form == "pair"
    d = out.diagnostics()
    assert d["paths"] == ["A -[top>]- B -[<left]- C"] and d["per_path"] == [["top_right"]]


def test_llm_mode_renders_each_path():
    client = extractor("so the answer is [top_right]")
    out = run_story("stepgame", STORY, client, mode="llm")
    assert out.predicted == {"top_right"}
    reason_prompts = [p for p, _ in client.calls if "FILL_IN" not in p]
    assert len(reason_prompts) == 1
    assert "A is at the top of B, C is at the left of B. What is the relation of the A to the C?" in reason_prompts[0]


def test_llm_mode_unions_paths_and_tolerates_failures():
    g = RelationGraph("stepgame", edges=[RelationEdge("A", "top", "B"), RelationEdge("A", "left", "B")])
    answers = iter(["[top]", "no idea"])
    out = reason_over_graph(g, RelationQuery("A", "B"), "llm", client=ScriptClient(lambda p, r: next(answers)))
    assert out.status == "ok" and out.predicted == {"top"}
    assert out.paths[1].error.startswith("NoAnswerFound")


def test_all_paths_failed():
    out = run_story("stepgame", STORY, extractor("nothing"), mode="llm")
    assert out.status == "all-paths-failed" and out.predicted == frozenset()


def test_disconnected_query():
    reply = "RELATIONSHIP: [(A,top,B)], [(C,left,D)]\nQUERY: [(A,D)]"
    out = run_story("stepgame", STORY, ScriptClient(lambda p, r: reply))
    assert out.status == "disconnected-query" and out.predicted == frozenset()


def test_query_entity_not_in_graph():
    reply = "RELATIONSHIP: [(A,top,B)]\nQUERY: [(A,Q)]"
    out = run_story("stepgame", STORY, ScriptClient(lambda p, r: reply))
    assert out.status == "disconnected-query"
    assert out.warnings


def test_extraction_failure_and_client_errors(tmp_path):
    assert run_story("stepgame", STORY, ScriptClient(lambda p, r: "I cannot help")).status == "extraction-failed"
    assert run_story("stepgame", STORY, MockClient(tmp_path)).status == "fixture-miss"
    assert run_story("stepgame", STORY, ScriptClient(lambda p, r: FixtureMiss("k"))).status == "fixture-miss"


def test_symbolic_kinship_with_composition_gap():
    g = RelationGraph("clutrr", edges=[
        RelationEdge("A", "sister", "B"), RelationEdge("B", "mother-in-law", "C"),
        RelationEdge("A", "mother", "D"), RelationEdge("D", "daughter", "C"),
    ])
    out = reason_over_graph(g, RelationQuery("A", "C"), "symbolic")
    assert out.status == "ok"
    assert [p.error is None for p in out.paths] == [False, True]
    assert "sister" in out.predicted


def test_symbolic_mode_rejects_open_domains():
    g = RelationGraph("spartun", edges=[RelationEdge("a", "in", "b")])
    with pytest.raises(ValueError):
        reason_over_graph(g, RelationQuery("a", "b"), "symbolic")
    with pytest.raises(ValueError):
        reason_over_graph(g, RelationQuery("a", "b"), "llm")
    with pytest.raises(ValueError):
        reason_over_graph(g, RelationQuery("a", "b"), "magic")
