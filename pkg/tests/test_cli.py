import json

import pytest

from pathreason import cli
from pathreason.llm import FixtureStore, ChatExchange, ClientConfig, fixture_key
from pathreason.extraction import build_extraction_prompt

GRAPH = "D stepgame\nE A top B\nE C left B\nE X top Y\nQ A C\n"


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text(GRAPH)
    return path


def run(capsys, *argv):
    code = cli.main(list(map(str, argv)))
    out, err = capsys.readouterr()
    return code, out, err


def test_help_lists_exit_codes(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    for n in range(9):
        assert f"\n  {n}  " in out


def test_solve_prints_union_and_table(capsys, graph_file):
    code, out, _ = run(capsys, "solve", graph_file)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "[top_right]"
    assert lines[1] == "  0\tA -[top>]- B -[<left]- C\t[top_right]"


def test_paths_and_config_precedence(capsys, tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("D stepgame\nE A top B\nE A left B\nE A right B\nQ A B\n")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# limits\nmax-paths = 1\n")
    assert len(run(capsys, "paths", g)[1].splitlines()) == 3
    assert len(run(capsys, "paths", g, "--config", cfg)[1].splitlines()) == 1
    assert len(run(capsys, "paths", g, "--config", cfg, "--max-paths", "2")[1].splitlines()) == 2


@pytest.mark.parametrize("cfg", ["bogus = 1\n", "max-paths = many\n", "no equals sign\n"])
def test_bad_config_is_usage_error(capsys, tmp_path, graph_file, cfg):
    path = tmp_path / "bad.cfg"
    path.write_text(cfg)
    assert run(capsys, "solve", graph_file, "--config", path)[0] == cli.EXIT_USAGE


def test_usage_errors(capsys, graph_file):
    assert run(capsys, "solve")[0] == cli.EXIT_USAGE
    assert run(capsys, "solve", graph_file, "--mode", "magic")[0] == cli.EXIT_USAGE
    assert run(capsys, "perturb", "--types", "Z")[0] == cli.EXIT_USAGE
    assert run(capsys, "generate", "--domain", "spartun")[0] == cli.EXIT_USAGE
    assert run(capsys, "extract", "--domain", "stepgame", "--mock")[0] == cli.EXIT_USAGE


def test_unparseable_graph(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("D stepgame\nE A top\n")
    assert run(capsys, "solve", bad)[0] == cli.EXIT_PARSE


def test_disconnected_query(capsys, tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("D stepgame\nE A top B\nE X top Y\nQ A Y\n")
    code, out, _ = run(capsys, "solve", g)
    assert code == cli.EXIT_DISCONNECTED and out.splitlines()[0] == "[]"


def test_reasoning_failure(capsys, tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("D clutrr\nE A sister B\nE B mother-in-law C\nQ A C\n")
    code, out, _ = run(capsys, "solve", g)
    assert code == cli.EXIT_REASONING and "CompositionGap" in out


def test_extract_with_fixtures(capsys, tmp_path):
    story = "A is above B. What is the relation of A to B?"
    store = FixtureStore(tmp_path / "fx")
    prompt = build_extraction_prompt("stepgame", story)
    key = fixture_key("gpt-4o", 0.0, prompt)
    store.put(key, ChatExchange(prompt, "RELATIONSHIP: [(A,top,B)]\nQUERY: [(A,B)]", "gpt-4o"), 0.0)
    out_file = tmp_path / "graph.txt"
    code, _, _ = run(capsys, "extract", story, "--mock", tmp_path / "fx", "--out", out_file)
    assert code == 0
    assert out_file.read_text() == "D stepgame\nN A gender=unknown age=unknown\nN B gender=unknown age=unknown\nE A top B\nQ A B\n"
    assert run(capsys, "extract", "another story", "--mock", tmp_path / "fx")[0] == cli.EXIT_FIXTURE_MISS
    assert run(capsys, "extract", story, "--mock", tmp_path / "fx", "--model", "other")[0] == cli.EXIT_FIXTURE_MISS


def test_live_client_without_key(capsys, monkeypatch):
    monkeypatch.delenv("LLM_API_KEY", raising=False)
    assert run(capsys, "extract", "A is above B.")[0] == cli.EXIT_CLIENT


def test_eval_bad_dataset(capsys, tmp_path):
    data = tmp_path / "d.jsonl"
    data.write_text('{"story": "x"}\n')
    code, _, err = run(capsys, "eval", "--dataset", data, "--mock")
    assert code == cli.EXIT_DATA and "line 1" in err
    assert run(capsys, "eval", "--dataset", tmp_path / "missing.jsonl")[0] == cli.EXIT_DATA


def test_eval_all_fixture_misses(capsys, tmp_path):
    data = tmp_path / "d.jsonl"
    data.write_text('{"story": "A is above B.", "answer": "top"}\n')
    (tmp_path / "empty").mkdir()
    assert run(capsys, "eval", "--dataset", data, "--mock", tmp_path / "empty")[0] == cli.EXIT_FIXTURE_MISS


def test_eval_bundled_smoke(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "eval", "--dataset", "bundled:stepgame_smoke", "--mock", "--report", report)
    assert code == 0 and "accuracy  0.9800" in out
    payload = json.loads(report.read_text())
    assert payload["config"]["mock"] == "bundled:stepgame_smoke"
    assert "report" not in payload["config"]


def test_generate_perturb_robustness(capsys, tmp_path):
    gold = tmp_path / "gold.txt"
    assert run(capsys, "generate", "--domain", "clutrr", "--count", "4", "--hops", "2-3", "--out", gold)[0] == 0
    assert gold.read_text().count("\nS ") == 3
    code, out, _ = run(capsys, "perturb", "--domain", "clutrr", "--dataset", gold, "--types", "C,E", "--n", "2")
    assert code == 0 and out.count("noise=") == 4
    csv_path = tmp_path / "r.csv"
    code, out, _ = run(capsys, "robustness", "--count", "5", "--n", "0-1", "--types", "A,G", "--csv", csv_path)
    assert code == 0 and "type   G" in out
    assert len(csv_path.read_text().splitlines()) == 5
    code, out, _ = run(capsys, "eval", "--domain", "clutrr", "--dataset", gold, "--format", "graph-corpus")
    assert code == 0 and "accuracy  1.0000" in out


def test_module_entry_point():
    import subprocess
    import sys

    run = subprocess.run([sys.executable, "-m", "pathreason", "--help"], capture_output=True, text=True)
    assert run.returncode == 0 and "robustness" in run.stdout
