"""Regenerate the bundled StepGame smoke corpus and its recorded extraction completions.

The completions are synthetic stand-ins for model output. They imitate the
habits seen in real extractions: preamble chatter, header casing, ``bottom``
spelled for ``down``, a wrong or reversed fact in the distractor part, and
in one story a wrong fact on the chain itself.

    python3 tools/build_fixture_corpus.py
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

from pathreason.extraction import build_extraction_prompt
from pathreason.llm import ChatExchange, ClientConfig, FixtureStore, fixture_key
from pathreason.noise import generate_gold_corpus, substream
from pathreason.vocab import STEPGAME_DIRECTIONS

ROOT = Path(__file__).resolve().parents[1] / "src" / "pathreason" / "assets" / "fixtures" / "stepgame_smoke"
SEED = 4242
COUNT = 50

PHRASES = {
    "top": ["{h} is above {t}.", "{h} is on the top side of {t}.", "{t} is below {h}.", "{h} is north of {t}."],
    "down": ["{h} is below {t}.", "{t} is above {h}.", "{h} is at the 6 o'clock position of {t}."],
    "left": ["{h} is to the left of {t}.", "{t} is to the right of {h}.", "{h} is west of {t}."],
    "right": ["{h} is to the right of {t}.", "{h} and {t} are side by side with {h} on the right.", "{h} is east of {t}."],
    "top_left": ["{h} is at the upper left of {t}.", "{h} is at the 10 position of a clock face from {t}.", "{t} is at the lower right of {h}."],
    "top_right": ["{h} is at the upper right of {t}.", "{h} is north east of {t}.", "{t} is at the bottom left of {h}."],
    "down_left": ["{h} is at the lower left of {t}.", "{h} is south west of {t}.", "{t} is at the 1 o'clock position of {h}."],
    "down_right": ["{h} is at the lower right of {t}.", "{h} is at the 4 o'clock position of {t}.", "{t} is north west of {h}."],
}

PREAMBLES = ["", "", "", "Here are the extracted triplets.\n", "Sure! Below is the filled template.\n\n"]


def spelled(rel: str, rng) -> str:
    if rel.startswith("down") and rng.random() < 0.3:
        return rel.replace("down", "bottom")
    return rel


def main() -> None:
    config = ClientConfig()
    if ROOT.exists():
        shutil.rmtree(ROOT)
    store = FixtureStore(ROOT / "completions")
    samples = generate_gold_corpus("stepgame", COUNT, (1, 6), SEED, irrelevant=(2, 5))
    rows = []
    for i, sample in enumerate(samples):
        rng = substream(SEED, "fixture", i)
        main = set(sample.main_chain_indices)
        sentences = [
            PHRASES[e.relation][int(rng.integers(len(PHRASES[e.relation])))].format(h=e.head, t=e.tail)
            for e in sample.graph.edges
        ]
        story = " ".join(sentences) + f" What is the relation of the agent {sample.query.source} to the agent {sample.query.target}?"
        triplets = []
        for j, e in enumerate(sample.graph.edges):
            head, rel, tail = e.head, e.relation, e.tail
            if j not in main and rng.random() < 0.15:
                if rng.random() < 0.5:
                    head, tail = tail, head
                else:
                    rel = str(rng.choice([r for r in STEPGAME_DIRECTIONS if r != rel]))
            triplets.append((head, spelled(rel, rng), tail))
        if i == 17:
            # one story where the model misreads a fact on the chain
            j = sample.main_chain_indices[0]
            h, r, t = triplets[j]
            triplets[j] = (h, "top" if r != "top" else "down", t)
        order = list(rng.permutation(len(triplets)))
        header = "RELATIONSHIP:" if rng.random() < 0.8 else "Relationship:"
        body = "\n".join(f"[({triplets[k][0]},{triplets[k][1]},{triplets[k][2]})]," for k in order)
        completion = (
            PREAMBLES[int(rng.integers(len(PREAMBLES)))]
            + f"{header}\n{body}\nQUERY:\n[({sample.query.source},{sample.query.target})]\n"
        )
        prompt = build_extraction_prompt("stepgame", story)
        key = fixture_key(config.model, config.temperature, prompt)
        store.put(key, ChatExchange(prompt, completion, config.model), config.temperature)
        rows.append({"id": sample.sample_id, "story": story, "answer": sorted(sample.answers), "hops": sample.hops})
    with open(ROOT / "dataset.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    (ROOT / "README.txt").write_text(
        "Synthetic StepGame smoke corpus: 50 template stories with hand-modelled extraction\n"
        "completions keyed for the default client settings. Regenerate with\n"
        "tools/build_fixture_corpus.py.\n",
        encoding="utf-8",
    )
    print(f"wrote {len(rows)} samples to {ROOT}")


if __name__ == "__main__":
    main()
