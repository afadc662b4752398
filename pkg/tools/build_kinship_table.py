"""Regenerate src/pathreason/assets/kinship_rules.txt from random family trees.

Every chained pair of surface relations observed in the sampled trees is
recorded with the set of outcomes it produced. Entries whose chain ever
lands on a relation outside the 24-label vocabulary are written as
PARTIAL lines: the listed outcomes are possible but not exhaustive.

    python3 tools/build_kinship_table.py [--trees N] [--seed S]
"""

from __future__ import annotations

import argparse
import hashlib
from collections import defaultdict
from pathlib import Path

import numpy as np

from pathreason.genealogy import random_family
from pathreason.vocab import CLUTRR_RELATIONS, _CLUTRR_INVERSE, kin_gender

OUT = Path(__file__).resolve().parents[1] / "src" / "pathreason" / "assets" / "kinship_rules.txt"


def collect(trees: int, seed: int):
    outcomes: dict[tuple[str, str, str], set[str]] = defaultdict(set)
    partial: set[tuple[str, str, str]] = set()
    for i in range(trees):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        tree = random_family(
            rng,
            generations=int(rng.integers(3, 6)),
            max_people=int(rng.integers(12, 45)),
            marry_prob=float(rng.uniform(0.5, 0.95)),
            inlaw_parents_prob=float(rng.uniform(0.2, 0.9)),
        )
        pairs = tree.related_pairs()
        out_of = defaultdict(list)
        for (x, y), rel in pairs.items():
            out_of[x].append((y, rel))
        for (x, y), r1 in pairs.items():
            for z, r2 in out_of[y]:
                if z == x:
                    continue
                key = (r1, r2, tree.people[z].gender)
                result = pairs.get((x, z))
                if result is None:
                    partial.add(key)
                else:
                    outcomes[key].add(result)
    return outcomes, partial


def render(outcomes, partial, trees: int, seed: int) -> str:
    lines = [
        "# Kinship composition table over the 24 surface relations.",
        "# COMPOSE r1 r2 g -> r,...   y is x's r1, z is y's r2, z has gender g; z is x's r",
        "# PARTIAL r1 r2 g -> r,...   as COMPOSE, but the chain may also leave the vocabulary",
        "# INVERSE r g -> r'          if y is x's r and x has gender g, x is y's r'",
        f"# generated by tools/build_kinship_table.py --trees {trees} --seed {seed}",
        "",
    ]
    for rel in CLUTRR_RELATIONS:
        male, female = _CLUTRR_INVERSE[rel]
        lines.append(f"INVERSE {rel} male -> {male}")
        lines.append(f"INVERSE {rel} female -> {female}")
    lines.append("")
    order = {r: i for i, r in enumerate(CLUTRR_RELATIONS)}
    keys = sorted(set(outcomes) | partial, key=lambda k: (order[k[0]], order[k[1]], k[2]))
    for key in keys:
        r1, r2, g = key
        assert g == kin_gender(r2)
        results = sorted(outcomes.get(key, ()), key=order.get)
        if not results:
            continue
        kind = "PARTIAL" if key in partial else "COMPOSE"
        lines.append(f"{kind} {r1} {r2} {g} -> {','.join(results)}")
    return "\n".join(lines) + "\n"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trees", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=20240817)
    parser.add_argument("--out", type=Path, default=OUT)
    args = parser.parse_args()
    outcomes, partial = collect(args.trees, args.seed)
    text = render(outcomes, partial, args.trees, args.seed)
    args.out.write_text(text, encoding="utf-8")
    digest = hashlib.sha256(text.encode()).hexdigest()[:12]
    n_compose = text.count("\nCOMPOSE ")
    n_partial = text.count("\nPARTIAL ")
    print(f"wrote {args.out} ({n_compose} complete, {n_partial} partial entries, sha256 {digest})")


if __name__ == "__main__":
    main()
