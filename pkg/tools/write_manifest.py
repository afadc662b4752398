"""Rewrite src/pathreason/assets/manifest.json with the sha256 of every prompt and rule asset."""

from __future__ import annotations

import json
from pathlib import Path

from pathreason.extraction import asset_hashes

OUT = Path(__file__).resolve().parents[1] / "src" / "pathreason" / "assets" / "manifest.json"

if __name__ == "__main__":
    OUT.write_text(json.dumps({"sha256": asset_hashes()}, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {OUT}")
