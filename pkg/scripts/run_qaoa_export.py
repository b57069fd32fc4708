#!/usr/bin/env python3
"""Export the alternating-operator angles induced by the search schedule."""

import json
import pathlib
import sys

from adiawalk.cli import main

RESULTS = pathlib.Path("results")


def run() -> int:
    RESULTS.mkdir(exist_ok=True)
    cfg = RESULTS / "qaoa_angles.json"
    cfg.write_text(json.dumps({
        "experiment": "qaoa-export",
        "parameters": {"n": 1024, "m": 1, "p": 1.0, "t": 64},
        "output": str(RESULTS / "qaoa_angles.csv"),
    }, indent=2) + "\n")
    return main(["qaoa-export", "--config", str(cfg)])


if __name__ == "__main__":
    sys.exit(run())
