#!/usr/bin/env python3
"""Regenerate the per-eps minimal-gap tables for both toy models."""

import json
import pathlib
import sys

from adiawalk.cli import main

RESULTS = pathlib.Path("results")


def run() -> int:
    RESULTS.mkdir(exist_ok=True)
    for model in ("toy1", "toy2"):
        cfg = RESULTS / f"gap_table_{model}.json"
        cfg.write_text(json.dumps({
            "experiment": "gap-table",
            "parameters": {"model": model},
            "output": str(RESULTS / f"gap_table_{model}.csv"),
        }, indent=2) + "\n")
        code = main(["gap-table", "--config", str(cfg)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
