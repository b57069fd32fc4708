#!/usr/bin/env python3
"""Compare interior and boundary error generation across step counts.

The glue schedule is probed on the doubling ladder 100..1600 where its
boundary terms decay superpolynomially. The linear control uses the
ladder 400..6400: its boundary term only settles onto the 1/td envelope
from a few hundred steps up.
"""

import json
import pathlib
import sys

from adiawalk.cli import main

RESULTS = pathlib.Path("results")
RUNS = (
    ("volterra_glue", {"schedule": "glue", "td_list": [100, 200, 400, 800, 1600]}),
    ("volterra_linear", {"schedule": "linear", "td_list": [400, 800, 1600, 3200, 6400]}),
)


def run() -> int:
    RESULTS.mkdir(exist_ok=True)
    for name, overrides in RUNS:
        cfg = RESULTS / f"{name}.json"
        cfg.write_text(json.dumps({
            "experiment": "volterra",
            "parameters": overrides,
            "output": str(RESULTS / f"{name}.csv"),
        }, indent=2) + "\n")
        code = main(["volterra", "--config", str(cfg)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
