#!/usr/bin/env python3
"""Find minimal search step counts under the power schedule.

First across database sizes (four octaves at a single marked item), then
across marked-item counts at a fixed size.
"""

import json
import pathlib
import sys

from adiawalk.cli import main

RESULTS = pathlib.Path("results")
RUNS = (
    ("grover_scaling_n", {"n_list": [256, 4096, 65536, 1048576], "m_list": [1]}),
    ("grover_scaling_m", {"n_list": [4096], "m_list": [1, 2, 4, 8]}),
)


def run() -> int:
    RESULTS.mkdir(exist_ok=True)
    for name, overrides in RUNS:
        cfg = RESULTS / f"{name}.json"
        cfg.write_text(json.dumps({
            "experiment": "grover-scaling",
            "parameters": overrides,
            "output": str(RESULTS / f"{name}.csv"),
        }, indent=2) + "\n")
        code = main(["grover-scaling", "--config", str(cfg)])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
