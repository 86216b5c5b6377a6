#!/usr/bin/env python3
"""Regenerate the reference datasets into data/ with the default settings.

Produces:
    data/two_level_grid.csv    no-emission probability and fidelity grid
    data/four_level_grid.csv   same for the Raman scheme
    data/bell_surface.csv      |B| over (pulse area, angle step)
    data/pipeline_report.json  simulated Bell experiment, ideal injection
"""

import pathlib
import sys

from cavitybell.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def run() -> int:
    OUT.mkdir(exist_ok=True)
    jobs = sys.argv[1] if len(sys.argv) > 1 else "1"
    steps = [
        ["fig2", "--out", str(OUT / "two_level_grid.csv"), "--jobs", jobs],
        ["fig6", "--out", str(OUT / "four_level_grid.csv"), "--jobs", jobs],
        ["bell-surface", "--out", str(OUT / "bell_surface.csv")],
        [
            "pipeline", "--out", str(OUT / "pipeline_report.json"),
            "--seed", "2024",
            "--set", "run.model=ideal", "--set", "run.n_runs=100000",
        ],
    ]
    for argv in steps:
        code = main(argv)
        if code != 0:
            print(f"step {argv[0]} failed with exit code {code}", file=sys.stderr)
            return code
        print(f"wrote {argv[2]}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
