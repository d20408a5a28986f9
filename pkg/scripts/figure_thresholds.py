#!/usr/bin/env python3
"""Threshold curves vs tensor order (spherical and Rademacher priors).

Writes results/thresholds_{prior}.csv with per-d columns: the rigorous
lower/upper bounds, the noise injective-norm limit, the replica prediction
and the large-d expansions.  Plot lambda-vs-d from these tables to get the
phase-diagram comparison figures.
"""

import pathlib
import sys

from spiked_tensor.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"


def run(prior: str, d_range: str) -> None:
    OUT.mkdir(exist_ok=True)
    path = OUT / f"thresholds_{prior}.csv"
    code = main(
        [
            "thresholds", "--prior", prior, "--d", d_range,
            "--replica", "--asymptotics", "--out", str(path),
        ]
    )
    if code != 0:
        sys.exit(code)
    print(f"wrote {path}")


if __name__ == "__main__":
    d_range = sys.argv[1] if len(sys.argv) > 1 else "2..30"
    run("spherical", d_range)
    run("rademacher", d_range)
