"""Regenerate data/paths_200.csv, the 200-path two-stage sample.

Paths are a Gaussian random walk started at 0: the stage-2 value is
N(0, 1), the stage-3 value adds a second N(0, 1) increment. Seed 20100401.

    python scripts/make_sample_paths.py data/paths_200.csv
"""
import csv
import sys

import numpy as np

SEED = 20100401
N_PATHS = 200


def sample_paths(n_paths=N_PATHS, seed=SEED):
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.normal(0.0, 1.0, size=(n_paths, 2)), axis=1)


def main(out):
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["stage2", "stage3"])
        for row in sample_paths():
            writer.writerow([f"{v:.6f}" for v in row])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/paths_200.csv")
