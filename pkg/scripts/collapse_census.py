"""Compare the listed collapse constraints with the actual orbit dimension on the zero level.

Samples Gaussian-integer points of C^4 with at least one coordinate zero
(so w = t = 0), classifies Ξ with and without the refinement, and counts
agreement with the rank of the torus generators.

    python3 scripts/collapse_census.py --samples 20000 --seed 1
"""
import argparse
from collections import Counter
from dataclasses import asdict, dataclass

import numpy as np

from spin7torus import flat

RANK = {"point": 0, "circle": 1, "two-torus": 2, "free": 3}


@dataclass
class CensusConfig:
    samples: int = 20000
    seed: int = 1
    bound: int = 2


def census(cfg: CensusConfig):
    rng = np.random.default_rng(cfg.seed)
    literal, refined = Counter(), Counter()
    example = None
    for _ in range(cfg.samples):
        z = [complex(*rng.integers(-cfg.bound, cfg.bound + 1, 2)) for _ in range(4)]
        for i in rng.choice(4, rng.integers(1, 5), replace=False):
            z[i] = 0
        p = flat.C4Point.from_complex(z)
        xi = flat.xi_coords(p)
        rank = flat.orbit_rank(p)
        a = flat.collapse_classify(xi)
        literal[(a, rank)] += 1
        refined[(flat.collapse_classify(xi, refined=True), rank)] += 1
        if example is None and RANK[a] != rank:
            example = (z, xi.v, a, rank)
    return literal, refined, example


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(CensusConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    cfg = CensusConfig(**vars(ap.parse_args()))
    literal, refined, example = census(cfg)
    for label, counts in (("listed constraints", literal), ("refined", refined)):
        bad = sum(n for (s, r), n in counts.items() if RANK[s] != r)
        print(f"{label}: {bad} of {cfg.samples} disagree with the orbit rank")
        for (s, r), n in sorted(counts.items(), key=lambda kv: (RANK[kv[0][0]], kv[0][1])):
            print(f"  {s:<10} rank {r}: {n}")
    if example:
        z, v, s, r = example
        print(f"first disagreement: z = {z}, v = {tuple(round(x, 3) for x in v)}, label {s}, rank {r}")


if __name__ == "__main__":
    main()
