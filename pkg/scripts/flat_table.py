"""Pointwise data of the flat C^4 reduction: ν, Gram data, Q and the formula residuals.

    python3 scripts/flat_table.py --points 10 --seed 0
"""
import argparse
from dataclasses import asdict, dataclass

import numpy as np

from spin7torus import flat
from spin7torus.reduction import reduce_triple


@dataclass
class TableConfig:
    points: int = 10
    seed: int = 0
    radius: float = 2.0


def rows(cfg: TableConfig):
    pts = flat.sample_points(np.random.default_rng(cfg.seed), cfg.points, radius=cfg.radius)
    for p in pts:
        st = reduce_triple(flat.flat_frame(p))
        xi = flat.xi_coords(p)
        G = np.asarray(st.G, dtype=float)
        sig = flat.sigma_point_residuals(p)
        curv = flat.curvature_point_residuals(p)
        yield {
            "t": xi.t,
            "v": xi.v,
            "w": xi.w,
            "f": G[0, 1],
            "h": float(st.h),
            "q12": float(np.asarray(st.Q, dtype=float)[0, 1]),
            "sigma_res": sig["sigma"],
            "F_res": curv["F"],
            "asd": curv["asd"],
            "QA": curv["QA"],
        }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(TableConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    cfg = TableConfig(**vars(ap.parse_args()))
    print(f"{'t':>8} {'v1':>7} {'v2':>7} {'v3':>7} {'w':>7} {'f':>7} {'h':>8} {'q12':>8} "
          f"{'sigma':>9} {'F':>9} {'|F-|':>8} {'QA':>9}")
    for r in rows(cfg):
        print(f"{r['t']:8.4f} {r['v'][0]:7.3f} {r['v'][1]:7.3f} {r['v'][2]:7.3f} {r['w']:7.3f} {r['f']:7.3f} "
              f"{r['h']:8.3f} {r['q12']:8.4f} {r['sigma_res']:9.2e} {r['F_res']:9.2e} {r['asd']:8.4f} "
              f"{r['QA']:9.2e}")


if __name__ == "__main__":
    main()
