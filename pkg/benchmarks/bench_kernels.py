"""Compare the compiled and numpy stencil kernels.

    python benchmarks/bench_kernels.py [--nodes 17 33 65] [--repeat 20]

Prints the time per call (best of five batches) of the gradient pair and its transpose on
Euclidean R^3 and Heisenberg H^1 grids, the speed-up, and the largest
difference between the two backends.
"""
import argparse
import timeit

import numpy as np

from stratlab.grid import Grid
from stratlab.group import make_euclidean, make_heisenberg
from stratlab.kernels import backends


def bench(grid, impls, repeat, rng):
    u = rng.random(grid.size)
    v = rng.random((2, grid.group.n1, grid.size))
    args = (grid._pk, grid._pj, grid._coef, grid.shape, grid.h)
    rows = {}
    for name, mod in impls.items():
        # best of 5 batches after a warm-up batch
        t_grad = min(timeit.repeat(lambda: mod.gradient_pair(u, *args, grid.group.n1),
                                   number=repeat, repeat=6)[1:])
        t_tr = min(timeit.repeat(lambda: mod.gradient_pair_T(v, *args), number=repeat, repeat=6)[1:])
        rows[name] = (t_grad / repeat, t_tr / repeat,
                      mod.gradient_pair(u, *args, grid.group.n1), mod.gradient_pair_T(v, *args))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[17, 33, 65])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    impls = backends()
    rng = np.random.default_rng(args.seed)
    print(f"backends: {', '.join(impls)}")
    print(f"{'group':<10} {'nodes':>6} {'backend':<8} {'grad [ms]':>10} {'grad^T [ms]':>12} {'speed-up':>9}")
    for label, group, box in (("R^3", make_euclidean(3), (0.0, 1.0)),
                              ("H^1", make_heisenberg(1), (-1.0, 1.0))):
        for n in args.nodes:
            grid = Grid(group, [box] * 3, [n] * 3)
            rows = bench(grid, impls, args.repeat, rng)
            base = rows["python"]
            for name, (tg, tt, g, gt) in rows.items():
                speed = (base[0] + base[1]) / (tg + tt)
                print(f"{label:<10} {n:>6} {name:<8} {1e3 * tg:10.3f} {1e3 * tt:12.3f} {speed:9.2f}")
            if "cython" in rows:
                c = rows["cython"]
                diff = max(np.abs(c[2] - base[2]).max(), np.abs(c[3] - base[3]).max())
                print(f"{'':<10} {'':>6} max |cython - python| = {diff:.2e}")


if __name__ == "__main__":
    main()
