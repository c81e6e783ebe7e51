"""Tail of the integrand for the complete graph on n vertices.

Large cliques produce rare, large integrand values (det C of order one while
the cofactors are large). This prints the largest draws, the Hill estimate
of the tail index and how the running standard error behaves; an index near
or below 2 means the sample variance converges slowly or not at all.
"""
import argparse

import numpy as np

from netgeo.fisher import _core_batch
from netgeo.graph import clique_network


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--samples", type=int, default=4_000_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    adj = clique_network(args.n, args.n).adjacency.astype(np.float64)
    theta = np.random.default_rng(args.seed).exponential(size=(args.samples, args.n))
    values = np.empty(args.samples)
    _core_batch(adj, theta, values)

    top = np.sort(values)[::-1]
    print(f"mean {values.mean():.6e}, largest {top[:5]}")
    for k in (100, 300, 1000, 3000):
        if 5 * k > np.count_nonzero(values):
            break  # past the tail of the accepted draws
        print(f"Hill tail index (top {k}): {1.0 / np.mean(np.log(top[:k] / top[k])):.2f}")
    for m in np.geomspace(1e4, args.samples, 6).astype(int):
        v = values[:m]
        print(f"{m:>9d} samples: mean {v.mean():.5e}  relative stderr {v.std(ddof=1) / np.sqrt(m) / v.mean():.3f}")
    worst = np.argsort(values)[::-1][:3]
    print("theta at the largest values:")
    print(theta[worst])


if __name__ == "__main__":
    main()
