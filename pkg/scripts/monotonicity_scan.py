"""Consecutive simplex volume margins for n = 2..N, in combined standard errors."""
import argparse

from netgeo.volume import McConfig, monotonicity_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--samples", type=int, default=4_000_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = McConfig(samples=args.samples, seed=args.seed)
    for n in range(2, args.max_n + 1):
        pairs = monotonicity_check(n, cfg, threads=args.threads)
        cells = "  ".join(f"{p.k}->{p.k + 1}: {p.margin:.4f} ({p.sigmas:.1f})" for p in pairs)
        print(f"n={n}  {cells}")


if __name__ == "__main__":
    main()
