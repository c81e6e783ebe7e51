"""Two-vertex volumes by Bessel-function quadrature, against Monte Carlo.

Prints the raw integrals for the empty and single-edge networks, the root
and integral of their difference kernel phi, the lower-bound chain, and the
normalized quadrature next to Monte Carlo estimates at calibrated kappa(2).
"""
import argparse

from netgeo import lowdim
from netgeo.graph import Network, clique_network
from netgeo.volume import McConfig, calibrate_kappa, estimate_volume


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=4_000_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    d = lowdim.v2_diag_quadrature()
    o = lowdim.v2_offdiag_quadrature()
    print(f"empty  (raw) {d.value:.12f} +- {d.abs_error_bound:.1e}  ({d.evaluations} evaluations)")
    print(f"edge   (raw) {o.value:.12f} +- {o.abs_error_bound:.1e}  ({o.evaluations} evaluations)")
    print(f"difference   {d.value - o.value:.12f}")

    vi = lowdim.varphi_integral()
    print(f"phi root y0 = {vi.root:.10f}, phi(y0) = {lowdim.varphi(vi.root):.1e}")
    print(f"Int phi = {vi.value:.10f}  (negative part {vi.negative_part.value:.3e})")
    chain, pointwise = lowdim.varphi_bound_chain()
    print(f"bound chain {chain.positive_part:.6f} > {chain.exponential_bound:.6f} > "
          f"{chain.k0_bound:.3e} > {chain.negative_part:.3e}: {chain.holds and pointwise}")

    cfg = McConfig(samples=args.samples, seed=args.seed)
    kappa = calibrate_kappa(2, cfg)
    mc_cfg = McConfig(samples=args.samples, seed=args.seed + 1)
    for name, net, quad in (
        ("empty", Network.empty(2), lowdim.v2_diag_quadrature(True, kappa.kappa)),
        ("edge", clique_network(2, 2), lowdim.v2_offdiag_quadrature(True, kappa.kappa)),
    ):
        est = estimate_volume(net, kappa.kappa, mc_cfg)
        print(f"{name:5s} normalized quadrature {quad.value:.5f}   Monte Carlo {est.value:.5f} +- {est.stderr:.5f}")


if __name__ == "__main__":
    main()
