"""Inner integral of the three-vertex volume difference as a function of theta3.

Prints the inner integral on a grid (positive for moderate theta3, negative
far out) and the exponentially weighted double integral.
"""
import numpy as np

from netgeo import lowdim


def main():
    for t in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3, 3e3, 1e4, 1e5]:
        print(f"theta3 = {t:8.0e}   inner = {lowdim.remark4_inner(t).value:+.6e}")
    rep = lowdim.remark4_check()
    print(f"double integral = {rep.value:.10f} +- {rep.result.abs_error_bound:.1e} "
          f"over {rep.theta3.size} grid points")
    sign_change = rep.theta3[np.flatnonzero(np.diff(np.sign(rep.inner)))]
    print(f"inner changes sign between grid points {sign_change}")


if __name__ == "__main__":
    main()
