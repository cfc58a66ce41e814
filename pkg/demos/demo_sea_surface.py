"""Synthesize random sea surfaces and report their height statistics.

    python demos/demo_sea_surface.py [--u10 13]
"""

import argparse

import numpy as np

from w2a import seastate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--u10", type=float, default=13.0)
    ap.add_argument("--realizations", type=int, default=5)
    args = ap.parse_args()

    params = seastate.JonswapParams.for_wind(args.u10)
    var_expected = float(np.sum(
        0.5 * seastate.synthesize_surface(params, seed=0).amp ** 2))
    print(f"U10 = {args.u10} m/s, expected Var[z] = {var_expected:.4f} m^2, "
          f"significant height 4*sqrt(Var) = {4 * np.sqrt(var_expected):.2f} m")
    for r in range(args.realizations):
        surf = seastate.synthesize_surface(params, seed=r)
        _, _, z = seastate.heightfield(surf, extent=60.0, step=0.5)
        print(f"realization {r}: Var[z] = {z.var():.4f} m^2, "
              f"peak-to-peak = {z.max() - z.min():.2f} m")


if __name__ == "__main__":
    main()
