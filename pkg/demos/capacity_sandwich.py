"""Capacity profile of a measure and the Poincaré constant it brackets.

For the standard Gaussian the Poincaré constant is 1; the capacity profile
gives an interval of width ratio 4 that must contain it. A double well is
shown for contrast.
"""

import numpy as np

from spilab import capacity, measure


def sandwich(name, m):
    grid = np.concatenate([np.geomspace(1e-8, 1e-3, 11), [0.5]])
    prof = capacity.capacity_profile(m, grid)
    lo, hi = capacity.poincare_from_mc(prof)
    print(f"{name:12s} C_P in [{lo:.4f}, {hi:.4f}]")
    return prof


def main():
    prof = sandwich("gaussian", measure.build_measure(measure.gaussian(), (-10.0, 10.0), 2000))
    sandwich("double well", measure.build_measure(measure.double_well(), None, 2001))
    print("small-kappa capacities against log(1/kappa)/32:")
    for k, c in zip(prof.kappa[:11:2], prof.c_kappa[:11:2]):
        print(f"  kappa = {k:.1e}  C_kappa = {c:.4f}  log(1/kappa)/32 = {np.log(1 / k) / 32:.4f}")


if __name__ == "__main__":
    main()
