#!/usr/bin/env python3
"""Grid-convergence study of the discrete boundary condition.

For each fixture and slice level, measures the maximum distance from filled
boundary cells to the sampled zero set of ``phi - c`` at a sequence of
resolutions.  The bound should scale linearly with the cell size: each
halving of the cells should roughly halve the distance.

Usage: python scripts/grid_convergence.py [--resolutions 17,34,68]
"""

import argparse

from leviflat import boundary_check, fill_slice, fixture


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--resolutions", type=str, default="17,34,68")
    args = ap.parse_args()
    resolutions = [int(v) for v in args.resolutions.split(",")]

    cases = [
        ("horned_sphere", 0.5),
        ("horned_sphere", -0.5),
        ("quadric_elliptic", 1.0),
        ("quadric_saddle", -0.8),
    ]
    print(f"{'fixture':<18} {'level':>6} " +
          " ".join(f"res {r:>4}" for r in resolutions) + "   ratios")
    for name, level in cases:
        spec = fixture(name)
        bounds = []
        for res in resolutions:
            fill = fill_slice(spec, level, resolution=res)
            bounds.append(boundary_check(fill).max_distance)
        ratios = [bounds[i] / bounds[i + 1] for i in range(len(bounds) - 1)]
        print(f"{name:<18} {level:>6.2f} " +
              " ".join(f"{b:8.5f}" for b in bounds) + "   " +
              ", ".join(f"{r:.2f}" for r in ratios))


if __name__ == "__main__":
    main()
