"""Ratio of sup_x of the square function to the Fourier-Lebesgue norm over a
random family, for r = 2 and r = 4.

    python scripts/square_function_family.py --count 20
"""

import argparse
import math

import numpy as np

from schrolab.norms import NormSpec, fourier_lebesgue_norm
from schrolab.spectral import SpectralGrid, random_bandlimited
from schrolab.wiener import square_function


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--bandwidth", type=float, default=32.0)
    args = ap.parse_args()

    grid = SpectralGrid(1, 64 * math.pi, 4096)
    ratios = {2.0: [], 4.0: []}
    for i in range(args.count):
        f = random_bandlimited(grid, np.random.default_rng(i), args.bandwidth, smooth=False)
        top = square_function(f).values.real.max()
        for r in ratios:
            ratios[r].append(top / fourier_lebesgue_norm(f, NormSpec(0, r)))
    for r, v in ratios.items():
        v = np.array(v)
        print(f"r = {r:g}: C in [{v.min():.4f}, {v.max():.4f}], variation {(v.max() - v.min()) / v.max():.1%}")


if __name__ == "__main__":
    main()
