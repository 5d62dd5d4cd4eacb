"""Rate at which U(t) f -> f for gaussian and band-limited data.

    python scripts/convergence_rate.py --tmin 1e-4 --tmax 1e-2
"""

import argparse

import numpy as np

from schrolab.experiments import bandlimited_error_bound, convergence_sweep
from schrolab.norms import Ball
from schrolab.spectral import AnalyticSignal, SpectralGrid, materialize, random_bandlimited


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tmin", type=float, default=1e-4)
    ap.add_argument("--tmax", type=float, default=1e-2)
    ap.add_argument("--count", type=int, default=9)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    grid = SpectralGrid(1, 40.0, 1024)
    times = np.geomspace(args.tmax, args.tmin, args.count)
    data = {
        "gaussian": materialize(AnalyticSignal.gaussian(), grid),
        "band-limited": random_bandlimited(grid, np.random.default_rng(args.seed), 6.0),
    }
    for name, f in data.items():
        sw = convergence_sweep(f, times, Ball((0.0,), 5.0), (1e-4, 1e-3))
        print(f"{name}: log-log slope {sw.rate():.4f}")
        for t, e, lv in zip(sw.times, sw.sup_errors, sw.level_measures):
            print(f"    t {t:.2e}  sup err {e:.3e}  bound {bandlimited_error_bound(f, t):.3e}  "
                  f"|E| {lv[0]:.3f} {lv[1]:.3f}")


if __name__ == "__main__":
    main()
