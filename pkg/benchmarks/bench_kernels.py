#!/usr/bin/env python3
"""Compare the numba and numpy energy/gradient kernels on disk meshes.

Usage: python3 benchmarks/bench_kernels.py [--levels 3 4 5] [--repeat 20] [--p 2]

Both paths run on identical inputs; the script checks they agree before
timing and prints one row per mesh level.
"""

import argparse
import time

import numpy as np

from harmball._accel import HAS_NUMBA
from harmball.chart import WarpedChart
from harmball.energy import _metric, evaluation_points
from harmball.gluing import build_euclidean_end
from harmball.kernels import _density_nb, _density_np, _gradient_nb, _gradient_np
from harmball.mesh import make_disk_mesh
from harmball.warping import sine


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(levels, repeat, p):
    chart = WarpedChart(build_euclidean_end(sine(), 1.0).warping(), 2)
    rng = np.random.default_rng(0)
    print(f"{'level':>5} {'cells':>8} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max diff':>10}")
    for level in levels:
        d = make_disk_mesh(1.0, level)
        u = 0.5 * d.vertices + 0.05 * rng.standard_normal((d.n_vertices, 2))
        H, dH = _metric(chart, evaluation_points(d, u), True)
        args = (d.cells, d.grads, d.ginv, d.weights, u, H, dH, p)

        def np_path():
            _density_np(d.cells, d.grads, d.ginv, u, H)
            return _gradient_np(*args)

        def nb_path():
            _density_nb(d.cells, d.grads, d.ginv, u, H)
            return _gradient_nb(*args)

        ref = np_path()
        t_np = best_of(np_path, repeat)
        if HAS_NUMBA:
            diff = float(np.abs(nb_path() - ref).max())  # also triggers compilation
            t_nb = best_of(nb_path, repeat)
            print(f"{level:>5} {d.n_cells:>8} {1e3 * t_np:>10.3f} {1e3 * t_nb:>10.3f} {t_np / t_nb:>8.2f} {diff:>10.2e}")
        else:
            print(f"{level:>5} {d.n_cells:>8} {1e3 * t_np:>10.3f} {'n/a':>10} {'n/a':>8} {'n/a':>10}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--p", type=float, default=2.0)
    ns = ap.parse_args()
    run(ns.levels, ns.repeat, ns.p)


if __name__ == "__main__":
    main()
