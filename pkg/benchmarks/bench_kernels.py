"""Timing comparison of the compiled and pure-python kernel backends.

Runs the four pair-summation kernels (interaction-matrix assembly,
matrix-free matvec, scattered-field evaluation, lattice Green sum) on
matched inputs through both backends, prints a table with the best-of
timings and speedups, and cross-checks that the backends agree.

Usage:
    python benchmarks/bench_kernels.py [--sizes 400 900 1600] [--repeats 3]
"""

import argparse
import time

import numpy as np

from coopdipole._kernels import (
    apply_interaction,
    available_backends,
    coupling_matrix,
    lattice_green_sum,
    scattered_field_raw,
)
from coopdipole.infinite import LatticeSpec, _lattice_sites

rng = np.random.default_rng(11)


def _cloud(n):
    """Jittered-grid atom positions: random but never closer than 0.1."""
    side = int(np.ceil(n ** (1.0 / 3.0)))
    axis = 0.3 * np.arange(side)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    pts = grid.reshape(-1, 3)[:n]
    pts = pts + rng.uniform(-0.1, 0.1, size=pts.shape)
    return np.ascontiguousarray(pts)


def best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[400, 900, 1600],
                        help="atom counts for assembly and matvec")
    parser.add_argument("--points", type=int, default=2000,
                        help="field evaluation points")
    parser.add_argument("--m-max", type=int, default=200,
                        help="lattice truncation half-width")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends available: {backends}")
    if len(backends) < 2:
        print("only one backend present; timing it without comparison")
    cases = []

    for n in args.sizes:
        pos = _cloud(n)
        g = rng.normal(size=n) + 1j * rng.normal(size=n)
        w = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
        cases.append((f"coupling_matrix   N={n:5d}",
                      lambda pos=pos, g=g, b=None: coupling_matrix(pos, g, backend=b)))
        cases.append((f"apply_interaction N={n:5d}",
                      lambda pos=pos, w=w, b=None: apply_interaction(pos, w, backend=b)))

    pos = _cloud(args.sizes[-1])
    w = rng.normal(size=(len(pos), 3)) + 1j * rng.normal(size=(len(pos), 3))
    pts = rng.uniform(-8, 8, size=(args.points, 3))
    pts[:, 2] += 20.0  # keep clear of the atoms
    cases.append((f"scattered_field   P={args.points}, N={len(pos)}",
                  lambda pos=pos, w=w, pts=pts, b=None:
                  scattered_field_raw(pts, pos, w, backend=b)))

    sites = _lattice_sites(LatticeSpec(0.4, 0.8, args.m_max))
    cases.append((f"lattice_green_sum M={len(sites)}",
                  lambda sites=sites, b=None:
                  lattice_green_sum(sites, (0.0, 0.0), eta=0.1, backend=b)))

    header = f"{'kernel':<34}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}{'max rel dev':>14}"
    print(header)
    print("-" * len(header))
    for label, call in cases:
        times, outs = [], []
        for b in backends:
            t, out = best_of(lambda: call(b=b), args.repeats)
            times.append(t)
            outs.append(np.asarray(out))
        line = f"{label:<34}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(backends) == 2:
            scale = max(np.abs(outs[0]).max(), 1e-300)
            dev = float(np.abs(outs[0] - outs[1]).max() / scale)
            line += f"{times[1] / times[0]:>9.1f}x{dev:>14.2e}"
        print(line)


if __name__ == "__main__":
    main()
