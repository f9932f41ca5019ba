"""Time the numba kernels against their numpy twins on identical inputs.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat R] [--depth N]

Each kernel is run once to trigger compilation, then timed ``R`` times; the
best time is reported along with the max absolute difference between paths.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ncruelle import _kernels
from ncruelle import potential as pot
from ncruelle import transfer as tr
from ncruelle.algebra import Algebra
from ncruelle.classical import bernoulli
from ncruelle.cylfun import CylinderFunction
from ncruelle.sft import TransitionMatrix


def _best(fn, args, repeat):
    fn(*args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(depth: int):
    rng = np.random.default_rng(0)
    phi = pot.make_depolarizing(0.5, TransitionMatrix.golden_mean())
    g = CylinderFunction.random(phi.algebra, phi.shift, depth, rng, symmetric=True)
    _, phi_idx, g_idx, mask = tr._index_tables(phi.shift, phi.depth, depth)
    yield ("transfer_apply", (phi.maps, g.values, phi_idx, g_idx, mask))

    h = CylinderFunction.random(Algebra.matrix(2), TransitionMatrix.full(2), min(depth, 10), rng,
                                symmetric=True)
    yield ("pairwise_max", (h.values, h.shift.words(h.depth), 0.5, _kernels.MATRIX_KIND, 2))

    mu = bernoulli(TransitionMatrix.full(2), [0.3, 0.7])
    u = rng.random((1 << 16, 12))
    yield ("markov_sample", (u, np.cumsum(mu.pi), np.cumsum(mu.M, axis=1)))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--depth", type=int, default=14)
    args = parser.parse_args(argv)
    if not _kernels.NUMBA_KERNELS:
        print("numba is not installed; only the numpy path is available")
    print(f"{'kernel':<16} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, kargs in cases(args.depth):
        t_np, out_np = _best(_kernels.NUMPY_KERNELS[name], kargs, args.repeat)
        if name in _kernels.NUMBA_KERNELS:
            t_nb, out_nb = _best(_kernels.NUMBA_KERNELS[name], kargs, args.repeat)
            diff = float(np.max(np.abs(np.asarray(out_np, float) - np.asarray(out_nb, float))))
            print(f"{name:<16} {t_np:>11.4f} {t_nb:>11.4f} {t_np / t_nb:>8.1f} {diff:>11.2e}")
        else:
            print(f"{name:<16} {t_np:>11.4f} {'-':>11} {'-':>8} {'-':>11}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
