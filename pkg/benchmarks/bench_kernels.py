"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import math
import timeit

import numpy as np

from nonlocality import _pykernels
from nonlocality.measurement import correlation_table
from nonlocality.states import NoiseModel, apply_noise, phi_minus

try:
    from nonlocality import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    rho = np.asarray(apply_noise(phi_minus(), NoiseModel(0.9)))
    rho_re = np.ascontiguousarray(rho.real)
    ta, tb = rng.uniform(0, math.pi, (2, 42))
    big_a, big_b = rng.uniform(0, math.pi, (2, 100_000))
    grid = np.arange(24) * (math.pi / 24)
    table = np.ascontiguousarray(correlation_table(rho, grid, grid))
    return {
        "joint_probs, 42 ladder settings": ("joint_probs", (rho_re, ta, tb)),
        "joint_probs, 1e5 settings": ("joint_probs", (rho_re, big_a, big_b)),
        "chsh_grid_max, 24^4 cells": ("chsh_grid_max", (table,)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'case':34s}" + "".join(f"{b:>14s}" for b in backends) + "     speedup")
    for name, (fn, fargs) in cases().items():
        times = {}
        for b, mod in backends.items():
            f = getattr(mod, fn)
            n, _ = timeit.Timer(lambda: f(*fargs)).autorange()
            times[b] = min(timeit.repeat(lambda: f(*fargs), number=n, repeat=args.repeat)) / n
        row = f"{name:34s}" + "".join(f"{times[b] * 1e6:12.1f}us" for b in backends)
        if "cython" in times:
            row += f"  {times['python'] / times['cython']:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
