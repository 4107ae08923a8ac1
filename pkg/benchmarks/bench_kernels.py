"""Time the compiled kernels against the NumPy fallback and check they agree.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from latkpp._kernels import backends


def cases(quick: bool):
    n = 601 if quick else 2001
    rng = np.random.default_rng(0)
    a = np.ones(n)
    a[n // 2] = 2.0
    u0 = np.clip(rng.uniform(0, 1, n), 0, 1)
    diag = a - 2.0
    x0 = np.ones(n)
    steps = 200 if quick else 1000

    def rk4(mod):
        u = u0.copy()
        mod.rk4_lattice(u, a, 1.0, 1.0, 1.0, 0.0, 0.05, steps)
        return u

    return {
        f"rk4_lattice n={n} steps={steps}": rk4,
        "ive_sequence nmax=400 t=150": lambda mod: mod.ive_sequence(400, 150.0),
        f"sturm_largest n={n}": lambda mod: mod.sturm_largest(diag, -4.0, 2.0, 200),
        "power_iterate n=129": lambda mod: mod.power_iterate(diag[: 129], 4.0, x0[: 129], 1e-13, 1e-10, 500000)[0],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)

    mods = backends()
    if "cython" not in mods:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':36s} " + " ".join(f"{name:>12s}" for name in mods) + "     speedup   max |diff|")
    for label, fn in cases(args.quick).items():
        best, out = {}, {}
        for name, mod in mods.items():
            out[name] = np.asarray(fn(mod))
            best[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        times = " ".join(f"{best[n] * 1e3:10.2f}ms" for n in mods)
        if "cython" in mods:
            speed = best["python"] / best["cython"]
            diff = float(np.max(np.abs(out["python"] - out["cython"])))
            print(f"{label:36s} {times} {speed:10.1f}x   {diff:.1e}")
        else:
            print(f"{label:36s} {times}")


if __name__ == "__main__":
    main()
