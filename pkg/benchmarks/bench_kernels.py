"""Time one implicit flow step with the compiled and the numpy kernel.

Usage: ``python3 benchmarks/bench_kernels.py [--n 200] [--repeat 2000]``
"""
import argparse
import math
import timeit

import numpy as np

from curveflow import fixtures
from curveflow.kernels import compiled_backend, python_backend


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    pts = np.ascontiguousarray(fixtures.perturbed_semicircle(args.n).points)
    cos_a = math.cos(math.pi / 2)
    backends = {"python": python_backend, "compiled": compiled_backend()}
    results = {}
    for name, mod in backends.items():
        if mod is None:
            print(f"{name:9s} unavailable")
            continue
        reps = args.repeat if name == "compiled" else max(args.repeat // 10, 1)
        best = min(timeit.repeat(lambda: mod.implicit_step(pts, 1e-5, cos_a), number=reps, repeat=3)) / reps
        results[name] = mod.implicit_step(pts, 1e-5, cos_a)
        print(f"{name:9s} {best * 1e6:9.1f} us/step  (n = {args.n})")
    if len(results) == 2:
        a, b = results["python"], results["compiled"]
        diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))
        print(f"max difference between backends: {diff:.2e}")


if __name__ == "__main__":
    main()
