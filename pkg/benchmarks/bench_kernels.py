"""Time one Metropolis sweep: compiled kernel against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--n 50 200] [--K 16] [--repeat 5]
"""

import argparse
import importlib
import timeit

import numpy as np

from arcgas import _kernels_py
from arcgas.arcs import make_perturbed_arc
from arcgas.energies import analyze_arc
from arcgas.gas import gas_model


def bench(impl, model, n, repeat, number):
    rng = np.random.default_rng(0)
    theta = np.sort(rng.uniform(0.05, np.pi - 0.05, n))
    X = _kernels_py.cos_sums(theta, model.K)
    state = [theta, np.cos(theta), X, model.A @ X]
    draws = rng.random((number * repeat + 1, 2 * n))
    it = iter(draws)

    def one():
        r = next(it)
        impl.sweep(*state, model.A, model.dvec, 2.0, 1.0, 0.3, r[:n], 1 - r[n:])

    return min(timeit.repeat(one, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[50, 200])
    ap.add_argument("--K", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    model = gas_model(analyze_arc(make_perturbed_arc((1.0,), 0.3), N=64), K=args.K)
    try:
        compiled = importlib.import_module("arcgas._kernels")
    except ImportError:
        compiled = None
        print("compiled kernels not built; timing the fallback only")

    print(f"{'n':>5} {'python (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for n in args.n:
        py = bench(_kernels_py, model, n, args.repeat, max(1, 2000 // (n * 4)))
        if compiled is None:
            print(f"{n:>5} {1e3 * py:12.3f} {'-':>12} {'-':>8}")
            continue
        cy = bench(compiled, model, n, args.repeat, max(10, 20000 // n))
        print(f"{n:>5} {1e3 * py:12.3f} {1e3 * cy:12.4f} {py / cy:8.1f}x")


if __name__ == "__main__":
    main()
