"""Benchmark the compiled kernels against the pure NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Workloads mirror the real hot paths: NB scoring of a perturbation batch,
KL bound bisection at anchor-search volume, and exact-Shapley aggregation
at the enumeration ceiling.
"""

import argparse
import math
import time

import numpy as np

from rationeval._kernels import _pure

try:
    from rationeval._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)

    vocab = 2000
    delta_ll = rng.normal(0, 1.5, vocab)
    lengths = rng.integers(5, 25, 20000)
    indptr = np.zeros(len(lengths) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(lengths)
    indices = rng.integers(0, vocab, int(indptr[-1])).astype(np.int64)

    def nb(impl):
        impl.nb_score_batch(indices, indptr, delta_ll, 0.2)

    triples = [
        (int(rng.integers(0, t + 1)), t, float(rng.uniform(0.1, 10.0)))
        for t in rng.integers(1, 500, 20000)
    ]

    def kl(impl):
        for s, t, b in triples:
            impl.kl_bernoulli_bounds(s, t, b)

    d = 12
    values = rng.random(1 << d)
    fact = [math.factorial(i) for i in range(d + 1)]
    weights = np.asarray([fact[k] * fact[d - 1 - k] / fact[d] for k in range(d)])

    def shapley(impl):
        impl.shapley_from_coalitions(values, d, weights)

    return [
        ("nb_score_batch (20k docs)", nb),
        ("kl_bernoulli_bounds (20k calls)", kl),
        ("shapley_from_coalitions (d=12)", shapley),
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled backend unavailable; timing pure backend only")

    print(f"{'workload':<34} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name, fn in workloads():
        t_pure = timeit(lambda: fn(_pure), args.repeat)
        if _core is not None:
            t_core = timeit(lambda: fn(_core), args.repeat)
            print(f"{name:<34} {t_pure * 1e3:>8.1f}ms {t_core * 1e3:>8.1f}ms "
                  f"{t_pure / t_core:>7.1f}x")
        else:
            print(f"{name:<34} {t_pure * 1e3:>8.1f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
