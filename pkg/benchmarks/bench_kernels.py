"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs once to trigger compilation, then the best of N timings is
reported together with the maximum difference between the two outputs.
"""

import argparse
import time

import numpy as np

from irqft import kernels
from irqft.wick_engine import slot_table


def cases(rng):
    pts = rng.standard_normal((200_000, 4))
    kinds = np.array([0, 1, -1, 2])
    yield "box_distance", (pts, kinds)

    exps = rng.integers(0, 4, (30, 3))
    coefs = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    W = rng.standard_normal((50_000, 3)) + 1j * rng.standard_normal((50_000, 3))
    yield "poly_eval", (exps, coefs, W)

    owner = np.repeat(np.arange(4), [4, 3, 3, 2])
    yield "matching_counts", (owner, slot_table(4), 6, 5)

    th = np.linspace(0, np.pi, 20_000)
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    deltas = rng.standard_normal((6, 2))
    yield "min_projection", (dirs, deltas)

    P = rng.uniform(0, 2, (400, 2))
    X = rng.uniform(-3, 0, (4000, 2))
    c = np.array([1.0, 1j])
    g = rng.standard_normal(4000).astype(complex)
    yield "exp_sum", (P, X, c, g)


def _prepare(name, args):
    # match the dtypes the dispatchers pass
    if name == "box_distance":
        return np.ascontiguousarray(args[0], float), np.ascontiguousarray(args[1], np.int64)
    if name == "poly_eval":
        return np.ascontiguousarray(args[0], np.int64), args[1].astype(complex), args[2].astype(complex)
    if name == "matching_counts":
        return args[0].astype(np.int64), np.ascontiguousarray(args[1], np.int64), args[2], args[3]
    if name == "exp_sum":
        return args[0], args[1], args[2].astype(complex), args[3]
    return args


def best_time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    opts = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, args in cases(rng):
        args = _prepare(name, args)
        fast, slow = kernels.IMPLEMENTATIONS[name]
        fast(*args)  # compile
        t_fast, a = best_time(fast, args, opts.repeat)
        t_slow, b = best_time(slow, args, max(1, opts.repeat if name != "matching_counts" else 1))
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        print(f"{name:<16}{t_fast:12.4f}{t_slow:12.4f}{t_slow / t_fast:10.1f}{diff:12.2e}")


if __name__ == "__main__":
    main()
