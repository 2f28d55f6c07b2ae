#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Run from the repo root after building the extension:

    python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

import pawprint.kernels.fallback as fb

try:
    import pawprint.kernels._native as nat
except ImportError:
    nat = None


def timeit(fn, *args, repeat=5):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(7)
    img = rng.random((250, 250))
    yield "resize 250->64", (lambda m: m.resize_bilinear), (img, 64, 64)
    yield "rotate 250px", (lambda m: m.rotate_bilinear), (img, 125.0, 125.0, math.cos(0.3), math.sin(0.3))
    yield "lbp map 250px", (lambda m: m.lbp_code_map), (img,)

    # Both sides of the dispatcher use BLAS tensordot for convolution (the
    # compiled loop variant lost to it); compare the loop variant anyway.
    inp = rng.random((64, 64, 1))
    kern = rng.normal(size=(32, 5, 5, 1))
    yield "conv loops 64px f32", (
        lambda m: getattr(m, "convolve_valid_loops", m.convolve_valid)
    ), (inp, kern)

    deep = rng.random((60, 60, 32))
    kern2 = rng.normal(size=(64, 5, 5, 32))
    yield "conv loops 60px f64c32", (
        lambda m: getattr(m, "convolve_valid_loops", m.convolve_valid)
    ), (deep, kern2)
    yield "lp_pool p2 s2", (lambda m: m.lp_pool), (deep, 2.0, 2, 2)
    yield "divisive_normalize", (lambda m: m.divisive_normalize), (deep,)

    n, d = 100, 8000
    x = np.ascontiguousarray(np.hstack([rng.normal(size=(n, d)), np.ones((n, 1))]))
    y = np.where(rng.random(n) > 0.5, 1.0, -1.0)
    qd = (x * x).sum(axis=1)
    perm = np.ascontiguousarray(rng.permutation(n), dtype=np.intp)

    def dcd(m):
        def run(xx, yy, qq, pp):
            alpha = np.zeros(n)
            w = np.zeros(d + 1)
            for _ in range(5):
                m.dcd_epoch(xx, yy, qq, alpha, w, 10.0, pp)

        return run

    yield "dcd 5 epochs n100 d8k", dcd, (x, y, qd, perm)

    a = rng.normal(size=(200, 200))
    a = (a + a.T) / 2

    def eig(m):
        def run(mat):
            dd, ee, qq = m.householder_tridiag(np.ascontiguousarray(mat))
            m.tql_implicit(dd, ee, qq, 30 * mat.shape[0])

        return run

    yield "sym eig 200x200", eig, (a,)


def main():
    if nat is None:
        print("native extension not built; only timing the fallback")
    print(f"{'kernel':<24} {'fallback':>12} {'native':>12} {'speedup':>9}")
    for name, getter, args in cases():
        t_fb = timeit(getter(fb), *args)
        if nat is None:
            print(f"{name:<24} {t_fb * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        t_nat = timeit(getter(nat), *args)
        print(
            f"{name:<24} {t_fb * 1e3:>10.2f}ms {t_nat * 1e3:>10.2f}ms "
            f"{t_fb / t_nat:>8.1f}x"
        )


if __name__ == "__main__":
    main()
