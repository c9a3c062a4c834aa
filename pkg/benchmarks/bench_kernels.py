"""Time the numba and numpy versions of each hot kernel side by side.

    python3 benchmarks/bench_kernels.py [--sizes 31 61 121] [--repeat 5]

Each kernel is warmed up once (so numba compilation is excluded), then
timed ``repeat`` times; the best time is reported together with the
largest entrywise difference between the two results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lindblad_lightcone.linalg import hermitian_eigs
from lindblad_lightcone.linalg._eigh_kernels import tql_loops, tql_vec, tridiagonalize_loops, tridiagonalize_vec
from lindblad_lightcone._jump_kernels import jump_sum_loops, jump_sum_vec
from lindblad_lightcone.model import make_model


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_eigh(n, repeat, rng):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = 0.5 * (x + x.conj().T)
    fast = (tridiagonalize_loops, tql_loops)
    slow = (tridiagonalize_vec, tql_vec)
    t_fast = best_time(lambda: hermitian_eigs(a, kernels=fast), repeat)
    t_slow = best_time(lambda: hermitian_eigs(a, kernels=slow), repeat)
    diff = np.max(np.abs(hermitian_eigs(a, kernels=fast).eigenvalues - hermitian_eigs(a, kernels=slow).eigenvalues))
    return t_fast, t_slow, diff


def bench_jump(half_width, repeat, rng):
    spec = make_model(half_width, 1.0, "directed_jump", 1.0)
    n = spec.dim
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = x @ x.conj().T
    pairs = spec.kraus.entry_pairs
    out_a = np.empty((n, n), dtype=np.complex128)
    out_b = np.empty((n, n), dtype=np.complex128)
    t_fast = best_time(lambda: jump_sum_loops(rho, *pairs, out_a), repeat)
    t_slow = best_time(lambda: jump_sum_vec(rho, *pairs, out_b), repeat)
    return t_fast, t_slow, float(np.max(np.abs(out_a - out_b)))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[31, 61, 121])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'dim':>6}{'numba [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for n in args.sizes:
        tf, ts, d = bench_eigh(n, args.repeat, rng)
        print(f"{'eigh':<14}{n:>6}{tf * 1e3:>14.3f}{ts * 1e3:>14.3f}{ts / tf:>10.1f}{d:>12.2e}")
    for n in args.sizes:
        tf, ts, d = bench_jump((n - 1) // 2, args.repeat, rng)
        print(f"{'jump_sum':<14}{n:>6}{tf * 1e3:>14.3f}{ts * 1e3:>14.3f}{ts / tf:>10.1f}{d:>12.2e}")


if __name__ == "__main__":
    main()
