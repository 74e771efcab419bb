"""Time the numba kernels against the pure-numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once on both backends before timing so numba's JIT
compilation is excluded. Outputs of the two backends are compared as a
sanity check and the best-of-``repeat`` wall time is reported.
"""

import argparse
import sys
import time

import numpy as np

from wavefuse import kernels
from wavefuse.classifier import init_network, one_hot, pack
from wavefuse.wavelet import make_filter_bank


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    """Yield ``(name, run)`` pairs where ``run(backend)`` executes one kernel."""
    bank = make_filter_bank()
    L = bank.length

    x = rng.standard_normal((256, 256))
    ext = np.ascontiguousarray(np.pad(x, ((0, 0), (L - 1, L - 1)), mode="symmetric"))
    m = (256 + L - 1) // 2
    yield "filter_down 256x256", lambda k: k.filter_down(ext, bank.lo_d, bank.hi_d, L, m)

    a = rng.standard_normal((256, 130))
    d = rng.standard_normal((256, 130))
    yield "upsample_filter 256x130", lambda k: k.upsample_filter(a, d, bank.lo_r, bank.hi_r)

    A = rng.standard_normal((100, 60))
    gram = A @ A.T / 60
    yield "jacobi_eigh 100x100", lambda k: k.jacobi_eigh(gram, 1e-12 * np.linalg.norm(gram), 100)[:2]

    net = init_network([40, 20, 10], seed=0)
    sizes = np.asarray(net.layer_sizes, dtype=np.int64)
    X = rng.standard_normal((100, 40))
    T = one_hot(rng.integers(0, 10, 100), 10)
    order = rng.permutation(100).astype(np.int64)
    p0 = pack(net)

    def epoch(k):
        params, velocity = p0.copy(), np.zeros_like(p0)
        k.train_epoch(params, velocity, sizes, X, T, order, 0.1, 0.9)
        return params

    yield "train_epoch 100x[40,20,10]", epoch


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if kernels.numba_kernels is None:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>10}")
    for name, run in cases(rng):
        ref = run(kernels.numpy_kernels)
        got = run(kernels.numba_kernels)  # also triggers compilation
        ref_arrs = ref if isinstance(ref, tuple) else (ref,)
        got_arrs = got if isinstance(got, tuple) else (got,)
        if not all(np.allclose(np.abs(r), np.abs(g), atol=1e-8) for r, g in zip(ref_arrs, got_arrs)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_np = best_time(lambda: run(kernels.numpy_kernels), args.repeat)
        t_nb = best_time(lambda: run(kernels.numba_kernels), args.repeat)
        print(f"{name:<28}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
