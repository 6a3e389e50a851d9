"""Time the numba and numpy variants of the hot kernels.

    python benchmarks/bench_kernels.py --repeat 20

Both variants are called directly, so the FDNET_DISABLE_NUMBA flag does
not matter here.  Compilation happens once before timing.
"""

import argparse
import math
import timeit

import numpy as np

from fdnet import kernels


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_hyp_f(size, repeat):
    y = np.logspace(-4, 4, size)
    kernels.hyp_f_jit(4.0, y[:4])
    np.testing.assert_allclose(kernels.hyp_f_jit(3.0, y), kernels.hyp_f_numpy(3.0, y), rtol=1e-12)
    return (_best(lambda: kernels.hyp_f_jit(3.0, y), repeat, 5),
            _best(lambda: kernels.hyp_f_numpy(3.0, y), repeat, 5))


def bench_interference(size, repeat):
    rng = np.random.default_rng(0)
    r = 180.0 * np.sqrt(rng.random(size)) + 1.0
    a = rng.uniform(0, 2 * math.pi, size)
    px, py = r * np.cos(a), r * np.sin(a)
    orient = rng.uniform(0, 2 * math.pi, size)
    fade = rng.exponential(1.0, size)
    args = (0.3, 8.0, 8.0, 10 / 3, 2 / 3, 10 / 3, 2 / 3, 4.0, 1.0)
    kernels.interference_jit(px[:4], py[:4], orient[:4], fade[:4], *args)
    assert math.isclose(kernels.interference_jit(px, py, orient, fade, *args),
                        kernels.interference_numpy(px, py, orient, fade, *args), rel_tol=1e-12)
    return (_best(lambda: kernels.interference_jit(px, py, orient, fade, *args), repeat, 50),
            _best(lambda: kernels.interference_numpy(px, py, orient, fade, *args), repeat, 50))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=10)
    args = parser.parse_args(argv)
    cases = [("hyp_f", n, bench_hyp_f) for n in (64, 4096, 65536)]
    # 1000 points is one simulation window
    cases += [("interference", n, bench_interference) for n in (100, 1000, 10000)]
    print(f"{'kernel':<14}{'size':>8}{'numba (us)':>14}{'numpy (us)':>14}{'speed-up':>10}")
    for name, size, fn in cases:
        jit, vec = fn(size, args.repeat)
        print(f"{name:<14}{size:>8}{jit * 1e6:>14.1f}{vec * 1e6:>14.1f}{vec / jit:>10.2f}")


if __name__ == "__main__":
    main()
