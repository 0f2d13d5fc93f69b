"""Time the numba and numpy circular-convolution backends on model-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from npmixer import kernels

SHAPES = [((32, 7, 96), 4, 1), ((32, 7, 96), 4, 8), ((256, 21, 336), 10, 2), ((8, 321, 96), 6, 4)]


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    print(f"{'shape':>16} {'F':>3} {'d':>3} " + " ".join(f"{b + ' ms':>14}" for b in backends)
          + "   max |diff|")
    for shape, F, d in SHAPES:
        x, h = rng.standard_normal(shape), rng.standard_normal(F)
        times, outs = [], []
        for b in backends:
            kernels.set_backend(b)
            outs.append(kernels.circular_conv(x, h, d))  # also warms the jit cache
            t = timeit.timeit(lambda: kernels.circular_conv(x, h, d), number=args.repeat)
            times.append(1e3 * t / args.repeat)
        diff = max(float(np.abs(o - outs[0]).max()) for o in outs)
        print(f"{str(shape):>16} {F:>3} {d:>3} " + " ".join(f"{t:>14.3f}" for t in times)
              + f"   {diff:.1e}")


if __name__ == "__main__":
    main()
