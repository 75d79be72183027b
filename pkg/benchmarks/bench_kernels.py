"""Compare the compiled and pure-Python protocol kernels.

    python3 benchmarks/bench_kernels.py [--rows N] [--repeat R]

Times ``pipeline_batch`` on random Alice/Bob strings for a few protocol
shapes, checks that both backends return identical arrays, and prints rows
per second and the speed-up.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qkd_rng_audit.kernels import backends

SHAPES = [
    # (label, n, k, test_random, toeplitz)
    ("n=3 k=2 alternate toeplitz", 3, 2, False, True),
    ("n=5 k=2 alternate raw", 5, 2, False, False),
    ("n=4 k=3 random toeplitz", 4, 3, True, True),
    ("n=12 k=4 random toeplitz", 12, 4, True, True),
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    impls = backends()
    if "cython" not in impls:
        print("compiled backend not built; only the Python timings are shown")
    rng = np.random.default_rng(0)
    print(f"{'shape':30s} {'backend':8s} {'rows/s':>12s} {'speed-up':>9s}")
    for label, n, k, test_random, toeplitz in SHAPES:
        A = rng.integers(0, 2, (args.rows, 4 * n + k), dtype=np.uint8)
        B = rng.integers(0, 2, (args.rows, n), dtype=np.uint8)
        outputs, rates = {}, {}
        for name, mod in impls.items():
            call = lambda: mod.pipeline_batch(A, B, n, k, test_random, toeplitz, True)  # noqa: E731
            outputs[name] = call()
            best = min(timeit.repeat(call, number=1, repeat=args.repeat))
            rates[name] = args.rows / best
        if len(outputs) == 2:
            for x, y in zip(outputs["python"], outputs["cython"]):
                np.testing.assert_array_equal(x, y)
        for name, rate in rates.items():
            gain = f"{rate / rates['python']:8.1f}x" if name != "python" else ""
            print(f"{label:30s} {name:8s} {rate:12.0f} {gain:>9s}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
