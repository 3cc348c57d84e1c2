"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from mch import _kernels_py

try:
    from mch import _ckernels
except ImportError:
    _ckernels = None


def cases():
    for n in (512, 1024, 2048, 4096):
        L = 20 * np.pi
        x = -L + 2 * L * np.arange(n) / n
        f = np.exp(-x * x)
        yield f"green_quadrature n={n}", "green_quadrature", (x, f, 2 * L / n, 1)
    rng = np.random.default_rng(0)
    for n, npts in ((1024, 64), (4096, 64), (8192, 256)):
        coeffs = np.fft.rfft(rng.standard_normal((3, n)), axis=1)
        pts = rng.uniform(-5, 5, npts)
        yield f"trig_eval n={n} points={npts}", "trig_eval", (coeffs, pts, np.pi / 10, 10.0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the numpy path is timed")
    print(f"{'case':34s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for label, name, argv in cases():
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*argv), number=1, repeat=args.repeat))
        if _ckernels is None:
            print(f"{label:34s} {1e3 * t_py:11.2f}")
            continue
        cy = getattr(_ckernels, name)
        t_cy = min(timeit.repeat(lambda: cy(*argv), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(np.asarray(py(*argv)) - np.asarray(cy(*argv)))))
        print(f"{label:34s} {1e3 * t_py:11.2f} {1e3 * t_cy:12.2f} {t_py / t_cy:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
