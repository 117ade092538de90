"""Timing of the contour-quadrature kernels: numpy vs numba backends.

    python3 benchmarks/bench_contour.py [--m 128 256 512 1024] [--repeat 5]

Also times one full Newton solve per backend. Results agree to roundoff;
the max deviation is printed alongside.
"""
import argparse
import time
import warnings

import numpy as np

warnings.filterwarnings("ignore", message="The TBB threading layer")

from rotpatch import _contour  # noqa: E402
from rotpatch.geometry import FourierBoundary  # noqa: E402
from rotpatch.solver import solve_single  # noqa: E402


def best_of(fn, repeat):
    fn()  # warm-up (includes jit compilation)
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return min(ts)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-solve", action="store_true")
    a = ap.parse_args(argv)
    backends = [k for k in ("numpy", "numba") if k in _contour.BACKENDS]
    prev = _contour.BACKEND

    print(f"{'m':>6} {'kernel':>8} " + " ".join(f"{b:>11}" for b in backends) + "   speedup   max|diff|")
    for m in a.m:
        W, dW = FourierBoundary(0.3, 0.01, np.r_[0.02, 0.01, np.zeros(5)]).normalized(m)
        z = 0.5 * W.max() * np.exp(2j * np.pi * np.arange(m) / m)
        cases = {
            "self": lambda: _contour.self_sum(W, dW),
            "target": lambda: _contour.target_sum(W, dW, z),
            "image": lambda: _contour.image_sum(0.01 * W, 0.01 * dW, 0.01 * W),
        }
        for name, fn in cases.items():
            ts, vals = [], []
            for bk in backends:
                _contour.use_backend(bk)
                ts.append(best_of(fn, a.repeat))
                vals.append(fn())
            diff = float(np.max(np.abs(vals[0] - vals[-1])))
            sp = ts[0] / ts[-1]
            print(f"{m:>6} {name:>8} " + " ".join(f"{t * 1e3:9.3f}ms" for t in ts) + f"   {sp:7.1f}x   {diff:.1e}")

    if not a.no_solve:
        print()
        for bk in backends:
            _contour.use_backend(bk)
            solve_single(0.3, 0.01, N=16, m=128)
            t0 = time.perf_counter()
            _, rep = solve_single(0.3, 0.01)
            print(f"solve_single(Q=0.3, eps=0.01, N=32, m=256) [{bk}]: {time.perf_counter() - t0:.2f} s, {rep.iterations} iterations")
    _contour.use_backend(prev)


if __name__ == "__main__":
    main()
