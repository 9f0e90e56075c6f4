"""Compare the compiled and pure-Python propagation kernels.

    python3 benchmarks/bench_kernels.py [--steps 3000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from nhje.kernels import get_backend
from nhje.model import DriveProtocol


def _bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=3000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    proto = DriveProtocol.sin_detuning(0.12, 0.5, 30.0)
    code, a, b = proto.kernel_args()
    dt = proto.T / args.steps
    marks = np.array([args.steps], dtype=np.int64)
    rho = np.zeros((3, 3), dtype=complex)
    rho[0, 0] = 1.0

    backends = {}
    for name in ("python", "cython"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"{name:7s} unavailable")

    results = {}
    for name, mod in backends.items():
        t_prop = _bench(lambda: mod.ordered_products(code, a, b, proto.T, 0.02, 1.5707963267948966,
                                                           0.0, dt, marks), args.repeat)
        t_lind = _bench(lambda: mod.lindblad_rk4(code, a, b, proto.T, 0.02, rho, 0.0, dt, args.steps),
                        args.repeat)
        results[name] = (t_prop, t_lind)
        print(f"{name:7s} propagate {t_prop * 1e3:9.3f} ms   lindblad {t_lind * 1e3:9.3f} ms   ({args.steps} steps)")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print(f"speedup  propagate {py[0] / cy[0]:7.1f}x       lindblad {py[1] / cy[1]:7.1f}x")
        U_py = backends["python"].ordered_products(code, a, b, proto.T, 0.02, 0.3, 0.0, dt, marks)
        U_cy = backends["cython"].ordered_products(code, a, b, proto.T, 0.02, 0.3, 0.0, dt, marks)
        print(f"max |U_python - U_cython| = {np.max(np.abs(U_py - U_cy)):.2e}")


if __name__ == "__main__":
    main()
