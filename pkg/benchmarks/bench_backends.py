"""Throughput comparison of the compiled and pure-Python simulation kernels.

Run:  python3 benchmarks/bench_backends.py [--paths N]
"""
import argparse
import time

import numpy as np

from creditfx import AjdParams, CirPpParams, ExponentialJumps, ShiftFunction
from creditfx.simulation import SimConfig
from creditfx.simulation import _pykernels
from creditfx.simulation._engine import simulate_cir, simulate_xy

try:
    from creditfx.simulation import _kernels
except ImportError:
    _kernels = None


def time_backend(fn, *args, repeats=3, **kwargs):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=20_000)
    args = ap.parse_args()

    p = AjdParams(sigma_x=0.4, sigma_y=0.5, m=0.8, mu_x=0.3, mu_y=0.4,
                  jumps=ExponentialJumps(2.0), y0=0.5, h=0.25)
    cfg = SimConfig(n_paths=args.paths, dt=1 / 500, horizon=1.0, seed=7,
                    record_times=(1.0,), collect_jumps=False)
    c = CirPpParams(r0=0.02, b_x=0.04, beta_x=0.5, sigma_x=0.1,
                    shift=ShiftFunction(0.005))
    ccfg = SimConfig(n_paths=args.paths, dt=1 / 500, horizon=5.0, seed=7)

    backends = [("python", _pykernels)]
    if _kernels is not None:
        backends.insert(0, ("cython", _kernels))

    print(f"{args.paths} paths, dt=1/500")
    rows = {}
    for name, mod in backends:
        t_xy, b = time_backend(simulate_xy, p, cfg, backend=mod, repeats=2)
        t_cir, e = time_backend(simulate_cir, c, ccfg, tenors=(5.0,), backend=mod, repeats=2)
        rows[name] = (t_xy, t_cir, b, e)
        print(f"  {name:>7}: xy-paths {t_xy:7.2f}s ({args.paths / t_xy:9.0f} paths/s)   "
              f"cir {t_cir:7.2f}s ({args.paths / t_cir:9.0f} paths/s)")

    if len(rows) == 2:
        (cx, cc, bc, ec), (px, pc, bp, ep) = rows["cython"], rows["python"]
        print(f"  speedup: xy {px / cx:.1f}x, cir {pc / cc:.1f}x")
        same = np.array_equal(bc.x, bp.x) and np.array_equal(ec.values, ep.values)
        print(f"  backends bit-identical: {same}")


if __name__ == "__main__":
    main()
