"""Time the compiled kernels against the numpy fallback and confirm identical output.

    python3 benchmarks/bench_backends.py [--repeat N]
"""
import argparse
import time

import numpy as np

from liqhorizon import FirmValueParams, ImpactParams, _backend, model3, sim_engine
from liqhorizon.numerics import TridiagonalSystem, solve_tridiagonal


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    p, fv = ImpactParams(), FirmValueParams()
    grid = model3.make_grid(p, fv)
    fine = model3.make_grid(p, fv, n_time=16000)
    vs = model3.solve_value_surface(p, fv, grid)
    rng = np.random.default_rng(0)
    n = 20000
    sys_ = TridiagonalSystem(rng.uniform(-1, 1, n - 1), 3 + rng.random(n), rng.uniform(-1, 1, n - 1), rng.normal(size=n))
    return {
        "tridiagonal n=20000": lambda b: solve_tridiagonal(sys_, b),
        "surface N=1000 M=158": lambda b: model3.solve_value_surface(p, fv, grid, backend=b).values,
        "surface N=16000 M=632": lambda b: model3.solve_value_surface(p, fv, fine, backend=b).values,
        "replay 2000 paths": lambda b: model3.simulate_batch_m3(vs, fv, p, seed=1, n_paths=2000, backend=b).cash,
        "first passage 20000 paths": lambda b: sim_engine.hitting_transform_mc(
            1.0, 1.0, 0.5, 20000, 200_000, seed=2, backend=b).mean,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = sorted(_backend.AVAILABLE)
    if "cython" not in backends:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}  identical")
    for name, fn in cases().items():
        times, outs = {}, {}
        for b in backends:
            times[b], outs[b] = best_of(lambda: fn(b), args.repeat)
        same = all(np.array_equal(outs[backends[0]], outs[b]) for b in backends)
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:28s}" + "".join(f"{times[b]:11.4f}s" for b in backends) + f"{speed:9.1f}x  {same}")


if __name__ == "__main__":
    main()
