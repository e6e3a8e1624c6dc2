"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import time

import numpy as np

from texsom import _backend
from texsom.som import TrainConfig, epoch_schedule, init_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(k):
    rng = np.random.default_rng(0)
    q = rng.integers(0, 32, size=(512, 512)).astype(np.int64)
    X = rng.random((200, 72))
    y = rng.integers(0, 2, 200).astype(np.int64)
    grid = init_grid(10, 10, 72, seed=0)
    cfg = TrainConfig(epochs=10, seed=0)
    _, eta, H, order = next(iter(epoch_schedule(grid, cfg, len(X))))

    def glcm():
        for off in ((0, 1), (-1, 1), (-1, 0), (-1, -1)):
            k.glcm_counts(q, 32, *off)

    def som():
        k.som_epoch(grid.weights.copy(), X, order, H, cfg.cutoff, eta)

    def isom():
        wcc = np.zeros((grid.n_nodes, 2), dtype=np.int64)
        k.isom_epoch(grid.weights.copy(), wcc, X, y, order, H, cfg.cutoff, eta, False, False)

    return {
        "glcm 512x512, 4 offsets": glcm,
        "som epoch 200x72, 10x10 map": som,
        "isom epoch 200x72, 10x10 map": isom,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _backend.compiled_kernels is None:
        raise SystemExit("compiled kernels are not built; reinstall without TEXSOM_NO_EXT")
    py = cases(_backend.python_kernels)
    cy = cases(_backend.compiled_kernels)
    print(f"{'case':<32}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name in py:
        tp = best_of(py[name], args.repeat)
        tc = best_of(cy[name], args.repeat)
        print(f"{name:<32}{1e3 * tp:12.2f}{1e3 * tc:12.2f}{tp / tc:9.1f}x")


if __name__ == "__main__":
    main()
