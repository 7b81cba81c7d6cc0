"""Time the numba and numpy paths of the hot kernels.

    python3 benchmarks/bench_kernels.py [--sizes 20 74 150] [--repeat 5]

Matrices mimic real groups: a few planted blocks of near-identical days
plus scattered noise days, so the exact clique search sees realistic
structure.
"""

import argparse
import time

import numpy as np

from routinemap import _kernels as k


def block_matrix(n, rng, blocks=3):
    labels = rng.integers(blocks + 1, size=n)  # label == blocks means noise
    S = rng.uniform(0.2, 0.6, (n, n))
    same = (labels[:, None] == labels[None, :]) & (labels[:, None] < blocks)
    S[same] = rng.uniform(0.8, 0.99, same.sum())
    S = np.triu(S, 1)
    S = S + S.T
    np.fill_diagonal(S, 1.0)
    return S


def best_of(fn, repeat):
    fn()  # warm-up (jit compile or cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[22, 74, 150, 300])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not k.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for n in args.sizes:
        X = rng.dirichlet(np.ones(40), size=n)
        S = block_matrix(n, rng)
        cases = [
            ("pairwise_l1", lambda: k.pairwise_l1_numba(X), lambda: k.pairwise_l1_numpy(X)),
            ("qt_labels exact", lambda: k.qt_labels_numba(S, 0.75, k.GROWTH_EXACT),
             lambda: k.qt_labels_numpy(S, 0.75, k.GROWTH_EXACT)),
            ("qt_labels greedy", lambda: k.qt_labels_numba(S, 0.75, k.GROWTH_GREEDY),
             lambda: k.qt_labels_numpy(S, 0.75, k.GROWTH_GREEDY)),
        ]
        for name, fast, slow in cases:
            assert np.array_equal(fast(), slow())
            tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
            print(f"{name:<22}{n:>6}{tf * 1e3:>12.3f}{ts * 1e3:>12.3f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
