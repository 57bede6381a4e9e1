"""Compare the compiled and pure-Python kernels on the two hot paths.

    python benchmarks/bench_kernels.py [--episodes N] [--batch N] [--repeat R]
"""

import argparse
import time

import numpy as np

from sensorcontract import kernels

PARAMS = (2.0, 1.0, 0.9, 0.2, 4.0, 0.0, 0.5)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--episodes", type=int, default=200_000)
    parser.add_argument("--batch", type=int, default=20_000, help="strategies per game-tree batch")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    x1, q1, p1 = (rng.uniform(size=args.batch) for _ in range(3))
    x2, q2, p2 = (rng.uniform(size=(args.batch, 4)) for _ in range(3))
    s1, s2 = 2 * np.sqrt(x1), 2 * np.sqrt(x2)

    backends = kernels.backends()
    results = {}
    print(f"{'backend':8s} {'kernel':22s} {'seconds':>9s} {'per item':>10s}")
    for name, mod in backends.items():
        key = mod.stream_key(42)
        t_sim, sim = best_of(lambda: mod.simulate_block(PARAMS, 2.0, 1.0, 0.3448, 0.9655, [1.0] * 4, [0.25] * 4,
                                                        [0.9] * 4, [1.0] * 4, key, 0, args.episodes), args.repeat)
        t_tree, tree = best_of(lambda: mod.tree_payoffs_batch(PARAMS, s1, x1, q1, p1, s2, x2, q2, p2), args.repeat)
        results[name] = (t_sim, sim, t_tree, tree)
        print(f"{name:8s} {'simulate_block':22s} {t_sim:9.4f} {t_sim / args.episodes * 1e9:8.1f}ns")
        print(f"{name:8s} {'tree_payoffs_batch':22s} {t_tree:9.4f} {t_tree / args.batch * 1e9:8.1f}ns")

    if "cython" in results:
        py, cy = results["python"], results["cython"]
        same = all(np.array_equal(a, b) for a, b in zip(py[1], cy[1])) and \
            all(np.array_equal(a, b) for a, b in zip(py[3], cy[3]))
        print(f"speedup simulate_block     {py[0] / cy[0]:7.1f}x")
        print(f"speedup tree_payoffs_batch {py[2] / cy[2]:7.1f}x")
        print(f"bit-identical outputs: {same}")
    else:
        print("compiled extension not available; only the fallback was timed")


if __name__ == "__main__":
    main()
