"""Time each kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 300]

Numba versions are warmed up once before timing so compilation is excluded.
"""

import argparse
import timeit

import numpy as np

from polarnet import _kernels, laplacian_kit, random_connected_graph


def cases(n, seed=0):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(n, 8 * n, seed=rng, weight_range=(0.5, 2.0))
    kit = laplacian_kit(g)
    x = rng.random(n)
    a = g.laplacian() + np.eye(n)
    q = rng.normal(size=(40, 40))
    q = q + q.T
    lin = rng.normal(size=40)
    z = rng.normal(size=5 * n)
    eu, ev, ew = (np.ascontiguousarray(arr) for arr in (g.eu, g.ev, g.ew))
    return {
        "edge_disagreement": (eu, ev, ew, x),
        "edge_gradient": (eu, ev, x),
        "pair_polarization_extremes": (kit.pinv, kit.pinv_sq),
        "project_box_budget": (z, 0.0, 1.0, float(n)),
        "rk4_linear": (a, x, np.full(n, 0.5), 0.1, 200, 10),
        "best_subset": (0.0, lin, q, 3),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--n", type=int, default=300, help="graph size")
    args = parser.parse_args()
    if _kernels.numba_backend is None:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<28}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, call_args in cases(args.n).items():
        times = {}
        for be in (_kernels.numba_backend, _kernels.numpy_backend):
            fn = getattr(be, name)
            fn(*call_args)
            number = 1
            while timeit.timeit(lambda: fn(*call_args), number=number) < 0.05:
                number *= 2
            best = min(timeit.repeat(lambda: fn(*call_args), number=number, repeat=args.repeat))
            times[be.name] = best / number * 1e3
        print(f"{name:<28}{times['numba']:>12.4f}{times['numpy']:>12.4f}{times['numpy'] / times['numba']:>10.2f}")


if __name__ == "__main__":
    main()
