"""Shared graph builders for the test suite."""

import numpy as np

from polarnet import build_graph, random_connected_graph


def path_graph(n, w=1.0):
    return build_graph([(i, i + 1, w) for i in range(n - 1)])


def star_graph(n):
    return build_graph([(0, i, 1.0) for i in range(1, n)])


def random_instance(seed, n_lo=5, n_hi=20):
    """Random weighted connected graph with kappa > 0 and binary beta."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    m = int(rng.integers(n - 1, min(n * (n - 1) // 2, 3 * n) + 1))
    g = random_connected_graph(n, m, seed=rng, weight_range=(0.2, 3.0))
    kappa = rng.uniform(0.2, 2.0, n)
    beta = (rng.random(n) < 0.5).astype(float)
    return g, kappa, beta


def barbell_graph(q):
    """Two unit-weight q-cliques joined by the bridge (q-1, q)."""
    edges = []
    for base in (0, q):
        edges += [(base + i, base + j, 1.0) for i in range(q) for j in range(i + 1, q)]
    edges.append((q - 1, q, 1.0))
    return build_graph(edges)


def pendant_complete_graph(n):
    """Leaders 0 and 1 hang off distinct nodes 2 and 3 of a unit clique on 2..n-1."""
    edges = [(i, j, 1.0) for i in range(2, n) for j in range(i + 1, n)]
    edges += [(0, 2, 1.0), (1, 3, 1.0)]
    return build_graph(edges)


def barbell_cross_polarization(q):
    """Cross-clique polarization of the q-barbell for non-bridge leaders 0 and 2q-1.

    Unit current from one leader to the other gives centered voltages
    +-(1/2 + 2/q) at the leaders, +-(1/2 + 1/q) on the q-2 other non-bridge
    nodes of each clique and +-1/2 at the two bridge ends. With
    r = (q + 4)/q this yields the expression below.
    """
    return (2 * (q + 4) ** 2 + 2 * q**2 + 2 * (q - 2) * (q + 2) ** 2) / (2 * q + 8) ** 2
