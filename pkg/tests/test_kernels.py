"""Both kernel backends must agree with each other and with direct formulas."""

import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarnet import _kernels, laplacian_kit, random_connected_graph

pytestmark = pytest.mark.skipif(_kernels.numba_backend is None, reason="numba not installed")
NB, NP = _kernels.numba_backend, _kernels.numpy_backend


def edge_arrays(seed, n=15):
    g = random_connected_graph(n, 3 * n, seed=seed, weight_range=(0.1, 2.0))
    return g, np.ascontiguousarray(g.eu), np.ascontiguousarray(g.ev), np.ascontiguousarray(g.ew)


@pytest.mark.parametrize("seed", range(5))
def test_edge_kernels(seed):
    g, eu, ev, ew = edge_arrays(seed)
    x = np.random.default_rng(seed).random(g.n)
    expected = float(x @ g.laplacian() @ x)
    assert NB.edge_disagreement(eu, ev, ew, x) == pytest.approx(expected, rel=1e-12)
    assert NP.edge_disagreement(eu, ev, ew, x) == pytest.approx(expected, rel=1e-12)
    np.testing.assert_allclose(NB.edge_gradient(eu, ev, x), NP.edge_gradient(eu, ev, x), rtol=1e-14)
    np.testing.assert_allclose(NP.edge_gradient(eu, ev, x), -0.5 * (x[eu] - x[ev]) ** 2)


@pytest.mark.parametrize("seed", range(5))
def test_pair_extremes(seed):
    g = random_connected_graph(12, 20, seed=seed, weight_range=(0.5, 2.0))
    kit = laplacian_kit(g)
    a = NB.pair_polarization_extremes(kit.pinv, kit.pinv_sq)
    b = NP.pair_polarization_extremes(kit.pinv, kit.pinv_sq)
    vals = {}
    for i, j in itertools.combinations(range(g.n), 2):
        vals[(i, j)] = kit.biharmonic(i, j) ** 2 / kit.resistance(i, j) ** 2
    for res in (a, b):
        assert res[0] == pytest.approx(min(vals.values()), rel=1e-10)
        assert res[1] == pytest.approx(max(vals.values()), rel=1e-10)
        assert vals[(int(res[2]), int(res[3]))] == pytest.approx(res[1], rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12),
    st.floats(0, 1),
    st.floats(0.1, 3),
    st.floats(0, 1),
)
def test_projection(z, lo, width, frac):
    z = np.array(z)
    hi = lo + width
    budget = len(z) * lo + frac * len(z) * width
    out = [be.project_box_budget(z, lo, hi, budget) for be in (NB, NP)]
    np.testing.assert_allclose(out[0], out[1], atol=1e-10)
    x = out[1]
    assert np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12)
    assert x.sum() <= budget + 1e-9
    # variational inequality: (z - x) . (y - x) <= 0 for feasible y
    rng = np.random.default_rng(0)
    for _ in range(20):
        y = rng.uniform(lo, hi, len(z))
        if y.sum() > budget:
            y = lo + (y - lo) * (budget - len(z) * lo) / max((y - lo).sum(), 1e-300)
        assert (z - x) @ (y - x) <= 1e-8


def test_rk4():
    rng = np.random.default_rng(3)
    g = random_connected_graph(8, 14, seed=rng)
    a = g.laplacian() + np.eye(8)
    c = rng.random(8)
    x0 = rng.random(8)
    s1 = NB.rk4_linear(a, c, x0, 0.05, 400, 10)
    s2 = NP.rk4_linear(a, c, x0, 0.05, 400, 10)
    assert s1.shape == s2.shape == (41, 8)
    np.testing.assert_allclose(s1, s2, atol=1e-13)
    np.testing.assert_allclose(s1[-1], np.linalg.solve(a, c), atol=1e-6)


@pytest.mark.parametrize("size", [1, 2, 3])
def test_best_subset(size):
    rng = np.random.default_rng(size)
    n = 9
    q = rng.normal(size=(n, n))
    q = q + q.T
    lin = rng.normal(size=n)
    brute = min(
        (0.3 + lin[list(s)].sum() + q[np.ix_(s, s)].sum(), list(s))
        for s in itertools.combinations(range(n), size)
    )
    for be in (NB, NP):
        val, idx = be.best_subset(0.3, lin, q, size)
        assert val == pytest.approx(brute[0], rel=1e-12)
        assert [int(i) for i in idx] == brute[1]


def test_env_flag_selects_numpy():
    env = dict(os.environ, POLARNET_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from polarnet import _kernels; print(_kernels.backend.name)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
