import numpy as np
import pytest

from helpers import path_graph, random_instance
from polarnet import (
    FdModel,
    FjModel,
    ModelError,
    build_graph,
    convergence_horizon,
    fd_steady_state,
    fd_steady_state_closed,
    fj_steady_state,
    laplacian_kit,
    random_connected_graph,
    simulate_trajectory,
)
from polarnet.dynamics import max_stable_dt


class TestModels:
    def test_leaders_must_differ(self):
        with pytest.raises(ModelError, match="leaders must differ"):
            FdModel(path_graph(3), 1, 1)

    def test_leader_range(self):
        with pytest.raises(ModelError):
            FdModel(path_graph(3), 0, 3)

    def test_disconnected(self):
        g = build_graph([(0, 1, 1), (2, 3, 1)])
        with pytest.raises(ModelError, match="connected"):
            FdModel(g, 0, 1)

    def test_fj_validation(self):
        g = path_graph(3)
        with pytest.raises(ModelError):
            FjModel(g, [1, 0, 1], [0, 0, 0])
        with pytest.raises(ModelError):
            FjModel(g, [1, 1, 1], [0, 1.5, 0])
        with pytest.raises(ModelError):
            FjModel(g, [1, 1], [0, 1])


class TestFdSteadyState:
    def test_path3(self):
        np.testing.assert_allclose(fd_steady_state(FdModel(path_graph(3), 0, 2)), [0, 0.5, 1])

    def test_path4(self):
        np.testing.assert_allclose(fd_steady_state(FdModel(path_graph(4), 0, 3)), [0, 1 / 3, 2 / 3, 1])

    def test_no_followers(self):
        np.testing.assert_array_equal(fd_steady_state(FdModel(path_graph(2), 0, 1)), [0, 1])

    @pytest.mark.parametrize("seed", range(200))
    def test_order_and_closed_form(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 25))
        g = random_connected_graph(n, None, seed=rng, weight_range=(0.1, 4.0))
        s0, s1 = (int(x) for x in rng.choice(n, 2, replace=False))
        x = fd_steady_state(FdModel(g, s0, s1))
        assert x[s0] == 0 and x[s1] == 1
        assert np.all(x >= -1e-12) and np.all(x <= 1 + 1e-12)
        np.testing.assert_allclose(x, fd_steady_state_closed(laplacian_kit(g), s0, s1), atol=1e-8)


class TestFjSteadyState:
    def test_unanimous(self):
        g, kappa, _ = random_instance(1)
        np.testing.assert_allclose(fj_steady_state(FjModel(g, kappa, np.ones(g.n))), 1.0)
        np.testing.assert_allclose(fj_steady_state(FjModel(g, kappa, np.zeros(g.n))), 0.0, atol=1e-15)

    def test_two_node(self):
        x = fj_steady_state(FjModel(path_graph(2), [1, 1], [1, 0]))
        np.testing.assert_allclose(x, [2 / 3, 1 / 3])

    @pytest.mark.parametrize("seed", range(30))
    def test_residual_and_range(self, seed):
        g, kappa, _ = random_instance(seed)
        beta = np.random.default_rng(seed).random(g.n)
        m = FjModel(g, kappa, beta)
        x = fj_steady_state(m)
        rhs = m.source
        assert np.linalg.norm(m.system_matrix() @ x - rhs) <= 1e-9 * np.linalg.norm(rhs)
        assert np.all(x >= -1e-12) and np.all(x <= 1 + 1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_monotone_in_beta(self, seed):
        g, kappa, _ = random_instance(seed)
        rng = np.random.default_rng(seed + 1000)
        beta = rng.random(g.n)
        v = int(rng.integers(g.n))
        raised = beta.copy()
        raised[v] = min(1.0, beta[v] + 0.3)
        x0 = fj_steady_state(FjModel(g, kappa, beta))
        x1 = fj_steady_state(FjModel(g, kappa, raised))
        assert np.all(x1 >= x0 - 1e-14)


class TestTrajectory:
    def test_fd_path(self):
        traj = simulate_trajectory(FdModel(path_graph(3), 0, 2), x0=[0, 0, 1], horizon=50)
        np.testing.assert_allclose(traj.final, [0, 0.5, 1], atol=1e-6)
        # leaders never move
        assert np.all(traj.states[:, 0] == 0) and np.all(traj.states[:, 2] == 1)

    def test_fj_unanimous(self):
        g, kappa, _ = random_instance(4)
        m = FjModel(g, kappa, np.ones(g.n))
        x0 = np.random.default_rng(0).random(g.n)
        traj = simulate_trajectory(m, x0=x0, horizon=convergence_horizon(m, 1e-9))
        np.testing.assert_allclose(traj.final, 1.0, atol=1e-6)

    def test_fixed_point(self):
        g, kappa, beta = random_instance(5)
        m = FjModel(g, kappa, beta)
        x = fj_steady_state(m)
        traj = simulate_trajectory(m, x0=x, horizon=5.0)
        assert np.max(np.abs(traj.states - x)) < 1e-9

    def test_unstable_step(self):
        m = FdModel(path_graph(3), 0, 2)
        limit = max_stable_dt(m)
        with pytest.raises(ModelError, match="maximum admissible dt"):
            simulate_trajectory(m, dt=2 * limit)

    def test_record_every_keeps_final(self):
        m = FdModel(path_graph(4), 0, 3)
        full = simulate_trajectory(m, horizon=3.0, dt=0.1)
        sparse = simulate_trajectory(m, horizon=3.0, dt=0.1, record_every=7)
        assert sparse.times[-1] >= full.times[-1] - 1e-12
        assert sparse.states.shape[0] < full.states.shape[0]

    @pytest.mark.parametrize("seed", range(10))
    def test_converges(self, seed):
        g, kappa, beta = random_instance(seed)
        m = FjModel(g, kappa, beta)
        traj = simulate_trajectory(m, horizon=convergence_horizon(m))
        assert np.max(np.abs(traj.final - fj_steady_state(m))) < 1e-6
