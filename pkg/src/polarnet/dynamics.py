"""French-DeGroot and Friedkin-Johnsen models: steady states and trajectories."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import _kernels
from .errors import ModelError, NumericalError
from .graph import LaplacianKit, WeightedGraph, incidence_vector

# RK4's stability interval on the negative real axis is about [-2.785, 0];
# Gershgorin bounds the spectrum of L_FF and L + K by twice the max diagonal
RK4_REAL_STABILITY = 2.785
DEFAULT_DT_FACTOR = 0.5


@dataclass(frozen=True, eq=False)
class FdModel:
    """Two stubborn leaders: ``s0`` holds opinion 0, ``s1`` holds opinion 1."""

    graph: WeightedGraph
    s0: int
    s1: int

    def __post_init__(self):
        n = self.graph.n
        if self.s0 == self.s1:
            raise ModelError("leaders must differ")
        for s in (self.s0, self.s1):
            if not 0 <= s < n:
                raise ModelError(f"leader {s} out of range for n={n}")
        if not self.graph.is_connected():
            raise ModelError("graph must be connected")

    @property
    def followers(self) -> np.ndarray:
        mask = np.ones(self.graph.n, dtype=bool)
        mask[[self.s0, self.s1]] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True, eq=False)
class FjModel:
    """Every node is pulled toward 1 with rate ``kappa * beta`` and toward 0 with
    rate ``kappa * (1 - beta)``."""

    graph: WeightedGraph
    kappa: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        n = self.graph.n
        kappa = np.array(self.kappa, dtype=float).reshape(-1)
        beta = np.array(self.beta, dtype=float).reshape(-1)
        if kappa.shape != (n,) or beta.shape != (n,):
            raise ModelError(f"kappa and beta must have length n={n}")
        if np.any(~(kappa > 0)):
            raise ModelError("kappa must be strictly positive")
        if np.any((beta < 0) | (beta > 1)) or np.any(np.isnan(beta)):
            raise ModelError("beta must lie in [0, 1]")
        kappa.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "beta", beta)

    @property
    def source(self) -> np.ndarray:
        """``B K 1``."""
        return self.beta * self.kappa

    def system_matrix(self) -> np.ndarray:
        """``L + K``."""
        return self.graph.laplacian() + np.diag(self.kappa)

    def with_beta(self, beta) -> "FjModel":
        return FjModel(self.graph, self.kappa, beta)

    def with_graph(self, graph: WeightedGraph) -> "FjModel":
        return FjModel(graph, self.kappa, self.beta)


def _spd_solve(mat: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    try:
        factor = cho_factor(mat, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise NumericalError(f"{what} is not positive definite: {exc}") from exc
    return cho_solve(factor, rhs)


def fd_steady_state(m: FdModel) -> np.ndarray:
    """Solve ``L_FF x_F = -L_{F,s1}`` with leaders pinned at 0 and 1."""
    n = m.graph.n
    x = np.zeros(n)
    x[m.s1] = 1.0
    f = m.followers
    if f.size == 0:
        return x
    lap = m.graph.laplacian()
    x[f] = _spd_solve(lap[np.ix_(f, f)], -lap[f, m.s1], "L_FF")
    return x


def fd_steady_state_closed(kit: LaplacianKit, s0: int, s1: int) -> np.ndarray:
    """Steady state from the pseudoinverse: ``(I - 1 e_s0^T) L^+ b / (b^T L^+ b)``."""
    b = incidence_vector(kit.n, s1, s0)
    volt = kit.pinv @ b
    return (volt - volt[s0]) / float(b @ volt)


def fj_steady_state(m: FjModel) -> np.ndarray:
    """``(L + K)^{-1} B K 1``."""
    return _spd_solve(m.system_matrix(), m.source, "L + K")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _linear_system(model) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(A, c, diag)`` for ``x' = c - A x``; ``diag`` drives the step-size bound."""
    if isinstance(model, FdModel):
        a = model.graph.laplacian()
        a[[model.s0, model.s1], :] = 0.0
        c = np.zeros(model.graph.n)
        f = model.followers
        diag = np.diag(a)[f] if f.size else np.zeros(1)
        return a, c, diag
    if isinstance(model, FjModel):
        a = model.system_matrix()
        return a, model.source, np.diag(a)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def max_stable_dt(model) -> float:
    _, _, diag = _linear_system(model)
    top = float(np.max(diag)) if diag.size else 0.0
    return np.inf if top <= 0 else RK4_REAL_STABILITY / (2.0 * top)


def default_dt(model) -> float:
    _, _, diag = _linear_system(model)
    top = float(np.max(diag)) if diag.size else 0.0
    return 1.0 if top <= 0 else DEFAULT_DT_FACTOR / top


def simulate_trajectory(
    model,
    x0=None,
    dt: float | None = None,
    horizon: float = 50.0,
    record_every: int = 1,
) -> Trajectory:
    """Integrate the continuous-time dynamics with fixed-step RK4.

    For French-DeGroot models the leader entries of ``x0`` are overwritten
    with 0 and 1 and stay there. ``x0`` defaults to all one-half.
    """
    n = model.graph.n
    x = np.full(n, 0.5) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise ModelError(f"x0 must have length {n}")
    if isinstance(model, FdModel):
        x[model.s0] = 0.0
        x[model.s1] = 1.0
    if dt is None:
        dt = default_dt(model)
    if not dt > 0 or not horizon > 0:
        raise ModelError("dt and horizon must be positive")
    limit = max_stable_dt(model)
    if dt > limit:
        raise ModelError(f"step size {dt:g} is unstable; maximum admissible dt is {limit:g}")
    record_every = max(1, int(record_every))
    steps = max(1, int(np.ceil(horizon / dt - 1e-12)))
    # keep the last step on the recording grid
    steps = -(-steps // record_every) * record_every
    a, c, _ = _linear_system(model)
    states = _kernels.rk4_linear(a, c, x, dt, steps, record_every)
    times = dt * record_every * np.arange(states.shape[0])
    return Trajectory(times, states)


def convergence_horizon(model, tol: float = 1e-8) -> float:
    """Time after which the error from any start in ``[0, 1]^n`` is below ``tol`` (2-norm bound)."""
    a, _, _ = _linear_system(model)
    if isinstance(model, FdModel):
        f = model.followers
        if f.size == 0:
            return 1.0
        a = a[np.ix_(f, f)]
    lam_min = float(np.linalg.eigvalsh(a)[0])
    if lam_min <= 0:
        return np.inf
    return float((np.log(1.0 / tol) + 0.5 * np.log(a.shape[0])) / lam_min)

