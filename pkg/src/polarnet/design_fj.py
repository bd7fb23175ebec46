"""Friedkin-Johnsen network design: edge weights and preference flips."""

from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _kernels
from .dynamics import FjModel
from .errors import ModelError, ParameterError, SolverError
from .graph import WeightedGraph
from .indices import kappa_projector

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
ROUND_THRESHOLD = 1e-6
ORACLE_LIMIT = 10**6
ROUNDING_RULES = ("prefix", "paper")
RESIDUAL_EVERY = 10


def _as_kappa_beta(g: WeightedGraph, kappa, beta):
    # FjModel does the validation
    m = FjModel(g, np.ones(g.n) if kappa is None else kappa, beta)
    return m.kappa, m.beta


def _laplacian(n, eu, ev, w):
    lap = np.zeros((n, n))
    np.add.at(lap, (eu, ev), -w)
    np.add.at(lap, (ev, eu), -w)
    lap[np.diag_indices(n)] = -lap.sum(axis=1)
    return lap


# ---------------------------------------------------------------------------
# edge weights
# ---------------------------------------------------------------------------


def weight_objective(g: WeightedGraph, kappa, beta, weights) -> tuple[float, np.ndarray]:
    """Weighted index at ``rho = 1/2`` as a function of the edge weights, with gradient.

    ``f(w) = 0.5 * s~^T (L(w) + K)^{-1} s~`` and
    ``df/dw_e = -0.5 * (y_u - y_v)**2`` for ``y = (L(w) + K)^{-1} s~``.
    """
    kappa = np.asarray(kappa, dtype=float)
    beta = np.asarray(beta, dtype=float)
    s = kappa * beta
    st = s - kappa * (s.sum() / kappa.sum())
    lap = _laplacian(g.n, g.eu, g.ev, np.asarray(weights, dtype=float))
    y = cho_solve(cho_factor(lap + np.diag(kappa)), st)
    return 0.5 * float(st @ y), _kernels.edge_gradient(g.eu, g.ev, y)


@dataclass
class WeightDesign:
    weights: np.ndarray
    objective: float
    start_objective: float
    iterations: int
    converged: bool
    grad_norm: float
    lower: float
    upper: float
    budget: float
    graph: WeightedGraph | None = None

    def to_dict(self) -> dict:
        return {
            "weights": [float(x) for x in self.weights],
            "objective": self.objective,
            "start_objective": self.start_objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_gradient_norm": self.grad_norm,
            "lower": self.lower,
            "upper": self.upper,
            "budget": self.budget,
            "total_weight": float(np.sum(self.weights)),
        }


def optimize_weights(
    g: WeightedGraph,
    kappa,
    beta,
    lower: float,
    upper: float,
    W: float,
    tol: float = 1e-7,
    max_iter: int = 10000,
) -> WeightDesign:
    """Minimize the weighted index (rho = 1/2) over ``lower <= w <= upper, sum(w) <= W``.

    Projected gradient with Armijo backtracking along the projection arc,
    started from ``clip(W / m, lower, upper)``. Stops once the projected
    gradient ``w - proj(w - grad)`` has 2-norm at most ``tol``.
    """
    kappa, beta = _as_kappa_beta(g, kappa, beta)
    m = g.m
    if m == 0:
        raise ParameterError("graph has no edges to weight")
    if not lower >= 0:
        raise ParameterError(f"lower bound must be nonnegative, got {lower}")
    if lower > upper:
        raise ParameterError(f"infeasible bounds: lower={lower} > upper={upper}")
    if m * lower > W:
        raise ParameterError(f"infeasible budget: m*lower = {m * lower:g} > W = {W:g}")

    def proj(z):
        return _kernels.project_box_budget(z, lower, upper, W)

    w = np.full(m, max(lower, min(upper, W / m)))
    f, grad = weight_objective(g, kappa, beta, w)
    f0 = f
    step = 1.0
    converged = False
    pg_norm = float(np.linalg.norm(w - proj(w - grad)))
    it = 0
    for it in range(1, max_iter + 1):
        if pg_norm <= tol:
            converged = True
            it -= 1
            break
        step = min(step * 2.0, 1e12)
        while True:
            w_new = proj(w - step * grad)
            f_new, grad_new = weight_objective(g, kappa, beta, w_new)
            if f_new <= f + ARMIJO * float(grad @ (w_new - w)):
                break
            step *= 0.5
            if step < 1e-30:
                raise SolverError("line search failed to find a descent step")
        w, f, grad = w_new, f_new, grad_new
        pg_norm = float(np.linalg.norm(w - proj(w - grad)))
    else:
        converged = pg_norm <= tol
    graph = g.with_weights(w) if np.all(w > 0) else None
    return WeightDesign(w, f, f0, it, converged, pg_norm, float(lower), float(upper), float(W), graph)


# ---------------------------------------------------------------------------
# preference flips
# ---------------------------------------------------------------------------


class FlipObjective:
    """Weighted index as a quadratic in the preference vector.

    With ``x = (L + K)^{-1} K theta`` the index is ``theta^T Q theta`` where
    ``Q = K M^{-1} (rho L + (1 - rho) P^T K P) M^{-1} K``, ``M = L + K`` and
    ``P`` the kappa projector. Flipping a selection ``d`` in ``[0, 1]^n``
    gives ``theta = beta + delta * d`` with ``delta = 1 - 2 beta``.
    """

    def __init__(self, g: WeightedGraph, kappa, beta, rho: float = 0.5):
        if not 0.0 <= rho <= 1.0:
            raise ParameterError(f"rho must lie in [0, 1], got {rho}")
        self.kappa, self.beta = _as_kappa_beta(g, kappa, beta)
        self.graph = g
        self.rho = float(rho)
        lap = g.laplacian()
        kmat = np.diag(self.kappa)
        minv = cho_solve(cho_factor(lap + kmat), np.eye(g.n))
        minv = 0.5 * (minv + minv.T)
        proj = kappa_projector(self.kappa)
        inner = self.rho * lap + (1.0 - self.rho) * proj.T @ kmat @ proj
        t = minv @ kmat
        q = t.T @ inner @ t
        self.Q = 0.5 * (q + q.T)
        self.delta = 1.0 - 2.0 * self.beta
        self._lipschitz = None

    @property
    def n(self) -> int:
        return self.graph.n

    def value(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        return float(theta @ self.Q @ theta)

    def theta(self, d) -> np.ndarray:
        return self.beta + self.delta * np.asarray(d, dtype=float)

    def value_d(self, d) -> float:
        return self.value(self.theta(d))

    def grad_theta(self, theta) -> np.ndarray:
        return 2.0 * self.Q @ np.asarray(theta, dtype=float)

    def grad_d(self, d) -> np.ndarray:
        return self.delta * self.grad_theta(self.theta(d))

    @property
    def lipschitz(self) -> float:
        """Largest eigenvalue of the Hessian in ``d``."""
        if self._lipschitz is None:
            hess = 2.0 * self.delta[:, None] * self.Q * self.delta[None, :]
            self._lipschitz = float(np.linalg.eigvalsh(hess)[-1])
        return self._lipschitz

    def flip(self, nodes) -> np.ndarray:
        theta = self.beta.copy()
        idx = list(nodes)
        theta[idx] = 1.0 - theta[idx]
        return theta

    def value_flipped(self, nodes) -> float:
        return self.value(self.flip(nodes))


@dataclass
class FlipPlan:
    d: np.ndarray
    flipped: list[int]
    theta: np.ndarray
    objective_before: float
    objective_after: float
    objective_relaxed: float
    rho: float
    method: str
    rounding: str
    iterations: int
    converged: bool
    lam: float | None = None
    k: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def flip_count(self) -> int:
        return len(self.flipped)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "rounding": self.rounding,
            "rho": self.rho,
            "lambda": self.lam,
            "k": self.k,
            "flipped": self.flipped,
            "flip_count": self.flip_count,
            "objective_before": self.objective_before,
            "objective_after": self.objective_after,
            "objective_relaxed": self.objective_relaxed,
            "iterations": self.iterations,
            "converged": self.converged,
            "d": [float(x) for x in self.d],
            "theta": [float(x) for x in self.theta],
            **self.extra,
        }


def _check_binary(beta):
    if not np.all((beta == 0) | (beta == 1)):
        raise ModelError("preference flipping needs binary beta")


def _round(obj: FlipObjective, d, cap: int | None, rule: str, threshold: float) -> list[int]:
    """Turn a relaxed selection into a flip set.

    ``paper``: every entry above ``threshold`` when ``cap`` is None, else
    exactly the ``cap`` largest entries. ``prefix``: walk the same ranking
    (above ``threshold``, at most ``cap`` long) and keep the prefix with the
    lowest rounded objective; the empty set counts. Ties in ``d`` go to the
    smaller node id.
    """
    if rule not in ROUNDING_RULES:
        raise ParameterError(f"unknown rounding rule {rule!r}; choose from {ROUNDING_RULES}")
    order = np.lexsort((np.arange(d.shape[0]), -d))
    if rule == "paper":
        if cap is None:
            chosen = order[d[order] > threshold]
        else:
            chosen = order[:cap]
        return sorted(int(v) for v in chosen)
    ranked = order[d[order] > threshold]
    if cap is not None:
        ranked = ranked[:cap]
    theta = obj.beta.copy()
    best_val, best_len = obj.value(theta), 0
    for j, v in enumerate(ranked, start=1):
        theta[v] = 1.0 - theta[v]
        val = obj.value(theta)
        if val < best_val - 1e-15 * max(1.0, abs(best_val)):
            best_val, best_len = val, j
    return sorted(int(v) for v in ranked[:best_len])


def _fista(obj: FlipObjective, prox, penalty, tol, max_iter):
    """Monotone FISTA on ``obj.value_d(d) + penalty(d)`` from ``d = 0``.

    Every accepted iterate has composite objective no larger than the last;
    the extrapolated point is only used to propose the step.
    """
    n = obj.n
    lip = obj.lipschitz
    step = 1.0 / lip if lip > 0 else 1.0
    d = np.zeros(n)
    f = obj.value_d(d) + penalty(d)
    yk = d.copy()
    t = 1.0
    history = [f]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = prox(yk - step * obj.grad_d(yk), step)
        fz = obj.value_d(z) + penalty(z)
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if fz <= f:
            d_next, f_next = z, fz
        else:
            d_next, f_next = d, f
        yk = d_next + (t / t_next) * (z - d_next) + ((t - 1.0) / t_next) * (d_next - d)
        change = float(np.max(np.abs(d_next - d))) if fz <= f else float(np.max(np.abs(z - d)))
        d, f, t = d_next, f_next, t_next
        history.append(f)
        # on flat minimizing faces momentum can wander without the iterate
        # change ever shrinking, so also test the plain-step residual periodically
        if change <= tol or it % RESIDUAL_EVERY == 0:
            plain = prox(d - step * obj.grad_d(d), step)
            if float(np.max(np.abs(plain - d))) <= tol:
                converged = True
                break
            if change <= tol:
                yk, t = d.copy(), 1.0
    return d, it, converged, history


def flip_preferences_l1(
    g: WeightedGraph,
    kappa,
    beta,
    lam: float,
    rho: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 200000,
    round_threshold: float = ROUND_THRESHOLD,
    rounding: str = "prefix",
    objective: FlipObjective | None = None,
) -> FlipPlan:
    """l1-regularized relaxation: minimize ``I(theta(d)) + lam * sum(d)`` over ``[0, 1]^n``.

    The proximal step is soft-thresholding followed by clipping to [0, 1].
    """
    if not lam >= 0:
        raise ParameterError(f"lambda must be nonnegative, got {lam}")
    obj = objective or FlipObjective(g, kappa, beta, rho)
    _check_binary(obj.beta)

    def prox(z, step):
        return np.clip(z - step * lam, 0.0, 1.0)

    def penalty(d):
        return lam * float(d.sum())

    d, it, converged, history = _fista(obj, prox, penalty, tol, max_iter)
    flipped = _round(obj, d, None, rounding, round_threshold)
    theta = obj.flip(flipped)
    return FlipPlan(
        d=d,
        flipped=flipped,
        theta=theta,
        objective_before=obj.value(obj.beta),
        objective_after=obj.value(theta),
        objective_relaxed=obj.value_d(d),
        rho=obj.rho,
        method="l1",
        rounding=rounding,
        iterations=it,
        converged=converged,
        lam=float(lam),
        extra={"nonzero_count": int(np.count_nonzero(d > round_threshold)),
               "composite_objective": history[-1]},
    )


def flip_preferences_budget(
    g: WeightedGraph,
    kappa,
    beta,
    k: int,
    rho: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 200000,
    round_threshold: float = ROUND_THRESHOLD,
    rounding: str = "prefix",
    objective: FlipObjective | None = None,
) -> FlipPlan:
    """Budget relaxation: minimize ``I(theta(d))`` over ``0 <= d <= 1, sum(d) <= k``,
    then round the top ``k`` entries.
    """
    obj = objective or FlipObjective(g, kappa, beta, rho)
    _check_binary(obj.beta)
    k = int(k)
    if not 0 <= k <= obj.n:
        raise ParameterError(f"k must lie in [0, n={obj.n}], got {k}")

    def prox(z, step):
        return _kernels.project_box_budget(z, 0.0, 1.0, float(k))

    def penalty(d):
        return 0.0

    d, it, converged, _ = _fista(obj, prox, penalty, tol, max_iter)
    flipped = _round(obj, d, k, rounding, round_threshold)
    theta = obj.flip(flipped)
    return FlipPlan(
        d=d,
        flipped=flipped,
        theta=theta,
        objective_before=obj.value(obj.beta),
        objective_after=obj.value(theta),
        objective_relaxed=obj.value_d(d),
        rho=obj.rho,
        method="budget",
        rounding=rounding,
        iterations=it,
        converged=converged,
        k=k,
    )


@dataclass(frozen=True)
class BaselineResult:
    mean: float
    std: float
    values: list[float]
    k: int
    seed: int | None

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "k": self.k, "seed": self.seed,
                "trials": len(self.values), "values": self.values}


def random_flip_baseline(
    g: WeightedGraph,
    kappa,
    beta,
    k: int,
    trials: int = 100,
    seed: int | None = 42,
    rho: float = 0.5,
    objective: FlipObjective | None = None,
) -> BaselineResult:
    """Flip ``k`` uniformly random nodes, ``trials`` times; population std."""
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    obj = objective or FlipObjective(g, kappa, beta, rho)
    k = int(k)
    if not 0 <= k <= obj.n:
        raise ParameterError(f"k must lie in [0, n={obj.n}], got {k}")
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(trials):
        nodes = rng.choice(obj.n, size=k, replace=False)
        vals.append(obj.value_flipped(nodes))
    # exact rational arithmetic: identical values give that value and std 0
    mean = float(statistics.mean(vals))
    std = float(statistics.pstdev(vals))
    return BaselineResult(mean, std, vals, k, seed)


def exhaustive_flip_oracle(
    g: WeightedGraph,
    kappa,
    beta,
    k: int,
    rho: float = 0.5,
    limit: int = ORACLE_LIMIT,
    objective: FlipObjective | None = None,
) -> tuple[list[int], float]:
    """Best flip set of size at most ``k`` by enumeration.

    Smaller sets win ties, then lexicographic order.
    """
    obj = objective or FlipObjective(g, kappa, beta, rho)
    n = obj.n
    k = int(k)
    if not 0 <= k <= n:
        raise ParameterError(f"k must lie in [0, n={n}], got {k}")
    count = sum(math.comb(n, j) for j in range(k + 1))
    if count > limit:
        raise ParameterError(
            f"{count} candidate flip sets exceed the oracle guard rail of {limit}"
        )
    qb = obj.Q @ obj.beta
    base = float(obj.beta @ qb)
    lin = 2.0 * obj.delta * qb
    quad = obj.delta[:, None] * obj.Q * obj.delta[None, :]
    best_set: list[int] = []
    best_val = base
    for size in range(1, k + 1):
        val, idx = _kernels.best_subset(base, lin, quad, size)
        if val < best_val - 1e-15 * max(1.0, abs(best_val)):
            best_val, best_set = val, idx
    return best_set, float(best_val)


def lambda_grid(lo: float = 0.45, hi: float = 1.0, count: int = 12) -> np.ndarray:
    """Geometric grid of regularization weights, ascending."""
    if not 0 < lo <= hi:
        raise ParameterError("lambda range must satisfy 0 < lo <= hi")
    if count < 1:
        raise ParameterError("lambda count must be at least 1")
    if count == 1:
        return np.array([float(lo)])
    return np.geomspace(lo, hi, count)
