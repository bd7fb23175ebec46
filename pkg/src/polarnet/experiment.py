"""Lambda sweep comparing l1-rounded flips against top-k and random flips."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .design_fj import (
    FlipObjective,
    flip_preferences_budget,
    flip_preferences_l1,
    lambda_grid,
    random_flip_baseline,
)
from .errors import PolarnetError
from .graph import WeightedGraph, largest_connected_component
from .io import generate_random_beta

CSV_HEADER = ["lambda", "k", "index_l1", "index_topk", "index_random_mean", "index_random_std"]


@dataclass(frozen=True)
class ExperimentRow:
    lam: float
    k: int
    index_l1: float
    index_topk: float
    index_random_mean: float
    index_random_std: float
    nonzero_count: int
    l1_converged: bool
    topk_converged: bool


@dataclass
class ExperimentReport:
    rows: list[ExperimentRow]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "rows": [asdict(r) for r in self.rows]}

    def csv_rows(self):
        for r in self.rows:
            yield [r.lam, r.k, r.index_l1, r.index_topk, r.index_random_mean, r.index_random_std]

    def k_trend(self) -> str:
        """Describe how the flip count moves across the sweep; nothing is asserted."""
        ks = [r.k for r in self.rows]
        if len(ks) < 2 or ks[0] == ks[-1]:
            return "flat"
        steps = np.diff(ks)
        if np.all(steps <= 0):
            return "nonincreasing"
        return "decreasing overall" if ks[-1] < ks[0] else "increasing overall"


def prepare_instance(g: WeightedGraph, unit_weights: bool = True):
    """Largest connected component, optionally with all weights set to 1."""
    lcc, mapping = largest_connected_component(g)
    if unit_weights:
        lcc = lcc.with_weights(np.ones(lcc.m))
    return lcc, mapping


def run_flip_experiment(
    g: WeightedGraph,
    kappa=None,
    beta=None,
    prob_zero: float = 0.35,
    seed: int = 42,
    lambdas=None,
    rho: float = 0.5,
    trials: int = 100,
    rounding: str = "paper",
    unit_weights: bool = True,
) -> ExperimentReport:
    """One sweep over ``lambdas`` (default: 12 geometric points in [0.45, 1]).

    At each lambda the l1 heuristic fixes ``k`` (its flip count); the
    budget relaxation and the random baseline then use that same ``k``.
    ``beta`` is drawn with ``generate_random_beta(n, prob_zero, seed)`` when
    not given; ``kappa`` defaults to ones. ``kappa``/``beta`` are indexed by
    the nodes of the largest component.
    """
    inst, mapping = prepare_instance(g, unit_weights)
    n = inst.n
    kappa = np.ones(n) if kappa is None else np.asarray(kappa, dtype=float)
    if beta is None:
        beta = generate_random_beta(n, prob_zero, seed)
        beta_source = "random"
    else:
        beta = np.asarray(beta, dtype=float)
        beta_source = "given"
    lams = np.sort(lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float))
    obj = FlipObjective(inst, kappa, beta, rho)
    rows = []
    for lam in lams:
        try:
            l1 = flip_preferences_l1(inst, kappa, beta, float(lam), rho, rounding=rounding, objective=obj)
            k = l1.flip_count
            topk = flip_preferences_budget(inst, kappa, beta, k, rho, rounding=rounding, objective=obj)
            rnd = random_flip_baseline(inst, kappa, beta, k, trials, seed, rho, objective=obj)
        except PolarnetError as exc:
            raise type(exc)(f"lambda={lam:g}: {exc}") from exc
        rows.append(
            ExperimentRow(
                lam=float(lam),
                k=k,
                index_l1=l1.objective_after,
                index_topk=topk.objective_after,
                index_random_mean=rnd.mean,
                index_random_std=rnd.std,
                nonzero_count=l1.extra["nonzero_count"],
                l1_converged=l1.converged,
                topk_converged=topk.converged,
            )
        )
    report = ExperimentReport(rows)
    report.metadata = {
        "n": n,
        "m": inst.m,
        "original_n": g.n,
        "original_m": g.m,
        "prob_zero": float(prob_zero),
        "beta_source": beta_source,
        "zero_count": int(np.count_nonzero(beta == 0)),
        "seed": seed,
        "rho": float(rho),
        "trials": int(trials),
        "rounding": rounding,
        "unit_weights": bool(unit_weights),
        "index_before": obj.value(obj.beta),
        "k_trend": report.k_trend(),
    }
    return report
