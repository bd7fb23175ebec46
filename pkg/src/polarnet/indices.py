"""Disagreement, polarization and the combined polarization-disagreement index."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _kernels
from .dynamics import FdModel, FjModel, fd_steady_state, fj_steady_state
from .errors import ParameterError
from .graph import LaplacianKit, WeightedGraph, laplacian_kit


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"rho must lie in [0, 1], got {rho}")
    return rho


@dataclass(frozen=True)
class IndexReport:
    model: str
    disagreement: float
    polarization: float
    rho: float
    index: float
    weighted_polarization: float | None = None
    alpha: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def disagreement(g: WeightedGraph, x) -> float:
    """Sum over edges of ``w(u, v) * (x_u - x_v)**2``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise ParameterError(f"opinion vector must have length {g.n}")
    return _kernels.edge_disagreement(g.eu, g.ev, g.ew, x)


def disagreement_quadratic(laplacian: np.ndarray, x) -> float:
    """``x^T L x``; same value as :func:`disagreement`."""
    x = np.asarray(x, dtype=float)
    return float(x @ laplacian @ x)


def per_edge_disagreement(g: WeightedGraph, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return g.ew * (x[g.eu] - x[g.ev]) ** 2


def polarization(x) -> float:
    """Squared deviation from the plain average, ``x^T J x``."""
    x = np.asarray(x, dtype=float)
    dev = x - x.mean()
    return float(dev @ dev)


def kappa_projector(kappa) -> np.ndarray:
    """``I - 1 kappa^T / sum(kappa)``."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[0]
    return np.eye(n) - np.outer(np.ones(n), kappa) / kappa.sum()


def weighted_polarization(x, kappa) -> tuple[float, float]:
    """Return ``(P_tilde, alpha)``.

    ``alpha`` is the kappa-weighted mean of ``x`` and ``P_tilde`` the
    kappa-weighted squared deviation from it.
    """
    x = np.asarray(x, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != x.shape:
        raise ParameterError("kappa and x must have the same length")
    if np.any(~(kappa > 0)):
        raise ParameterError("kappa must be strictly positive")
    alpha = float(kappa @ x / kappa.sum())
    dev = x - alpha
    return float(kappa @ (dev * dev)), alpha


def weighted_polarization_quadratic(x, kappa) -> float:
    """``x^T P^T K P x`` with ``P`` the kappa projector."""
    x = np.asarray(x, dtype=float)
    proj = kappa_projector(kappa)
    px = proj @ x
    return float(px @ (np.asarray(kappa) * px))


def pd_index(disagreement_value: float, polarization_value: float, rho: float) -> float:
    """``rho * D + (1 - rho) * P``; pass ``P_tilde`` for the weighted index."""
    rho = _check_rho(rho)
    return rho * float(disagreement_value) + (1.0 - rho) * float(polarization_value)


# -- French-DeGroot closed forms ---------------------------------------------


def _check_pair(kit: LaplacianKit, s0: int, s1: int):
    if s0 == s1:
        raise ParameterError("leaders must differ")
    if not (0 <= s0 < kit.n and 0 <= s1 < kit.n):
        raise ParameterError(f"leader out of range for n={kit.n}")


def fd_disagreement_closed(kit: LaplacianKit, s0: int, s1: int) -> float:
    """Disagreement equals the inverse resistance distance between the leaders."""
    _check_pair(kit, s0, s1)
    return 1.0 / kit.resistance(s0, s1)


def fd_polarization_closed(kit: LaplacianKit, s0: int, s1: int) -> float:
    """Polarization equals ``(d_B / r)**2`` between the leaders."""
    _check_pair(kit, s0, s1)
    r = kit.resistance(s0, s1)
    b = kit.biharmonic(s0, s1)
    return (b / r) ** 2


# -- Friedkin-Johnsen ----------------------------------------------------------


def fj_projected_source(m: FjModel) -> np.ndarray:
    """``s_tilde = (I - kappa 1^T / sum(kappa)) B K 1``."""
    s = m.source
    return s - m.kappa * (s.sum() / m.kappa.sum())


def fj_quadratic_forms(m: FjModel) -> tuple[float, float]:
    """``(D, P_tilde)`` evaluated as quadratic forms in the projected source.

    ``D = y^T L y`` and ``P_tilde = y^T K y`` with ``y = (L + K)^{-1} s_tilde``.
    """
    lap = m.graph.laplacian()
    y = cho_solve(cho_factor(lap + np.diag(m.kappa)), fj_projected_source(m))
    return float(y @ lap @ y), float(y @ (m.kappa * y))


def fj_index_closed(m: FjModel, rho: float = 0.5) -> float:
    """Weighted index at ``rho = 1/2`` as ``0.5 * s_tilde^T (L + K)^{-1} s_tilde``."""
    if float(rho) != 0.5:
        raise ParameterError(
            "the closed form only holds at rho = 0.5; use fj_report for other rho"
        )
    st = fj_projected_source(m)
    y = cho_solve(cho_factor(m.system_matrix()), st)
    return 0.5 * float(st @ y)


# -- reports -------------------------------------------------------------------


def fd_report(m: FdModel, rho: float = 0.5, x=None) -> IndexReport:
    rho = _check_rho(rho)
    if x is None:
        x = fd_steady_state(m)
    d = disagreement(m.graph, x)
    p = polarization(x)
    return IndexReport("fd", d, p, rho, pd_index(d, p, rho))


def fj_report(m: FjModel, rho: float = 0.5, x=None) -> IndexReport:
    rho = _check_rho(rho)
    if x is None:
        x = fj_steady_state(m)
    d = disagreement(m.graph, x)
    p = polarization(x)
    pt, alpha = weighted_polarization(x, m.kappa)
    return IndexReport("fj", d, p, rho, pd_index(d, pt, rho), pt, alpha)


def fj_index(m: FjModel, rho: float = 0.5) -> float:
    """Weighted index ``rho * D + (1 - rho) * P_tilde`` from the steady state."""
    return fj_report(m, rho).index


def fd_report_closed(g_or_kit, s0: int, s1: int, rho: float = 0.5) -> IndexReport:
    kit = g_or_kit if isinstance(g_or_kit, LaplacianKit) else laplacian_kit(g_or_kit)
    rho = _check_rho(rho)
    d = fd_disagreement_closed(kit, s0, s1)
    p = fd_polarization_closed(kit, s0, s1)
    return IndexReport("fd", d, p, rho, pd_index(d, p, rho))
