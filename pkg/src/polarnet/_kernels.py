"""Inner loops with two interchangeable backends.

Every kernel exists twice: a loop version compiled with numba ``@njit`` and a
vectorized pure-numpy version. The public names at the bottom of this module
point at the numba versions unless numba is missing or the environment
variable ``POLARNET_DISABLE_NUMBA`` is set to a truthy value. Both backends are
always importable as ``numba_backend`` / ``numpy_backend`` so tests and the
benchmark can compare them directly.
"""

import itertools
import os
from types import SimpleNamespace

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FLAG = os.environ.get("POLARNET_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")

# bisection steps for the box+budget projection; 200 halvings exhaust float64
_BISECT_ITERS = 200


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# loop versions (compiled)
# ---------------------------------------------------------------------------


def _edge_disagreement_loop(eu, ev, ew, x):
    total = 0.0
    for k in range(eu.shape[0]):
        diff = x[eu[k]] - x[ev[k]]
        total += ew[k] * diff * diff
    return total


def _edge_gradient_loop(eu, ev, y):
    out = np.empty(eu.shape[0])
    for k in range(eu.shape[0]):
        diff = y[eu[k]] - y[ev[k]]
        out[k] = -0.5 * diff * diff
    return out


def _pair_polarization_extremes_loop(pinv, pinv_sq):
    n = pinv.shape[0]
    p_min = np.inf
    p_max = -np.inf
    arg_i = 0
    arg_j = 1
    for i in range(n):
        for j in range(i + 1, n):
            r = pinv[i, i] + pinv[j, j] - 2.0 * pinv[i, j]
            d2 = pinv_sq[i, i] + pinv_sq[j, j] - 2.0 * pinv_sq[i, j]
            p = d2 / (r * r)
            if p < p_min:
                p_min = p
            if p > p_max:
                p_max = p
                arg_i = i
                arg_j = j
    return p_min, p_max, arg_i, arg_j


def _project_box_budget_loop(z, lo, hi, budget):
    n = z.shape[0]
    out = np.empty(n)
    total = 0.0
    for i in range(n):
        out[i] = min(max(z[i], lo), hi)
        total += out[i]
    if total <= budget:
        return out
    # sum(clip(z - tau)) is nonincreasing in tau; bracket the root
    t_lo = 0.0
    t_hi = 0.0
    for i in range(n):
        if z[i] - lo > t_hi:
            t_hi = z[i] - lo
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (t_lo + t_hi)
        s = 0.0
        for i in range(n):
            s += min(max(z[i] - mid, lo), hi)
        if s > budget:
            t_lo = mid
        else:
            t_hi = mid
        if t_hi - t_lo <= 1e-15 * max(1.0, t_hi):
            break
    # exact solve on the segment identified by the bracket
    tau = t_hi
    free_sum = 0.0
    n_free = 0
    fixed = 0.0
    for i in range(n):
        v = z[i] - tau
        if v <= lo:
            fixed += lo
        elif v >= hi:
            fixed += hi
        else:
            free_sum += z[i]
            n_free += 1
    if n_free > 0:
        tau_exact = (free_sum - (budget - fixed)) / n_free
        if t_lo <= tau_exact <= t_hi:
            tau = tau_exact
    for i in range(n):
        out[i] = min(max(z[i] - tau, lo), hi)
    return out


def _csr_matvec_into(indptr, indices, data, c, x, out):
    for i in range(c.shape[0]):
        acc = c[i]
        for p in range(indptr[i], indptr[i + 1]):
            acc -= data[p] * x[indices[p]]
        out[i] = acc


# called from inside the compiled RK4 loop, so it must be compiled too
_csr_matvec_into = _njit(_csr_matvec_into)


def _rk4_linear_loop(a, c, x0, dt, steps, record_every):
    n = x0.shape[0]
    # system matrices are graph Laplacians plus diagonals: compress once
    nnz = 0
    for i in range(n):
        for j in range(n):
            if a[i, j] != 0.0:
                nnz += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = np.empty(nnz, dtype=np.int64)
    data = np.empty(nnz)
    p = 0
    for i in range(n):
        for j in range(n):
            if a[i, j] != 0.0:
                indices[p] = j
                data[p] = a[i, j]
                p += 1
        indptr[i + 1] = p

    n_rec = steps // record_every + 1
    out = np.empty((n_rec, n))
    x = x0.copy()
    out[0] = x
    rec = 1
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for step in range(1, steps + 1):
        _csr_matvec_into(indptr, indices, data, c, x, k1)
        for i in range(n):
            tmp[i] = x[i] + 0.5 * dt * k1[i]
        _csr_matvec_into(indptr, indices, data, c, tmp, k2)
        for i in range(n):
            tmp[i] = x[i] + 0.5 * dt * k2[i]
        _csr_matvec_into(indptr, indices, data, c, tmp, k3)
        for i in range(n):
            tmp[i] = x[i] + dt * k3[i]
        _csr_matvec_into(indptr, indices, data, c, tmp, k4)
        for i in range(n):
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if step % record_every == 0:
            out[rec] = x
            rec += 1
    return out


def _best_subset_loop(base, lin, quad, size):
    # f(S) = base + sum_{v in S} lin[v] + sum_{u, v in S} quad[u, v]
    n = lin.shape[0]
    best = np.inf
    best_idx = np.zeros(size, dtype=np.int64)
    if size == 0:
        return base, best_idx
    idx = np.arange(size)
    while True:
        val = base
        for a in range(size):
            u = idx[a]
            val += lin[u] + quad[u, u]
            for b in range(a + 1, size):
                val += 2.0 * quad[u, idx[b]]
        if val < best:
            best = val
            best_idx[:] = idx
        # next combination in lexicographic order
        pos = size - 1
        while pos >= 0 and idx[pos] == n - size + pos:
            pos -= 1
        if pos < 0:
            break
        idx[pos] += 1
        for a in range(pos + 1, size):
            idx[a] = idx[a - 1] + 1
    return best, best_idx


# ---------------------------------------------------------------------------
# vectorized numpy versions
# ---------------------------------------------------------------------------


def _edge_disagreement_np(eu, ev, ew, x):
    diff = x[eu] - x[ev]
    return float(np.dot(ew, diff * diff))


def _edge_gradient_np(eu, ev, y):
    diff = y[eu] - y[ev]
    return -0.5 * diff * diff


def _pair_polarization_extremes_np(pinv, pinv_sq):
    n = pinv.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    dg = np.diag(pinv)
    dgs = np.diag(pinv_sq)
    r = dg[iu] + dg[ju] - 2.0 * pinv[iu, ju]
    d2 = dgs[iu] + dgs[ju] - 2.0 * pinv_sq[iu, ju]
    p = d2 / (r * r)
    k = int(np.argmax(p))
    return float(p.min()), float(p[k]), int(iu[k]), int(ju[k])


def _project_box_budget_np(z, lo, hi, budget):
    out = np.clip(z, lo, hi)
    if out.sum() <= budget:
        return out
    t_lo, t_hi = 0.0, max(float(np.max(z - lo)), 0.0)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (t_lo + t_hi)
        if np.clip(z - mid, lo, hi).sum() > budget:
            t_lo = mid
        else:
            t_hi = mid
        if t_hi - t_lo <= 1e-15 * max(1.0, t_hi):
            break
    tau = t_hi
    v = z - tau
    free = (v > lo) & (v < hi)
    n_free = int(free.sum())
    if n_free:
        fixed = lo * np.count_nonzero(v <= lo) + hi * np.count_nonzero(v >= hi)
        tau_exact = (z[free].sum() - (budget - fixed)) / n_free
        if t_lo <= tau_exact <= t_hi:
            tau = tau_exact
    return np.clip(z - tau, lo, hi)


def _rk4_linear_np(a, c, x0, dt, steps, record_every):
    def f(x):
        return c - a @ x

    n_rec = steps // record_every + 1
    out = np.empty((n_rec, x0.shape[0]))
    x = x0.copy()
    out[0] = x
    rec = 1
    for step in range(1, steps + 1):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % record_every == 0:
            out[rec] = x
            rec += 1
    return out


def _best_subset_np(base, lin, quad, size):
    if size == 0:
        return float(base), np.zeros(0, dtype=np.int64)
    n = lin.shape[0]
    diag = lin + np.diag(quad)
    best = np.inf
    best_idx = None
    for combo in itertools.combinations(range(n), size):
        idx = np.fromiter(combo, dtype=np.int64, count=size)
        sub = quad[np.ix_(idx, idx)]
        val = base + diag[idx].sum() + (sub.sum() - np.trace(sub))
        if val < best:
            best = val
            best_idx = idx
    return float(best), best_idx


numpy_backend = SimpleNamespace(
    name="numpy",
    edge_disagreement=_edge_disagreement_np,
    edge_gradient=_edge_gradient_np,
    pair_polarization_extremes=_pair_polarization_extremes_np,
    project_box_budget=_project_box_budget_np,
    rk4_linear=_rk4_linear_np,
    best_subset=_best_subset_np,
)

if HAVE_NUMBA:
    numba_backend = SimpleNamespace(
        name="numba",
        edge_disagreement=_njit(_edge_disagreement_loop),
        edge_gradient=_njit(_edge_gradient_loop),
        pair_polarization_extremes=_njit(_pair_polarization_extremes_loop),
        project_box_budget=_njit(_project_box_budget_loop),
        rk4_linear=_njit(_rk4_linear_loop),
        best_subset=_njit(_best_subset_loop),
    )
else:  # pragma: no cover
    numba_backend = None

backend = numba_backend if USE_NUMBA else numpy_backend


def edge_disagreement(eu, ev, ew, x):
    """Sum of ``w * (x_u - x_v)**2`` over the edge arrays."""
    return float(backend.edge_disagreement(eu, ev, ew, np.ascontiguousarray(x, dtype=float)))


def edge_gradient(eu, ev, y):
    """Per-edge ``-0.5 * (y_u - y_v)**2``."""
    return np.asarray(backend.edge_gradient(eu, ev, np.ascontiguousarray(y, dtype=float)))


def pair_polarization_extremes(pinv, pinv_sq):
    """Min and max of ``d_B(i, j)**2 / r(i, j)**2`` over all pairs, plus the argmax pair."""
    p_min, p_max, i, j = backend.pair_polarization_extremes(
        np.ascontiguousarray(pinv), np.ascontiguousarray(pinv_sq)
    )
    return float(p_min), float(p_max), (int(i), int(j))


def project_box_budget(z, lo, hi, budget):
    """Euclidean projection onto ``{lo <= x <= hi, sum(x) <= budget}``.

    Requires ``lo <= hi`` and ``len(z) * lo <= budget`` (nonempty set).
    """
    z = np.ascontiguousarray(z, dtype=float)
    return np.asarray(backend.project_box_budget(z, float(lo), float(hi), float(budget)))


def rk4_linear(a, c, x0, dt, steps, record_every=1):
    """Fixed-step RK4 for ``x' = c - a @ x``; returns recorded states row-wise."""
    return np.asarray(
        backend.rk4_linear(
            np.ascontiguousarray(a, dtype=float),
            np.ascontiguousarray(c, dtype=float),
            np.ascontiguousarray(x0, dtype=float),
            float(dt),
            int(steps),
            int(record_every),
        )
    )


def best_subset(base, lin, quad, size):
    """Exhaustive minimum of a set function with pairwise interactions.

    Scans all ``size``-subsets S of ``range(len(lin))`` in lexicographic order
    and minimizes ``base + sum(lin[S]) + sum(quad[S][:, S])``. Ties keep the
    lexicographically first subset.
    """
    val, idx = backend.best_subset(
        float(base),
        np.ascontiguousarray(lin, dtype=float),
        np.ascontiguousarray(quad, dtype=float),
        int(size),
    )
    return float(val), [int(i) for i in idx]
