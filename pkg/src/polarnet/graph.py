"""Weighted undirected graphs, Laplacian algebra, resistance and biharmonic distances."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import GraphError, NumericalError

logger = logging.getLogger(__name__)

DEDUPE_POLICIES = ("keep-first", "sum", "error")

# relative eigenvalue cutoff for the pseudoinverse
PINV_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph on nodes ``0..n-1`` with positive edge weights.

    Edges are stored as three parallel arrays with ``u < v`` for every edge,
    in the order they were first seen.
    """

    node_count: int
    eu: np.ndarray
    ev: np.ndarray
    ew: np.ndarray

    def __post_init__(self):
        for name in ("eu", "ev", "ew"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.eu, other.eu)
            and np.array_equal(self.ev, other.ev)
            and np.array_equal(self.ew, other.ew)
        )

    __hash__ = None

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def m(self) -> int:
        return int(self.eu.shape[0])

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(u), int(v), float(w)) for u, v, w in zip(self.eu, self.ev, self.ew)]

    @property
    def total_weight(self) -> float:
        return float(self.ew.sum())

    @property
    def w_min(self) -> float:
        return float(self.ew.min()) if self.m else float("nan")

    @property
    def w_max(self) -> float:
        return float(self.ew.max()) if self.m else float("nan")

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[self.eu, self.ev] = self.ew
        a[self.ev, self.eu] = self.ew
        return a

    def laplacian(self) -> np.ndarray:
        a = self.adjacency()
        return np.diag(a.sum(axis=1)) - a

    def neighbors(self, v: int) -> dict[int, float]:
        """Neighbor -> weight map of node ``v``."""
        out = {}
        for u, x, w in zip(self.eu, self.ev, self.ew):
            if u == v:
                out[int(x)] = float(w)
            elif x == v:
                out[int(u)] = float(w)
        return out

    def degree(self) -> np.ndarray:
        d = np.zeros(self.n)
        np.add.at(d, self.eu, self.ew)
        np.add.at(d, self.ev, self.ew)
        return d

    def component_labels(self) -> tuple[int, np.ndarray]:
        mat = coo_matrix((np.ones(self.m), (self.eu, self.ev)), shape=(self.n, self.n))
        return connected_components(mat, directed=False)

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        count, _ = self.component_labels()
        return count == 1

    def with_weights(self, weights: Sequence[float]) -> "WeightedGraph":
        """Same edge set, new weights (must be positive)."""
        w = np.array(weights, dtype=float)
        if w.shape != (self.m,):
            raise GraphError(f"expected {self.m} weights, got shape {w.shape}")
        if np.any(w <= 0):
            k = int(np.argmax(w <= 0))
            raise GraphError(f"nonpositive weight {w[k]} on edge ({self.eu[k]}, {self.ev[k]})")
        return WeightedGraph(self.n, self.eu.copy(), self.ev.copy(), w)

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m}, total_weight={self.total_weight:g})"


def build_graph(
    edge_list: Iterable[Sequence],
    node_count: int | None = None,
    dedupe: str = "error",
) -> WeightedGraph:
    """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

    ``dedupe`` chooses what happens when the same unordered pair shows up
    twice: ``"keep-first"`` drops later copies (with a warning), ``"sum"``
    adds the weights, ``"error"`` raises. ``node_count`` defaults to one more
    than the largest id; pass it explicitly to include isolated nodes.
    """
    if dedupe not in DEDUPE_POLICIES:
        raise GraphError(f"unknown dedupe policy {dedupe!r}; choose from {DEDUPE_POLICIES}")
    index: dict[tuple[int, int], int] = {}
    us: list[int] = []
    vs: list[int] = []
    ws: list[float] = []
    dropped = 0
    max_id = -1
    for item in edge_list:
        if len(item) == 2:
            u, v = item
            w = 1.0
        elif len(item) == 3:
            u, v, w = item
        else:
            raise GraphError(f"edge must be (u, v) or (u, v, w), got {tuple(item)!r}")
        u, v, w = int(u), int(v), float(w)
        if u < 0 or v < 0:
            raise GraphError(f"negative node id in edge ({u}, {v}, {w})")
        if u == v:
            raise GraphError(f"self-loop on node {u}")
        if not w > 0 or not np.isfinite(w):
            raise GraphError(f"nonpositive weight {w} on edge ({u}, {v})")
        key = (min(u, v), max(u, v))
        max_id = max(max_id, key[1])
        if key in index:
            if dedupe == "error":
                raise GraphError(f"duplicate edge {key}")
            if dedupe == "sum":
                ws[index[key]] += w
            dropped += 1
            continue
        index[key] = len(us)
        us.append(key[0])
        vs.append(key[1])
        ws.append(w)
    if dropped and dedupe == "keep-first":
        logger.warning("dropped %d duplicate edge(s), kept first occurrence", dropped)
    n = max_id + 1 if node_count is None else int(node_count)
    if n < 1:
        raise GraphError("graph has no nodes")
    if max_id >= n:
        raise GraphError(f"node id {max_id} out of range for node_count={n}")
    return WeightedGraph(
        n,
        np.array(us, dtype=np.int64),
        np.array(vs, dtype=np.int64),
        np.array(ws, dtype=float),
    )


def complete_graph(n: int, weight: float = 1.0) -> WeightedGraph:
    iu, ju = np.triu_indices(n, k=1)
    return WeightedGraph(n, iu.astype(np.int64), ju.astype(np.int64), np.full(iu.shape[0], float(weight)))


def largest_connected_component(g: WeightedGraph) -> tuple[WeightedGraph, dict[int, int]]:
    """Largest component, relabeled densely, with the old-to-new id map.

    Among equally large components the one holding the smallest original id
    wins. Node order is preserved by the relabeling.
    """
    if g.n == 0:
        raise GraphError("empty graph")
    _, labels = g.component_labels()
    sizes = np.bincount(labels)
    largest = sizes.max()
    # labels are assigned in order of first node visited, but don't rely on it
    candidates = np.flatnonzero(sizes == largest)
    first_node = [int(np.flatnonzero(labels == c)[0]) for c in candidates]
    keep_label = candidates[int(np.argmin(first_node))]
    keep = np.flatnonzero(labels == keep_label)
    mapping = {int(old): new for new, old in enumerate(keep)}
    mask = labels[g.eu] == keep_label
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(keep.shape[0])
    sub = WeightedGraph(
        int(keep.shape[0]),
        remap[g.eu[mask]],
        remap[g.ev[mask]],
        g.ew[mask].copy(),
    )
    return sub, mapping


def scale_weights(g: WeightedGraph, a: float) -> WeightedGraph:
    if not a > 0:
        raise GraphError(f"scale factor must be positive, got {a}")
    return WeightedGraph(g.n, g.eu.copy(), g.ev.copy(), g.ew * float(a))


@dataclass(frozen=True, eq=False)
class LaplacianKit:
    """Laplacian of one graph with its pseudoinverse and squared pseudoinverse."""

    laplacian: np.ndarray
    pinv: np.ndarray
    pinv_sq: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]

    def resistance(self, u: int, v: int) -> float:
        return resistance_distance(self, u, v)

    def biharmonic(self, u: int, v: int) -> float:
        return biharmonic_distance(self, u, v)

    def resistance_from(self, s: int) -> np.ndarray:
        """Vector of ``r(s, v)`` for every node ``v``."""
        d = np.diag(self.pinv)
        return d[s] + d - 2.0 * self.pinv[s]

    def biharmonic_sq_from(self, s: int) -> np.ndarray:
        """Vector of ``d_B(s, v)**2`` for every node ``v``."""
        d = np.diag(self.pinv_sq)
        return d[s] + d - 2.0 * self.pinv_sq[s]


def laplacian_kit(g: WeightedGraph | np.ndarray) -> LaplacianKit:
    """Dense eigendecomposition of the Laplacian.

    Eigenvalues below ``PINV_RTOL * max eigenvalue`` are treated as zero.
    Also accepts a Laplacian matrix directly.
    """
    lap = g.laplacian() if isinstance(g, WeightedGraph) else np.asarray(g, dtype=float)
    try:
        vals, vecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Laplacian eigendecomposition failed: {exc}") from exc
    cutoff = PINV_RTOL * max(vals[-1], 0.0)
    keep = vals > cutoff
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    pinv = (vecs * inv) @ vecs.T
    pinv = 0.5 * (pinv + pinv.T)
    pinv_sq = pinv @ pinv
    pinv_sq = 0.5 * (pinv_sq + pinv_sq.T)
    for arr in (lap, pinv, pinv_sq, vals):
        arr.setflags(write=False)
    return LaplacianKit(lap, pinv, pinv_sq, vals)


def incidence_vector(n: int, u: int, v: int) -> np.ndarray:
    """``b_{u,v} = e_u - e_v``."""
    b = np.zeros(n)
    b[u] += 1.0
    b[v] -= 1.0
    return b


def resistance_distance(kit: LaplacianKit, u: int, v: int) -> float:
    """Effective resistance ``b^T L^+ b``; zero when ``u == v``."""
    if u == v:
        return 0.0
    p = kit.pinv
    return float(p[u, u] + p[v, v] - 2.0 * p[u, v])


def biharmonic_distance(kit: LaplacianKit, u: int, v: int) -> float:
    """``sqrt(b^T (L^+)^2 b)``; zero when ``u == v``."""
    if u == v:
        return 0.0
    q = kit.pinv_sq
    return float(np.sqrt(max(q[u, u] + q[v, v] - 2.0 * q[u, v], 0.0)))


def random_connected_graph(n: int, m: int | None = None, seed=None, weight_range=None) -> WeightedGraph:
    """Uniform random labeled tree plus uniformly random extra edges.

    ``m`` defaults to ``2 n`` (average degree 4), capped at the complete
    graph. ``weight_range=(lo, hi)`` draws uniform weights, else all ones.
    """
    rng = np.random.default_rng(seed)
    n = int(n)
    if n < 1:
        raise GraphError("need at least one node")
    total = n * (n - 1) // 2
    m = min(2 * n if m is None else int(m), total)
    if m < n - 1:
        raise GraphError(f"m={m} too small for a connected graph on {n} nodes")
    edges = set()
    if n > 2:
        # Pruefer decoding
        seq = rng.integers(0, n, n - 2)
        degree = np.ones(n, dtype=np.int64)
        np.add.at(degree, seq, 1)
        for x in seq:
            leaf = int(np.flatnonzero(degree == 1)[0])
            edges.add((min(leaf, int(x)), max(leaf, int(x))))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = np.flatnonzero(degree == 1)
        edges.add((int(u), int(v)))
    elif n == 2:
        edges.add((0, 1))
    while len(edges) < m:
        u, v = rng.choice(n, 2, replace=False)
        edges.add((int(min(u, v)), int(max(u, v))))
    edges = sorted(edges)
    if weight_range is None:
        ws = np.ones(len(edges))
    else:
        ws = rng.uniform(weight_range[0], weight_range[1], len(edges))
    arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return WeightedGraph(n, arr[:, 0].copy(), arr[:, 1].copy(), ws)
