"""Text formats: edge lists, node attributes, JSON/CSV reports.

Edge list: one ``u v [w]`` per line, whitespace separated, weight defaults
to 1.0, lines starting with ``#`` (or ``%``, as in KONECT dumps) are skipped.
Extra columns after the weight (KONECT timestamps) are ignored.

Node attributes: one ``v kappa beta`` per line, optional ``# node kappa beta``
header.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .errors import GraphError, ParameterError
from .graph import WeightedGraph, build_graph


class FormatError(GraphError):
    """Malformed input line; message carries the file and line number."""


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            yield lineno, line.split()


def parse_edge_list(path, keep_extra_columns: bool = True) -> list[tuple[int, int, float]]:
    edges = []
    for lineno, parts in _data_lines(path):
        if len(parts) < 2 or (len(parts) > 3 and not keep_extra_columns):
            raise FormatError(f"{path}:{lineno}: expected 'u v [w]', got {' '.join(parts)!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) >= 3 else 1.0
        except ValueError:
            raise FormatError(f"{path}:{lineno}: cannot parse {' '.join(parts)!r}") from None
        edges.append((u, v, w))
    return edges


def read_edge_list(path, dedupe: str = "keep-first", node_count: int | None = None) -> WeightedGraph:
    edges = parse_edge_list(path)
    try:
        return build_graph(edges, node_count=node_count, dedupe=dedupe)
    except GraphError as exc:
        raise FormatError(f"{path}: {exc}") from None


def format_edge_list(g: WeightedGraph) -> str:
    lines = ["# u v w"]
    lines += [f"{u} {v} {w!r}" for u, v, w in g.edges]
    return "\n".join(lines) + "\n"


def write_edge_list(path, g: WeightedGraph):
    atomic_write_text(path, format_edge_list(g))


def read_node_attributes(path, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(kappa, beta)``; every node 0..n-1 must appear exactly once."""
    rows = {}
    for lineno, parts in _data_lines(path):
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'v kappa beta', got {' '.join(parts)!r}")
        try:
            v, kappa, beta = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: cannot parse {' '.join(parts)!r}") from None
        if v in rows:
            raise FormatError(f"{path}:{lineno}: node {v} listed twice")
        if not kappa > 0:
            raise FormatError(f"{path}:{lineno}: kappa must be positive, got {kappa}")
        if not 0 <= beta <= 1:
            raise FormatError(f"{path}:{lineno}: beta must lie in [0, 1], got {beta}")
        rows[v] = (kappa, beta)
    size = (max(rows) + 1 if rows else 0) if n is None else n
    missing = [v for v in range(size) if v not in rows]
    if missing or any(v >= size or v < 0 for v in rows):
        raise FormatError(f"{path}: attributes must cover nodes 0..{size - 1} exactly (missing {missing[:5]})")
    kappa = np.array([rows[v][0] for v in range(size)])
    beta = np.array([rows[v][1] for v in range(size)])
    return kappa, beta


def format_node_attributes(kappa, beta) -> str:
    lines = ["# node kappa beta"]
    lines += [f"{v} {float(k)!r} {float(b)!r}" for v, (k, b) in enumerate(zip(kappa, beta))]
    return "\n".join(lines) + "\n"


def write_node_attributes(path, kappa, beta):
    atomic_write_text(path, format_node_attributes(kappa, beta))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no inf/nan
        return x if math.isfinite(x) else str(x)
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=False) + "\n"


@contextmanager
def _atomic(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def atomic_write_text(path, text: str):
    """Write via a temp file in the same directory, renamed on success."""
    with _atomic(path) as fh:
        fh.write(text)


def write_json(path, report: dict):
    atomic_write_text(path, dumps_report(report))


def write_csv(path, header, rows):
    with _atomic(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def write_trajectory_csv(path, times, states):
    header = ["t"] + [f"x_{i}" for i in range(states.shape[1])]
    write_csv(path, header, ([t, *row] for t, row in zip(times, states)))


def generate_random_beta(n: int, prob_zero: float = 0.35, seed: int | None = 42) -> np.ndarray:
    """Binary preferences: 0 with probability ``prob_zero``, else 1."""
    if not 0.0 <= prob_zero <= 1.0:
        raise ParameterError(f"prob_zero must lie in [0, 1], got {prob_zero}")
    rng = np.random.default_rng(seed)
    return np.where(rng.random(int(n)) < prob_zero, 0.0, 1.0)
