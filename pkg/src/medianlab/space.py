"""Finite metric spaces carrying a ternary operator, and their JSON form."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .limits import check_points
from .median import FiniteMedianAlgebra, _freeze, _thaw
from .rules import CoordinateRule, FloorRule, TableRule, tabulate


FAST_TABLE_LIMIT = 256


class SpaceFormatError(ValueError):
    """Malformed space JSON."""


def _exact(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if np.all(np.isfinite(d)) and np.all(d == np.round(d)):
        return d.astype(np.int64)
    return d


def graph_metric(n: int, edges) -> np.ndarray:
    """All-pairs shortest paths for a weighted undirected edge list ``(i, j, w)``."""
    if not edges:
        d = np.where(np.eye(n, dtype=bool), 0.0, np.inf)
    else:
        rows, cols, weights = zip(*edges)
        graph = csr_matrix((np.asarray(weights, dtype=np.float64), (rows, cols)), shape=(n, n))
        d = shortest_path(graph, method="D", directed=False)
    if np.any(np.isinf(d)):
        raise SpaceFormatError("graph metric is disconnected")
    return _exact(d)


def check_metric(d: np.ndarray) -> None:
    """Raise unless ``d`` is a metric (symmetric, zero exactly on the diagonal, triangle inequality)."""
    n = d.shape[0]
    if d.shape != (n, n):
        raise SpaceFormatError("metric must be a square matrix")
    if np.any(d < 0) or not np.array_equal(d, d.T) or np.any(np.diag(d) != 0):
        raise SpaceFormatError("metric must be nonnegative, symmetric and zero on the diagonal")
    off = d + np.eye(n, dtype=d.dtype)
    if np.any(off == 0):
        raise SpaceFormatError("distinct points at distance zero")
    for k in range(n):
        if np.any(d > d[:, k, None] + d[None, k, :]):
            raise SpaceFormatError(f"triangle inequality fails through point {k}")


@dataclass(frozen=True, eq=False)
class CoarseSpace:
    """Points ``0..N-1`` with labels, a distance matrix and a ternary operator."""

    labels: tuple
    dist: np.ndarray = field(repr=False)
    rule: Callable = field(repr=False)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(_freeze(x) for x in self.labels))
        d = np.asarray(self.dist)
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    def __len__(self) -> int:
        return len(self.labels)

    def mu(self, a, b, c):
        return self._fast(a, b, c)

    @cached_property
    def _fast(self):
        # table lookups are far cheaper than recomputing structured rules
        if isinstance(self.rule, TableRule) or len(self) > FAST_TABLE_LIMIT:
            return self.rule
        return TableRule(self.table)

    @cached_property
    def _index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label) -> int:
        return self._index[_freeze(label)]

    def point(self, label_or_index) -> int:
        if isinstance(label_or_index, (int, np.integer)) and not isinstance(self.labels[0], (int, np.integer)):
            return int(label_or_index)
        return self.index(label_or_index)

    def d(self, a: int, b: int):
        return self.dist[a, b]

    @cached_property
    def table(self) -> np.ndarray:
        return tabulate(self.rule, len(self))

    def as_algebra(self) -> FiniteMedianAlgebra:
        return FiniteMedianAlgebra(self.labels, self.rule)

    def scaled(self, s) -> "CoarseSpace":
        return replace(self, dist=self.dist * s, name=f"{self.name}*{s}" if self.name else "")

    @property
    def is_integral(self) -> bool:
        return np.issubdtype(self.dist.dtype, np.integer)

    def to_json(self) -> dict:
        spec = getattr(self.rule, "spec", None)
        if spec is not None and not isinstance(self.rule, TableRule):
            median = spec()
        else:
            median = {"type": "table", "data": self.table.ravel().tolist()}
        data = {
            "points": [_thaw(x) for x in self.labels],
            "metric": {"type": "matrix", "data": self.dist.tolist()},
            "median": median,
        }
        if self.name:
            data["name"] = self.name
        return data

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()


def _floor_rule(labels) -> FloorRule:
    coords = np.array([lab[:2] for lab in labels], dtype=np.int64)
    vertex = np.array([lab[2] == 0 for lab in labels])
    base = CoordinateRule(coords, targets=vertex)
    floor = base.locate(coords)
    if np.any(floor < 0):
        raise SpaceFormatError("every point needs a floor vertex [x, y, 0]")
    return FloorRule(floor, base)


def space_from_json(data: dict) -> CoarseSpace:
    try:
        labels = [_freeze(x) for x in data["points"]]
        n = len(labels)
        if n == 0:
            raise SpaceFormatError("space has no points")
        if len(set(labels)) != n:
            raise SpaceFormatError("duplicate point labels")
        check_points(n, "space", factor=8)
        metric = data["metric"]
        if metric["type"] == "matrix":
            d = _exact(np.asarray(metric["data"], dtype=np.float64))
            if d.shape != (n, n):
                raise SpaceFormatError(f"metric matrix must be {n} x {n}")
            check_metric(d)
        elif metric["type"] == "graph":
            edges = [(int(i), int(j), float(w)) for i, j, w in metric["edges"]]
            if any(w <= 0 for _, _, w in edges) or any(not (0 <= i < n and 0 <= j < n) for i, j, _ in edges):
                raise SpaceFormatError("graph edges need valid endpoints and positive weights")
            d = graph_metric(n, edges)
        else:
            raise SpaceFormatError(f"unknown metric type {metric['type']!r}")
        median = data["median"]
        kind = median["type"]
        if kind == "table":
            table = np.asarray(median["data"], dtype=np.int64)
            if table.size != n**3:
                raise SpaceFormatError(f"median table needs {n**3} entries, got {table.size}")
            table = table.reshape(n, n, n)
            if table.min() < 0 or table.max() >= n:
                raise SpaceFormatError("median table refers to unknown points")
            rule = TableRule(table)
        elif kind == "coordinatewise":
            coords = np.array(labels, dtype=np.int64)
            rule = CoordinateRule(coords)
        elif kind == "floor":
            rule = _floor_rule(labels)
        else:
            raise SpaceFormatError(f"unknown median type {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpaceFormatError):
            raise
        raise SpaceFormatError(f"malformed space JSON: {exc}") from exc
    return CoarseSpace(tuple(labels), d, rule, data.get("name", ""))


def load_space(path) -> CoarseSpace:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpaceFormatError(f"invalid JSON: {exc}") from exc
    return space_from_json(data)


def dump_space(space: CoarseSpace, path) -> None:
    Path(path).write_text(json.dumps(space.to_json()))
