"""Vectorised ternary operators on point indices.

Every rule maps three integer index arrays (broadcast against each other) to
an index array.  Algebras and spaces share these so that large objects never
need an explicit N^3 table.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .limits import TABLE_LIMIT, LimitExceeded


def _med3(x, y, z):
    return x + y + z - np.maximum(np.maximum(x, y), z) - np.minimum(np.minimum(x, y), z)


@dataclass(frozen=True, eq=False)
class TableRule:
    table: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.table, dtype=np.int32 if self.table.shape[0] < 2**31 else np.int64)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __call__(self, a, b, c):
        return self.table[a, b, c]

    def spec(self) -> dict:
        return {"type": "table", "data": self.table.ravel().tolist()}


@dataclass(frozen=True, eq=False)
class BitMajorityRule:
    """Coordinatewise majority on integers read as bit vectors; index == value."""

    def __call__(self, a, b, c):
        a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
        return (a & b) | (a & c) | (b & c)


class CoordinateRule:
    """Coordinatewise median of integer coordinate vectors.

    ``coords[i]`` are the coordinates of point ``i``.  Only points flagged in
    ``targets`` may be returned; the median of three targets must again be a
    target or a ``ValueError`` is raised.
    """

    def __init__(self, coords, targets=None):
        coords = np.asarray(coords, dtype=np.int64)
        if coords.ndim != 2:
            raise ValueError("coordinates must form an N x d array")
        self.coords = coords
        n = coords.shape[0]
        targets = np.ones(n, dtype=bool) if targets is None else np.asarray(targets, dtype=bool)
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        shape = tuple(int(s) for s in (hi - lo + 1))
        self._lo = lo
        self._shape = shape
        self._strides = np.array([int(np.prod(shape[k + 1:])) for k in range(len(shape))], dtype=np.int64)
        lookup = np.full(int(np.prod(shape)), -1, dtype=np.int64)
        keys = (coords - lo) @ self._strides
        idx = np.flatnonzero(targets)
        if len(np.unique(keys[idx])) != len(idx):
            raise ValueError("duplicate coordinates among median targets")
        lookup[keys[idx]] = idx
        self._lookup = lookup

    def locate(self, vectors) -> np.ndarray:
        vectors = np.asarray(vectors, dtype=np.int64)
        rel = vectors - self._lo
        inside = np.all((rel >= 0) & (rel < np.array(self._shape)), axis=-1)
        keys = np.where(inside, (np.clip(rel, 0, None) @ self._strides), 0)
        out = np.where(inside, self._lookup[keys], -1)
        return out

    def __call__(self, a, b, c):
        a, b, c = np.broadcast_arrays(np.asarray(a), np.asarray(b), np.asarray(c))
        med = _med3(self.coords[a], self.coords[b], self.coords[c])
        out = self.locate(med)
        if np.any(out < 0):
            raise ValueError("point set is not closed under the coordinatewise median")
        return out

    def spec(self) -> dict:
        return {"type": "coordinatewise"}


class FloorRule:
    """Median of floors, except that a repeated argument is returned as is.

    ``floor[i]`` is the index of the vertex below point ``i``; ``base`` is the
    coordinatewise median on vertices.
    """

    def __init__(self, floor, base: CoordinateRule):
        self.floor = np.asarray(floor, dtype=np.int64)
        self.base = base
        self.vertices, self._slot = np.unique(self.floor, return_inverse=True)
        self._table = None
        if len(self.vertices) <= TABLE_LIMIT:
            ar = self.vertices
            self._table = np.stack([base(v, ar[:, None], ar[None, :]) for v in ar])

    def __call__(self, a, b, c):
        a, b, c = np.broadcast_arrays(np.asarray(a), np.asarray(b), np.asarray(c))
        if self._table is not None:
            out = self._table[self._slot[a], self._slot[b], self._slot[c]]
        else:
            out = self.base(self.floor[a], self.floor[b], self.floor[c])
        out = np.where(b == c, b, out)
        return np.where((a == b) | (a == c), a, out)

    def spec(self) -> dict:
        return {"type": "floor"}


class ProductRule:
    """Componentwise operator on the product of two index sets (i = i_left * n_right + i_right)."""

    def __init__(self, left, right, n_right: int):
        self.left = left
        self.right = right
        self.n_right = n_right

    def __call__(self, a, b, c):
        a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
        nr = self.n_right
        return self.left(a // nr, b // nr, c // nr) * nr + self.right(a % nr, b % nr, c % nr)


def tabulate(rule, n: int, limit: int = TABLE_LIMIT) -> np.ndarray:
    """Materialise the full N x N x N table of ``rule``."""
    if isinstance(rule, TableRule):
        return rule.table
    if n > limit:
        raise LimitExceeded(f"refusing to tabulate a median on {n} points (limit {limit})")
    ar = np.arange(n)
    table = np.empty((n, n, n), dtype=np.int32)
    for a in range(n):
        table[a] = rule(a, ar[:, None], ar[None, :])
    return table
