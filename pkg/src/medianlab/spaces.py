"""Deterministic constructors for the concrete spaces used by the toolkit.

Grid points are ordered row-major: ``y`` is the outer key, ``x`` the inner
one.  Subdivided points carry a third label entry ``j``, the unit offset above
their floor vertex (``j == 0`` for original vertices).
"""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .limits import check_points
from .rules import CoordinateRule, FloorRule, ProductRule
from .space import CoarseSpace, graph_metric

WEIGHT_RULES = ("unit", "sec5")


@dataclass(frozen=True)
class WeightedGridSpec:
    x_min: int
    x_max: int
    y_min: int
    y_max: int
    rule: str = "unit"

    def __post_init__(self):
        if self.rule not in WEIGHT_RULES:
            raise ValueError(f"unknown weight rule {self.rule!r}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError("empty window")
        if self.rule == "sec5" and not self.x_min <= 0 < self.x_max:
            raise ValueError("the sec5 rule needs x_min <= 0 < x_max")

    @classmethod
    def square(cls, side: int, rule: str = "unit") -> "WeightedGridSpec":
        """Window with coordinates 0..side in both directions."""
        return cls(0, side, 0, side, rule)

    @property
    def points(self) -> list:
        return [(x, y) for y in range(self.y_min, self.y_max + 1) for x in range(self.x_min, self.x_max + 1)]

    def vertical_weight(self, x: int) -> int:
        """Length of the edge (x, y) -- (x, y + 1)."""
        if self.rule == "unit" or x <= 0:
            return 1
        return 3 if x == 1 else 5


@dataclass(frozen=True)
class PathWitness:
    points: tuple
    length: int

    @property
    def endpoints(self) -> tuple:
        return self.points[0], self.points[-1]

    def to_json(self) -> dict:
        return {"points": [list(p) for p in self.points], "length": self.length}


def _grid_edges(spec: WeightedGridSpec, index: dict) -> list:
    edges = []
    for x, y in spec.points:
        if x < spec.x_max:
            edges.append((index[(x, y)], index[(x + 1, y)], 1))
        if y < spec.y_max:
            edges.append((index[(x, y)], index[(x, y + 1)], spec.vertical_weight(x)))
    return edges


def weighted_grid(spec: WeightedGridSpec, name: str = "") -> CoarseSpace:
    labels = spec.points
    check_points(len(labels), "grid window")
    index = {p: i for i, p in enumerate(labels)}
    dist = graph_metric(len(labels), _grid_edges(spec, index))
    return CoarseSpace(tuple(labels), dist, CoordinateRule(labels), name)


def grid_space(side: int) -> CoarseSpace:
    """Unit grid on {0..side}^2 with the l1 metric and coordinatewise median."""
    return weighted_grid(WeightedGridSpec.square(side), name=f"grid({side})")


def sec5_window(n: int, margin: int = 1) -> WeightedGridSpec:
    if n < 0 or margin < 0:
        raise ValueError("n and margin must be nonnegative")
    return WeightedGridSpec(-margin, n + 1 + margin, -margin, n + 1 + margin, "sec5")


def sec5_space(n: int, margin: int = 1) -> CoarseSpace:
    """Vertex space of the weighted-column counterexample around a_n, b_n."""
    return weighted_grid(sec5_window(n, margin), name=f"sec5({n},{margin})")


def sec5_endpoints(n: int) -> tuple:
    return (n + 1, n + 1), (n + 1, 0)


def path_length(points, spec: WeightedGridSpec) -> int:
    total = 0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if abs(x1 - x0) + abs(y1 - y0) != 1:
            raise ValueError(f"{(x0, y0)} and {(x1, y1)} are not grid neighbours")
        total += 1 if y0 == y1 else spec.vertical_weight(x0)
    return total


def gamma_path(n: int) -> PathWitness:
    """Left along the top row to x = 0, down the cheap column, right along the bottom."""
    top = [(x, n + 1) for x in range(n + 1, -1, -1)]
    down = [(0, y) for y in range(n, -1, -1)]
    bottom = [(x, 0) for x in range(1, n + 2)]
    points = tuple(top + down + bottom)
    return PathWitness(points, path_length(points, sec5_window(n)))


def subdivided_sec5(n: int, margin: int = 1) -> CoarseSpace:
    """Counterexample space with every long vertical edge cut into unit pieces.

    The operator is the median of floors, returning the repeated argument when
    two arguments coincide.
    """
    spec = sec5_window(n, margin)
    vertices = spec.points
    check_points(len(vertices), "grid window")
    labels = []
    for x, y in vertices:
        labels.append((x, y, 0))
        if y < spec.y_max:
            labels.extend((x, y, j) for j in range(1, spec.vertical_weight(x)))
    labels.sort(key=lambda p: (p[1] * 15 + p[2] * 15 // spec.vertical_weight(p[0]), p[0]))
    check_points(len(labels), "subdivided window", factor=5)
    index = {p: i for i, p in enumerate(labels)}
    edges = []
    for x, y, j in labels:
        here = index[(x, y, j)]
        if j == 0 and x < spec.x_max:
            edges.append((here, index[(x + 1, y, 0)], 1))
        if y < spec.y_max:
            w = spec.vertical_weight(x)
            up = (x, y, j + 1) if j + 1 < w else (x, y + 1, 0)
            edges.append((here, index[up], 1))
    dist = graph_metric(len(labels), edges)
    vertex = np.array([p[2] == 0 for p in labels])
    base = CoordinateRule([p[:2] for p in labels], targets=vertex)
    floor = base.locate([p[:2] for p in labels])
    return CoarseSpace(tuple(labels), dist, FloorRule(floor, base), f"subdivided_sec5({n},{margin})")


def floor_point(space: CoarseSpace, i: int) -> int:
    return int(space.rule.floor[i]) if isinstance(space.rule, FloorRule) else i


class TreeRule:
    """Tree median: the deepest of the three pairwise lowest common ancestors."""

    def __init__(self, lca: np.ndarray, depth: np.ndarray):
        self.lca = lca
        self.depth = depth

    def __call__(self, a, b, c):
        a, b, c = np.broadcast_arrays(np.asarray(a), np.asarray(b), np.asarray(c))
        ab, ac, bc = self.lca[a, b], self.lca[a, c], self.lca[b, c]
        out = np.where(self.depth[ac] > self.depth[ab], ac, ab)
        return np.where(self.depth[bc] > self.depth[out], bc, out)


def tree_space(edges, name: str = "tree") -> CoarseSpace:
    """Edge-path metric and median of a finite tree given as ``(u, v)`` or ``(u, v, w)`` edges."""
    g = nx.Graph()
    for e in edges:
        u, v = e[0], e[1]
        if g.has_edge(u, v) or u == v:
            raise ValueError(f"repeated edge or loop at {u!r}")
        g.add_edge(u, v, weight=e[2] if len(e) > 2 else 1)
    if g.number_of_nodes() == 0:
        raise ValueError("tree needs at least one edge")
    if not nx.is_tree(g):
        raise ValueError("edge list contains a cycle" if nx.is_connected(g) or g.number_of_edges() >= g.number_of_nodes()
                         else "edge list is disconnected")
    labels = sorted(g.nodes)
    check_points(len(labels), "tree")
    index = {v: i for i, v in enumerate(labels)}
    n = len(labels)
    dist = graph_metric(n, [(index[u], index[v], w) for u, v, w in g.edges(data="weight")])
    root = labels[0]
    depth = np.zeros(n, dtype=np.int64)
    parent = {root: root}
    for u, v in nx.bfs_edges(g, root):
        parent[v] = u
        depth[index[v]] = depth[index[u]] + 1
    ancestors = []
    for v in labels:
        chain = [v]
        while chain[-1] != root:
            chain.append(parent[chain[-1]])
        ancestors.append({index[u] for u in chain})
    lca = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            common = ancestors[i] & ancestors[j]
            k = max(common, key=lambda u: depth[u])
            lca[i, j] = lca[j, i] = k
    return CoarseSpace(tuple(labels), dist, TreeRule(lca, depth), name)


def path_tree(length: int) -> CoarseSpace:
    """Path on vertices 0..length."""
    if length < 1:
        raise ValueError("path needs length >= 1")
    return tree_space([(i, i + 1) for i in range(length)], name=f"path({length})")


def star_tree(leaves: int) -> CoarseSpace:
    return tree_space([(0, i) for i in range(1, leaves + 1)], name=f"star({leaves})")


def spider_tree(legs: int, leg_length: int) -> CoarseSpace:
    edges = []
    for leg in range(legs):
        prev = 0
        for step in range(1, leg_length + 1):
            v = leg * leg_length + step
            edges.append((prev, v))
            prev = v
    return tree_space(edges, name=f"spider({legs},{leg_length})")


def product_space(a: CoarseSpace, b: CoarseSpace) -> CoarseSpace:
    """Pairs with the sum metric and componentwise operator."""
    na, nb = len(a), len(b)
    check_points(na * nb, "product space")
    labels = tuple((x, y) for x in a.labels for y in b.labels)
    dist = (a.dist[:, None, :, None] + b.dist[None, :, None, :]).reshape(na * nb, na * nb)
    name = f"{a.name}x{b.name}" if a.name and b.name else ""
    return CoarseSpace(labels, dist, ProductRule(a.rule, b.rule, nb), name)


class ShiftRule:
    """Coordinatewise median pushed ``shift`` steps in x (clipped to the window), exact on repeated arguments.

    The shift does not commute with the median, so the result is only a coarse median.
    """

    def __init__(self, coords, shift: int):
        self.base = CoordinateRule(coords)
        self.shift = shift
        self._x_max = int(self.base.coords[:, 0].max())

    def __call__(self, a, b, c):
        a, b, c = np.broadcast_arrays(np.asarray(a), np.asarray(b), np.asarray(c))
        moved = self.base.coords[self.base(a, b, c)].copy()
        moved[..., 0] = np.minimum(moved[..., 0] + self.shift, self._x_max)
        out = np.where(b == c, b, self.base.locate(moved))
        return np.where((a == b) | (a == c), a, out)


def shifted_grid(side: int, shift: int = 1) -> CoarseSpace:
    """Unit grid whose median is displaced by ``shift``: a genuinely coarse, non-median example."""
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    base = grid_space(side)
    return CoarseSpace(base.labels, base.dist, ShiftRule(base.labels, shift), f"shifted({side},{shift})")
