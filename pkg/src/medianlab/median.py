"""Finite median algebras: axioms, intervals, iterated medians, closures and rank."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .limits import LimitExceeded
from .rules import BitMajorityRule, ProductRule, TableRule, tabulate

EXHAUSTIVE_LIMIT = 64
DEFAULT_SAMPLES = 200_000


def _freeze(label):
    if isinstance(label, list):
        return tuple(_freeze(x) for x in label)
    return label


def _thaw(label):
    if isinstance(label, tuple):
        return [_thaw(x) for x in label]
    return label


@dataclass(frozen=True, eq=False)
class FiniteMedianAlgebra:
    """Elements ``0..N-1`` (with labels) and a ternary operator on them."""

    labels: tuple
    rule: Callable = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(_freeze(x) for x in self.labels))

    @classmethod
    def from_table(cls, labels, table) -> "FiniteMedianAlgebra":
        table = np.asarray(table)
        n = len(labels)
        if table.shape != (n, n, n):
            raise ValueError(f"median table must have shape {(n, n, n)}, got {table.shape}")
        if n and (table.min() < 0 or table.max() >= n):
            raise ValueError("median table refers to unknown elements")
        return cls(tuple(labels), TableRule(table))

    def __len__(self) -> int:
        return len(self.labels)

    @cached_property
    def table(self) -> np.ndarray:
        return tabulate(self.rule, len(self))

    @cached_property
    def _index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def index(self, label) -> int:
        return self._index[_freeze(label)]

    def m(self, a: int, b: int, c: int) -> int:
        return int(self.rule(a, b, c))

    def to_json(self) -> dict:
        return {"elements": [_thaw(x) for x in self.labels], "median": self.table.ravel().tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteMedianAlgebra":
        labels = [_freeze(x) for x in data["elements"]]
        n = len(labels)
        table = np.asarray(data["median"], dtype=np.int64).reshape(n, n, n)
        return cls.from_table(labels, table)


@dataclass
class AxiomReport:
    m1_defects: list
    m2_defects: list
    m3_defects: list
    exhaustive: bool = True
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not (self.m1_defects or self.m2_defects or self.m3_defects)


def _as_table(alg_or_table) -> np.ndarray:
    if isinstance(alg_or_table, FiniteMedianAlgebra):
        return alg_or_table.table
    return np.asarray(alg_or_table)


def _first(mask: np.ndarray, limit: int) -> list:
    return [tuple(int(v) for v in row) for row in np.argwhere(mask)[:limit]]


_PERMS = [p for p in itertools.permutations(range(3)) if p != (0, 1, 2)]


def verify_median_axioms(table, limit: int = 100, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> AxiomReport:
    """Scan (M1)-(M3) and return counterexample tuples (at most ``limit`` per axiom).

    Tables with more than 64 elements are checked on ``samples`` seeded random
    tuples instead of exhaustively.
    """
    t = _as_table(table)
    n = t.shape[0]
    ar = np.arange(n)
    m1 = _first(t[ar, ar, :] != ar[:, None], limit)
    if n <= EXHAUSTIVE_LIMIT:
        bad = np.zeros_like(t, dtype=bool)
        for p in _PERMS:
            bad |= t != t.transpose(p)
        m2 = _first(bad, limit)
        m3 = []
        for b in range(n):
            tb = t[:, b, :]
            lhs = t[tb, b, :]  # [a, c, d]
            rhs = tb[:, tb]  # [a, c, d] = m(a, b, m(c, b, d))
            for a, c, d in _first(lhs != rhs, limit - len(m3)):
                m3.append((a, b, c, d))
            if len(m3) >= limit:
                break
        m3.sort()
        return AxiomReport(m1, m2, m3, True, n**4)
    rng = np.random.default_rng(seed)
    q = rng.integers(0, n, size=(samples, 4))
    a, b, c, d = q.T
    base = t[a, b, c]
    bad2 = np.zeros(samples, dtype=bool)
    for p in _PERMS:
        args = (a, b, c)
        bad2 |= t[args[p[0]], args[p[1]], args[p[2]]] != base
    m2 = [tuple(int(v) for v in row) for row in q[bad2, :3][:limit]]
    bad3 = t[base, b, d] != t[a, b, t[c, b, d]]
    m3 = [tuple(int(v) for v in row) for row in q[bad3][:limit]]
    return AxiomReport(m1, m2, m3, False, samples)


def median_cube(n: int) -> FiniteMedianAlgebra:
    """All n-bit vectors under coordinatewise majority; element i has bit k = (i >> k) & 1."""
    if n < 0 or n > 16:
        raise LimitExceeded(f"median_cube supports n <= 16, got {n}")
    labels = tuple(tuple((i >> k) & 1 for k in range(n)) for i in range(2**n))
    return FiniteMedianAlgebra(labels, BitMajorityRule())


def interval(alg: FiniteMedianAlgebra, a: int, b: int) -> frozenset:
    ar = np.arange(len(alg))
    image = frozenset(int(x) for x in alg.rule(a, ar, b))
    fixed = frozenset(int(c) for c in ar[alg.rule(a, ar, b) == ar])
    if image != fixed:
        raise ValueError(f"interval descriptions disagree for ({a}, {b}); the operator is not a median")
    return image


def iterated_median(alg: FiniteMedianAlgebra, xs: Sequence[int], b: int) -> int:
    if not xs:
        raise ValueError("iterated median needs at least one point")
    acc = xs[0]
    for x in xs[1:]:
        acc = alg.m(acc, x, b)
    return int(acc)


def closure(seed: Iterable[Hashable], op: Callable, cap: int | None = None) -> list:
    """Smallest superset of ``seed`` closed under the ternary ``op`` (a fixpoint)."""
    elements = list(dict.fromkeys(seed))
    if not elements:
        raise ValueError("closure of an empty seed")
    known = set(elements)
    frontier = set(elements)
    while frontier:
        new = []
        for x, y, z in itertools.product(elements, repeat=3):
            if x not in frontier and y not in frontier and z not in frontier:
                continue
            v = op(x, y, z)
            if v not in known:
                known.add(v)
                new.append(v)
                if cap is not None and len(known) > cap:
                    raise LimitExceeded(f"median closure exceeds {cap} elements")
        elements.extend(new)
        frontier = set(new)
    return elements


def subalgebra(alg: FiniteMedianAlgebra, members: Sequence[int]) -> FiniteMedianAlgebra:
    members = list(members)
    pos = {m: i for i, m in enumerate(members)}
    sub = alg.table[np.ix_(members, members, members)]
    try:
        relabelled = np.vectorize(pos.__getitem__, otypes=[np.int64])(sub)
    except KeyError as exc:
        raise ValueError("members are not closed under the median") from exc
    return FiniteMedianAlgebra.from_table([alg.labels[m] for m in members], relabelled)


def median_closure(ambient, seed: Iterable, cap: int | None = None):
    """Median closure of ``seed`` inside a finite algebra (returns the subalgebra).

    ``ambient`` may also be a plain ternary callable on hashable elements, in
    which case the list of closure elements is returned.
    """
    if isinstance(ambient, FiniteMedianAlgebra):
        members = closure(seed, ambient.m, cap)
        return subalgebra(ambient, sorted(members))
    return closure(seed, ambient, cap)


def convex_hull(alg: FiniteMedianAlgebra, xs: Sequence[int]) -> frozenset:
    xs = list(xs)
    if not xs:
        raise ValueError("hull of an empty set")
    ar = np.arange(len(alg))
    acc = np.full(len(alg), xs[0])
    for x in xs[1:]:
        acc = alg.rule(acc, x, ar)
    return frozenset(int(v) for v in acc)


@dataclass
class MedianGraph:
    n: int
    edges: list
    dist: np.ndarray  # -1 marks pairs in different components

    @property
    def connected(self) -> bool:
        return bool(np.all(self.dist >= 0))

    @property
    def diameter(self) -> int:
        return int(self.dist.max()) if self.n else 0

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges:
            adj[u, v] = adj[v, u] = True
        return adj


def median_graph(alg: FiniteMedianAlgebra) -> MedianGraph:
    t = alg.table
    n = len(alg)
    ar = np.arange(n)
    edges = []
    for u in range(n):
        slab = t[u]  # [x, v] -> m(u, x, v)
        thin = ((slab == u) | (slab == ar[None, :])).all(axis=0)
        for v in np.flatnonzero(thin):
            if v > u:
                edges.append((u, int(v)))
    if edges:
        rows, cols = zip(*edges)
        graph = csr_matrix((np.ones(len(edges)), (rows, cols)), shape=(n, n))
        d = shortest_path(graph, directed=False, unweighted=True)
    else:
        d = np.where(np.eye(n, dtype=bool), 0.0, np.inf)
    dist = np.where(np.isinf(d), -1, d).astype(np.int64)
    return MedianGraph(n, edges, dist)


def rank(alg: FiniteMedianAlgebra) -> int:
    """Largest n with an embedded median n-cube.

    At each vertex, neighbours spanning a common square form a graph whose
    cliques are exactly the cube corners at that vertex.
    """
    g = median_graph(alg)
    if not g.edges:
        return 0
    adj = g.adjacency()
    best = 1
    for v in range(g.n):
        nbrs = np.flatnonzero(adj[v])
        if len(nbrs) <= best:
            continue
        far = g.dist[v] == 2
        local = nx.Graph()
        local.add_nodes_from(int(u) for u in nbrs)
        for u, w in itertools.combinations(nbrs, 2):
            if np.any(adj[u] & adj[w] & far):
                local.add_edge(int(u), int(w))
        size = max(len(c) for c in nx.find_cliques(local))
        best = max(best, size)
    return best


def _cube_embeds(alg: FiniteMedianAlgebra, dim: int) -> bool:
    t = alg.table
    n = len(alg)
    cube = median_cube(dim)
    cube_t = cube.table
    size = 2**dim
    for o in range(n):
        for top in range(n):
            if top == o:
                continue
            legs = [e for e in range(n) if e != o and t[o, e, top] == e]
            for chosen in itertools.combinations(legs, dim):
                if any(t[x, o, y] != o for x, y in itertools.combinations(chosen, 2)):
                    continue
                sigma = np.empty(size, dtype=np.int64)
                sigma[0] = o
                for s in range(1, size):
                    members = [chosen[k] for k in range(dim) if s >> k & 1]
                    acc = members[0]
                    for x in members[1:]:
                        acc = t[acc, x, top]
                    sigma[s] = acc
                if sigma[size - 1] != top or len(set(sigma.tolist())) != size:
                    continue
                if np.array_equal(t[np.ix_(sigma, sigma, sigma)], sigma[cube_t]):
                    return True
    return False


def rank_bruteforce(alg: FiniteMedianAlgebra, max_dim: int | None = None) -> int:
    """Rank by direct search for injective homomorphisms from median cubes."""
    n = len(alg)
    max_dim = max_dim if max_dim is not None else max(0, n.bit_length() - 1)
    best = 0
    for dim in range(1, max_dim + 1):
        if 2**dim > n or not _cube_embeds(alg, dim):
            break
        best = dim
    return best


def product_algebra(a: FiniteMedianAlgebra, b: FiniteMedianAlgebra) -> FiniteMedianAlgebra:
    labels = tuple((x, y) for x in a.labels for y in b.labels)
    return FiniteMedianAlgebra(labels, ProductRule(a.rule, b.rule, len(b)))


# Exhaustive identity scans.  Each returns the number of violating tuples.


def _iterated_tables(t: np.ndarray):
    n = t.shape[0]
    ar = np.arange(n)
    it2 = t  # [x1, x2, b]
    it3 = t[it2[:, :, None, :], ar[None, None, :, None], ar[None, None, None, :]]
    return it2, it3


def _membership(t: np.ndarray) -> np.ndarray:
    """mem[a, b, c] is True iff c lies in [a, b]."""
    n = t.shape[0]
    ar = np.arange(n)
    return t.transpose(0, 2, 1) == ar[None, None, :]


def isbell_violations(alg) -> int:
    t = _as_table(alg)
    n = t.shape[0]
    count = 0
    for a in range(n):
        abc = t[a]  # [b, c]
        bcd = t  # [b, c, d]
        lhs = t[a][abc[:, :, None], bcd]
        count += int(np.count_nonzero(lhs != abc[:, :, None]))
    return count


def five_point_violations(alg) -> int:
    """Count tuples with m(m(a,b,c),d,e) != m(a, m(b,d,e), m(c,d,e))."""
    t = _as_table(alg)
    n = t.shape[0]
    count = 0
    for a in range(n):
        abc = t[a]  # [b, c]
        lhs = t[abc[:, :, None, None], np.arange(n)[None, None, :, None], np.arange(n)[None, None, None, :]]
        bde = t  # [b, d, e]
        rhs = t[a][bde[:, None, :, :], bde[None, :, :, :]]  # [b, c, d, e]
        count += int(np.count_nonzero(lhs != rhs))
    return count


def lemma_2_6_symmetry_violations(alg) -> int:
    t = _as_table(alg)
    _, it3 = _iterated_tables(t)
    bad = np.zeros(it3.shape, dtype=bool)
    for p in itertools.permutations(range(3)):
        bad |= it3 != it3.transpose(p + (3,))
    return int(np.count_nonzero(bad))


def lemma_2_6_intersection_violations(alg) -> int:
    """Tuples where the intersection of [x_k, b] differs from [m(xs; b), b], for 2 and 3 points."""
    t = _as_table(alg)
    n = t.shape[0]
    mem = _membership(t)  # [a, b, c]
    it2, it3 = _iterated_tables(t)
    count = 0
    ar = np.arange(n)
    # two points: [x1, x2, b, c]
    lhs = mem[:, None, :, :] & mem[None, :, :, :]
    rhs = mem[it2, ar[None, None, :]]
    count += int(np.count_nonzero((lhs != rhs).any(axis=-1)))
    for x1 in range(n):
        lhs = mem[x1][None, None, :, :] & mem[:, None, :, :] & mem[None, :, :, :]  # [x2, x3, b, c]
        rhs = mem[it3[x1], ar[None, None, :]]
        count += int(np.count_nonzero((lhs != rhs).any(axis=-1)))
    return count


def lemma_2_6_inclusion_violations(alg) -> int:
    """Tuples with xs inside [a, b] but some x outside [a, m(xs; b)], for 2 and 3 points."""
    t = _as_table(alg)
    n = t.shape[0]
    mem = _membership(t)
    it2, it3 = _iterated_tables(t)
    ar = np.arange(n)
    count = 0
    for a in range(n):
        inside = mem[a]  # [b, x]
        # two points: [b, x1, x2]
        ok = inside[:, :, None] & inside[:, None, :]
        top = it2.transpose(2, 0, 1)  # [b, x1, x2]
        held = mem[a][top, ar[None, :, None]] & mem[a][top, ar[None, None, :]]
        count += int(np.count_nonzero(ok & ~held))
        # three points: [b, x1, x2, x3]
        ok3 = inside[:, :, None, None] & inside[:, None, :, None] & inside[:, None, None, :]
        top3 = it3.transpose(3, 0, 1, 2)
        held3 = (
            mem[a][top3, ar[None, :, None, None]]
            & mem[a][top3, ar[None, None, :, None]]
            & mem[a][top3, ar[None, None, None, :]]
        )
        count += int(np.count_nonzero(ok3 & ~held3))
    return count


def lemma_2_7_violations(alg, max_n: int = 3) -> int:
    """m(a, e', m(e_1..e_k; b)) == m(m(a,e',e_1), ..., m(a,e',e_k); b) for 2 <= k <= max_n.

    The k = 1 case is the tautology m(a, e', e_1) == m(a, e', e_1).
    """
    t = _as_table(alg)
    n = t.shape[0]
    it2, it3 = _iterated_tables(t)
    ar = np.arange(n)
    count = 0
    for a in range(n):
        for e in range(n):
            proj = t[a, e]  # [x] -> m(a, e, x)
            if max_n >= 2:
                lhs = proj[it2]  # [e1, e2, b]
                rhs = it2[proj[:, None, None], proj[None, :, None], ar[None, None, :]]
                count += int(np.count_nonzero(lhs != rhs))
            if max_n >= 3:
                lhs = proj[it3]
                rhs = it3[proj[:, None, None, None], proj[None, :, None, None], proj[None, None, :, None], ar]
                count += int(np.count_nonzero(lhs != rhs))
    return count


def identity_defects(alg, lemma_2_7_depth: int = 3) -> dict:
    """Violation counts for every median identity the toolkit checks exhaustively."""
    report = verify_median_axioms(alg, limit=10**9)
    return {
        "m1": len(report.m1_defects),
        "m2": len(report.m2_defects),
        "m3": len(report.m3_defects),
        "isbell": isbell_violations(alg),
        "five_point": five_point_violations(alg),
        "lemma_2_6_symmetry": lemma_2_6_symmetry_violations(alg),
        "lemma_2_6_intersection": lemma_2_6_intersection_violations(alg),
        "lemma_2_6_inclusion": lemma_2_6_inclusion_violations(alg),
        "lemma_2_7": lemma_2_7_violations(alg, lemma_2_7_depth),
    }
