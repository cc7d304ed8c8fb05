"""Measured coarse-median constants, interval scans and rank certificates on finite spaces.

Every scan is exhaustive when the number of tuples is small enough for the
scan policy and otherwise uses a seeded sample; results record which.  Witness
tuples are point indices and are always the first maximiser in scan order.
"""
from __future__ import annotations

import itertools
import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .ledger import ConstantLedger
from .space import CoarseSpace
from .terms import evaluate, free_median_algebra

CHUNK = 1 << 18
DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ScanPolicy:
    seed: int = 0
    sample_cap: int = 150
    samples: int = 200_000
    subsets: int = 200

    def exhaustive(self, n: int, arity: int) -> bool:
        return n <= self.sample_cap and n**arity <= self.sample_cap**4

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])


def _num(x):
    """Plain Python number, preferring int for integral values."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    x = x.item() if isinstance(x, np.generic) else x
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def labels_of(space: CoarseSpace, idx) -> list:
    return [list(space.labels[int(i)]) if isinstance(space.labels[int(i)], tuple) else space.labels[int(i)]
            for i in idx]


@dataclass(frozen=True)
class Measurement:
    value: float
    witness: tuple | None
    exhaustive: bool
    checked: int

    def to_json(self, space: CoarseSpace | None = None) -> dict:
        w = self.witness
        if w is not None and space is not None:
            w = labels_of(space, w)
        elif w is not None:
            w = [int(i) for i in w]
        return {"value": _num(self.value), "witness": w, "exhaustive": self.exhaustive, "checked": self.checked}


def _blocks(n: int, arity: int, policy: ScanPolicy, name: str):
    """Yield index column tuples, lexicographically if exhaustive, else sampled."""
    if policy.exhaustive(n, arity):
        total = n**arity
        shape = (n,) * arity
        for start in range(0, total, CHUNK):
            flat = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
            yield np.unravel_index(flat, shape)
    else:
        rng = policy.rng(name)
        left = policy.samples
        while left > 0:
            m = min(left, CHUNK)
            yield tuple(rng.integers(0, n, size=(arity, m)))
            left -= m


def _maximize(space: CoarseSpace, arity: int, fn, policy: ScanPolicy, name: str) -> Measurement:
    n = len(space)
    best, witness, checked = 0, None, 0
    for cols in _blocks(n, arity, policy, name):
        vals = fn(*cols)
        checked += len(vals)
        k = int(np.argmax(vals))
        if witness is None or vals[k] > best:
            best = vals[k]
            witness = tuple(int(c[k]) for c in cols)
    return Measurement(_num(best), witness, policy.exhaustive(n, arity), checked)


def iterated(space: CoarseSpace, xs, b):
    """mu(x_1, ..., x_n; b), folded from the left; mu(x_1; b) = x_1."""
    cur = xs[0]
    for x in xs[1:]:
        cur = space.mu(cur, x, b)
    return cur


# --- (M1)/(M2), affine control, 4-point and 5-point defects -------------------

def check_m1_m2(space: CoarseSpace, policy: ScanPolicy = ScanPolicy()) -> dict:
    d, mu = space.dist, space.mu

    def m1(a, b):
        return d[mu(a, a, b), a]

    def m2(a, b, c):
        base = mu(a, b, c)
        out = d[mu(b, a, c), base]
        for x, y, z in ((a, c, b), (b, c, a), (c, a, b), (c, b, a)):
            out = np.maximum(out, d[mu(x, y, z), base])
        return out

    r1 = _maximize(space, 2, m1, policy, "m1")
    r2 = _maximize(space, 3, m2, policy, "m2")
    return {"m1": r1, "m2": r2, "kappa0": max(r1.value, r2.value)}


@dataclass
class AffineFit:
    mode: str
    profile: dict  # input displacement t -> largest observed output displacement s
    frontier: list  # (K, H0) pairs, H0 increasing, K decreasing
    exhaustive: bool
    checked: int

    def feasible(self, K, H0) -> bool:
        return all(s <= K * t + H0 for t, s in self.profile.items())

    def best(self) -> tuple:
        return min(self.frontier, key=lambda kh: (kh[0] + kh[1], kh[1]))

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "frontier": [[_num(k), _num(h)] for k, h in self.frontier],
            "exhaustive": self.exhaustive,
            "checked": self.checked,
        }


def _exact_ratio(x):
    x = _num(x)
    return Fraction(x) if isinstance(x, int) else x


def pareto_frontier(profile: dict) -> list:
    if any(t == 0 and s > 0 for t, s in profile.items()):
        grid_floor = max(s for t, s in profile.items() if t == 0)
    else:
        grid_floor = 0
    grid = sorted({grid_floor} | {s for s in profile.values() if s >= grid_floor})
    frontier = []
    for h0 in grid:
        slopes = [(_exact_ratio(s) - _exact_ratio(h0)) / _exact_ratio(t) for t, s in profile.items() if t > 0]
        k = max([0] + [x for x in slopes if x > 0])
        if not frontier or k < frontier[-1][0]:
            frontier.append((k, h0))
    return frontier


def fit_affine_control(space: CoarseSpace, mode: str = "one-variable", policy: ScanPolicy = ScanPolicy()) -> AffineFit:
    d, mu = space.dist, space.mu
    if mode == "one-variable":
        arity = 4

        def pairs(a, a2, b, c):
            return d[a, a2], d[mu(a, b, c), mu(a2, b, c)]
    elif mode == "three-variable":
        arity = 6

        def pairs(a, b, c, a2, b2, c2):
            return d[a, a2] + d[b, b2] + d[c, c2], d[mu(a, b, c), mu(a2, b2, c2)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    profile: dict = {}
    checked = 0
    for cols in _blocks(len(space), arity, policy, "affine-" + mode):
        t, s = pairs(*cols)
        checked += len(t)
        order = np.lexsort((-s, t))
        t, s = t[order], s[order]
        first = np.ones(len(t), dtype=bool)
        first[1:] = t[1:] != t[:-1]
        for tv, sv in zip(t[first].tolist(), s[first].tolist()):
            if sv > profile.get(tv, -1):
                profile[tv] = sv
    return AffineFit(mode, profile, pareto_frontier(profile), policy.exhaustive(len(space), arity), checked)


def kappa4(space: CoarseSpace, policy: ScanPolicy = ScanPolicy()) -> Measurement:
    d, mu = space.dist, space.mu

    def defect(a, b, c, e):
        return d[mu(mu(a, b, c), b, e), mu(a, b, mu(c, b, e))]

    return _maximize(space, 4, defect, policy, "kappa4")


def five_point_defect(space: CoarseSpace, policy: ScanPolicy = ScanPolicy()) -> Measurement:
    """max d(mu(x,y,mu(z,v,w)), mu(mu(x,y,z), mu(x,y,v), w))."""
    d, mu = space.dist, space.mu

    def defect(x, y, z, v, w):
        return d[mu(x, y, mu(z, v, w)), mu(mu(x, y, z), mu(x, y, v), w)]

    return _maximize(space, 5, defect, policy, "five-point")


def iterated_defects(space: CoarseSpace, n: int, policy: ScanPolicy = ScanPolicy()) -> dict:
    """Defects of the two iterated-median approximations, indexed as in their statements.

    With mu(x; b) = x the n = 1 case of the first is a tautology; the
    five-point estimate is its n = 2 case.
    """
    if not 1 <= n <= 4:
        raise ValueError("n must lie in 1..4")
    d, mu = space.dist, space.mu

    def first(a, b, *es):
        top = es[n]
        lhs = mu(a, top, iterated(space, es[:n], b))
        rhs = iterated(space, [mu(a, top, e) for e in es[:n]], b)
        return d[lhs, rhs]

    def second(a, b, c, *es):
        lhs = mu(a, b, iterated(space, es, c))
        rhs = iterated(space, [mu(a, b, e) for e in es], mu(a, b, c))
        return d[lhs, rhs]

    return {
        "lemma_2_19_defect": _maximize(space, n + 3, first, policy, f"iter-c{n}"),
        "lemma_2_20_defect": _maximize(space, n + 3, second, policy, f"iter-d{n}"),
    }


# --- intervals -------------------------------------------------------------------

def interval_points(space: CoarseSpace, a: int, b: int) -> frozenset:
    return frozenset(np.unique(space.mu(a, np.arange(len(space)), b)).tolist())


def coarse_interval(space: CoarseSpace, a: int, b: int, lam) -> frozenset:
    ys = np.arange(len(space))
    return frozenset(np.flatnonzero(space.dist[space.mu(a, ys, b), ys] <= lam).tolist())


@dataclass
class DichotomyReport:
    lam: float
    differing_pairs: int
    pairs_checked: int
    exhaustive: bool
    witness: tuple | None  # (a, b)
    interval: frozenset | None = None
    coarse: frozenset | None = None

    def to_json(self, space: CoarseSpace) -> dict:
        out = {
            "lambda": _num(self.lam),
            "differing_pairs": self.differing_pairs,
            "pairs_checked": self.pairs_checked,
            "exhaustive": self.exhaustive,
            "witness": None,
        }
        if self.witness is not None:
            out["witness"] = {
                "a": labels_of(space, [self.witness[0]])[0],
                "b": labels_of(space, [self.witness[1]])[0],
                "interval": labels_of(space, sorted(self.interval)),
                "coarse_interval": labels_of(space, sorted(self.coarse)),
            }
        return out


def interval_dichotomy(space: CoarseSpace, lam=0, policy: ScanPolicy = ScanPolicy()) -> DichotomyReport:
    """Compare [a,b] with [a,b]_lam over all ordered pairs (or sampled anchors a)."""
    n = len(space)
    ar = np.arange(n)
    exhaustive = policy.exhaustive(n, 3)
    if exhaustive:
        anchors = ar
    else:
        rows = max(1, min(n, policy.samples // n))
        anchors = np.sort(policy.rng("dichotomy").choice(n, size=rows, replace=False))
    differing, witness = 0, None
    for a in anchors:
        m = space.mu(a, ar[:, None], ar[None, :])  # m[y, b] = mu(a, y, b)
        coarse = (space.dist[m, ar[:, None]] <= lam).T
        inside = np.zeros((n, n), dtype=bool)
        inside[np.broadcast_to(ar[None, :], m.shape), m] = True
        bad = np.flatnonzero(np.any(coarse != inside, axis=1))
        differing += len(bad)
        if witness is None and len(bad):
            b = int(bad[0])
            witness = (int(a), b)
            found = (frozenset(np.flatnonzero(inside[b]).tolist()), frozenset(np.flatnonzero(coarse[b]).tolist()))
    report = DichotomyReport(lam, differing, len(anchors) * n, exhaustive, witness)
    if witness is not None:
        report.interval, report.coarse = found
    return report


def membership_defect(space: CoarseSpace, policy: ScanPolicy = ScanPolicy()) -> Measurement:
    """Smallest lam with mu(x,y,z) in [x,y]_lam for all scanned triples."""
    d, mu = space.dist, space.mu

    def defect(x, y, z):
        m = mu(x, y, z)
        return d[mu(x, m, y), m]

    return _maximize(space, 3, defect, policy, "membership")


@dataclass(frozen=True)
class GateReport:
    value: float
    witness: tuple | None
    outside_interval: int
    exhaustive: bool
    checked: int


def interval_gate_defect(space: CoarseSpace, a: int, b: int, lam, policy: ScanPolicy = ScanPolicy()) -> GateReport:
    """max over x,y,z in [a,b]_lam of d(mu(a,b,mu(x,y,z)), mu(x,y,z))."""
    members = np.array(sorted(coarse_interval(space, a, b, lam)), dtype=np.int64)
    k = len(members)
    inside = np.zeros(len(space), dtype=bool)
    inside[list(interval_points(space, a, b))] = True
    exhaustive = policy.exhaustive(k, 3)
    if exhaustive:
        cols = [c.ravel() for c in np.meshgrid(members, members, members, indexing="ij")]
    else:
        cols = list(members[policy.rng("gate").integers(0, k, size=(3, policy.samples))])
    m = space.mu(*cols)
    gated = space.mu(a, b, m)
    vals = space.dist[gated, m]
    i = int(np.argmax(vals))
    return GateReport(_num(vals[i]), tuple(int(c[i]) for c in cols), int(np.count_nonzero(~inside[gated])),
                      exhaustive, len(vals))


def interval_masks(space: CoarseSpace) -> np.ndarray:
    """masks[a, b, y] is True iff y lies in [a, b]."""
    n = len(space)
    ar = np.arange(n)
    masks = np.zeros((n, n, n), dtype=bool)
    for a in range(n):
        m = space.mu(a, ar[:, None], ar[None, :])
        masks[a][np.broadcast_to(ar[None, :], m.shape), m] = True
    return masks


def thin_interval_lambda(space: CoarseSpace, policy: ScanPolicy = ScanPolicy()) -> Measurement:
    """Smallest lam with [a,b] inside the lam-neighbourhood of [a,x] u [x,b] for every x in [a,b]."""
    n = len(space)
    d = space.dist
    masks = interval_masks(space)
    exhaustive = policy.exhaustive(n, 2) or n * n <= policy.samples
    if exhaustive:
        pairs = itertools.product(range(n), repeat=2)
    else:
        pairs = map(tuple, policy.rng("thin").integers(0, n, size=(policy.samples // 100, 2)).tolist())
    best, witness, checked = 0, None, 0
    for a, b in pairs:
        members = np.flatnonzero(masks[a, b])
        for x in members:
            union = np.flatnonzero(masks[a, x] | masks[x, b])
            gaps = d[np.ix_(members, union)].min(axis=1)
            j = int(np.argmax(gaps))
            checked += 1
            if witness is None or gaps[j] > best:
                best = gaps[j]
                witness = (a, b, int(x), int(members[j]))
    return Measurement(_num(best), witness, exhaustive, checked)


# --- rank certificates -------------------------------------------------------

@dataclass(frozen=True)
class CornerCertificate:
    anchor: int
    opposite: int
    legs: tuple
    lambda_defect: float
    separation: float
    interval_defect: float

    @classmethod
    def from_points(cls, space: CoarseSpace, a: int, b: int, legs) -> "CornerCertificate":
        d, mu = space.dist, space.mu
        legs = tuple(int(e) for e in legs)
        lam = max((d[mu(e, a, f), a] for e, f in itertools.permutations(legs, 2)), default=0)
        sep = min(d[e, a] for e in legs)
        gap = max(d[mu(a, b, e), e] for e in legs)
        return cls(int(a), int(b), legs, _num(lam), _num(sep), _num(gap))

    def to_json(self, space: CoarseSpace) -> dict:
        return {
            "anchor": labels_of(space, [self.anchor])[0],
            "opposite": labels_of(space, [self.opposite])[0],
            "legs": labels_of(space, self.legs),
            "lambda_defect": self.lambda_defect,
            "separation": self.separation,
            "interval_defect": self.interval_defect,
        }


def _first_clique(compat: np.ndarray, k: int) -> list | None:
    """Lexicographically first k-clique in a boolean adjacency matrix."""
    n = compat.shape[0]

    def grow(chosen, candidates):
        if len(chosen) == k:
            return chosen
        for pos, v in enumerate(candidates):
            if len(chosen) + len(candidates) - pos < k:
                return None
            rest = [u for u in candidates[pos + 1:] if compat[v, u]]
            found = grow(chosen + [v], rest)
            if found:
                return found
        return None

    return grow([], list(range(n)))


def corner_search(space: CoarseSpace, k: int, lam=0, policy: ScanPolicy = ScanPolicy()) -> CornerCertificate:
    """Best separation of k legs in an interval whose pairwise projections to the anchor stay within lam."""
    if k < 2:
        raise ValueError("corner_search needs k >= 2")
    n = len(space)
    d, mu = space.dist, space.mu
    ar = np.arange(n)
    exhaustive = n <= 2 * policy.sample_cap
    if exhaustive:
        pairs = [(a, b) for a in range(n) for b in range(n)]
        probes = ar
    else:
        rng = policy.rng("corner")
        pairs = [tuple(p) for p in rng.integers(0, n, size=(max(1, policy.samples // 100), 2)).tolist()]
        probes = np.unique(np.concatenate([rng.integers(0, n, size=128), [0]]))
    best = CornerCertificate(0, 0, (0,) * k, 0, 0, 0)
    best_sep = 0
    anchor, ends, full = None, None, None
    for a, b in pairs:
        if exhaustive:
            if a != anchor:
                # per anchor: ends[y, b] = mu(a, y, b) and the projection defect of every leg pair
                anchor = a
                ends = mu(a, ar[:, None], ar[None, :])
                proj = d[mu(ar[:, None], a, ar[None, :]), a]
                full = (proj <= lam) & (proj.T <= lam)
            legs = np.unique(ends[:, b])
        else:
            legs = np.unique(np.concatenate([mu(a, probes, b), [a, b]]))
        da = d[legs, a]
        if len(legs) < k or np.sort(da)[-k] <= best_sep:
            continue
        if exhaustive:
            compat = full[np.ix_(legs, legs)]
        else:
            pair_defect = d[mu(legs[:, None], a, legs[None, :]), a]
            compat = (pair_defect <= lam) & (pair_defect.T <= lam)
        np.fill_diagonal(compat, False)
        if k == 2:
            sep = np.where(compat, np.minimum(da[:, None], da[None, :]), -1)
            flat = int(np.argmax(sep))
            if sep.flat[flat] > best_sep:
                i, j = divmod(flat, len(legs))
                best_sep = sep.flat[flat]
                best = CornerCertificate.from_points(space, a, b, (legs[i], legs[j]))
            continue
        # cliques at threshold t survive at every lower threshold: binary search the largest one
        levels = sorted(x for x in set(da.tolist()) if x > best_sep)
        lo, hi, found = 0, len(levels) - 1, None
        while lo <= hi:
            mid = (lo + hi) // 2
            keep = np.flatnonzero(da >= levels[mid])
            sub = compat[np.ix_(keep, keep)]
            if len(keep) >= k and _has_clique(sub, k):
                found, lo = mid, mid + 1
            else:
                hi = mid - 1
        if found is not None:
            best_sep = levels[found]
            keep = np.flatnonzero(da >= best_sep)
            clique = _first_clique(compat[np.ix_(keep, keep)], k)
            best = CornerCertificate.from_points(space, a, b, legs[keep[clique]])
    return best


def _has_clique(compat: np.ndarray, k: int) -> bool:
    if k == 3:
        adj = compat.astype(np.int64)
        return bool(np.any((adj @ adj) * adj))
    return _first_clique(compat, k) is not None


@dataclass(frozen=True)
class CubeMap:
    k: int
    vertices: tuple  # vertices[S] for S a bitmask over the legs
    defect: float
    min_adjacent: float

    def to_json(self, space: CoarseSpace) -> dict:
        return {
            "k": self.k,
            "vertices": {format(s, f"0{self.k}b")[::-1]: labels_of(space, [v])[0] for s, v in enumerate(self.vertices)},
            "defect": self.defect,
            "min_adjacent": self.min_adjacent,
        }


def complete_cube(space: CoarseSpace, a: int, b: int, legs) -> CubeMap:
    """Vertex S is the iterated median of the legs in S towards b; the empty set goes to a."""
    k = len(legs)
    if not 1 <= k <= 4:
        raise ValueError("complete_cube supports 1..4 legs")
    verts = []
    for s in range(1 << k):
        chosen = [legs[i] for i in range(k) if s >> i & 1]
        verts.append(int(iterated(space, chosen, b)) if chosen else int(a))
    v = np.array(verts)
    x, y, z = (c.ravel() for c in np.meshgrid(*(np.arange(1 << k),) * 3, indexing="ij"))
    maj = (x & y) | (x & z) | (y & z)
    defect = space.dist[space.mu(v[x], v[y], v[z]), v[maj]].max()
    adjacent = [space.dist[v[s], v[s | 1 << i]] for s in range(1 << k) for i in range(k) if not s >> i & 1]
    return CubeMap(k, tuple(verts), _num(defect), _num(min(adjacent)))


# --- approximating subsets ---------------------------------------------------

@lru_cache(maxsize=None)
def _free(p: int):
    return free_median_algebra(p)


@dataclass
class Approximation:
    algebra: object  # FiniteMedianAlgebra on p generators
    pi: tuple  # A[i] -> generator i
    lam: tuple  # element j -> point index
    H_emp: float


def _approximation_defects(space: CoarseSpace, p: int, subsets: np.ndarray) -> np.ndarray:
    """H_emp for each row of ``subsets`` (shape (S, p))."""
    alg, theta = _free(p)
    images = np.stack([np.asarray(evaluate(t, list(subsets.T), space.mu)) for t in theta])  # (elements, S)
    table = alg.table
    m = len(alg)
    x, y, z = (c.ravel() for c in np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij"))
    out = np.zeros(subsets.shape[0], dtype=space.dist.dtype)
    step = max(1, CHUNK // subsets.shape[0])
    for s in range(0, len(x), step):
        xs, ys, zs = x[s:s + step], y[s:s + step], z[s:s + step]
        lhs = images[table[xs, ys, zs]]
        rhs = space.mu(images[xs], images[ys], images[zs])
        out = np.maximum(out, space.dist[lhs, rhs].max(axis=0))
    return out


def approximate_subset(space: CoarseSpace, points, allow_five: bool = False) -> Approximation:
    points = [int(x) for x in points]
    p = len(points)
    if p < 1 or p > (5 if allow_five else 4):
        raise ValueError("subsets of size 1..4 are supported (5 with allow_five)")
    alg, theta = _free(p)
    lam = tuple(int(evaluate(t, points, lambda x, y, z: int(space.mu(x, y, z)))) for t in theta)
    h = _approximation_defects(space, p, np.array([points]))[0]
    return Approximation(alg, tuple(range(p)), lam, _num(h))


def empirical_H(space: CoarseSpace, p: int, policy: ScanPolicy = ScanPolicy(), subsets: int | None = None) -> Measurement:
    """Largest approximation defect over p-subsets (all of them if few, else a seeded sample)."""
    n = len(space)
    want = policy.subsets if subsets is None else subsets
    if p > n:
        return Measurement(0, None, True, 0)
    if math.comb(n, p) <= want:
        rows = np.array(list(itertools.combinations(range(n), p)))
        exhaustive = True
    else:
        rng = policy.rng(f"H{p}")
        rows = np.sort(np.array([rng.choice(n, size=p, replace=False) for _ in range(want)]), axis=1)
        exhaustive = False
    vals = _approximation_defects(space, p, rows)
    i = int(np.argmax(vals))
    return Measurement(_num(vals[i]), tuple(int(v) for v in rows[i]), exhaustive, len(rows))


# --- hyperbolicity and geodesics -----------------------------------------------

def gromov_delta(space: CoarseSpace, policy: ScanPolicy = ScanPolicy()) -> Measurement:
    """Four-point delta; the witness is ordered so (a,b),(c,d) is the largest pairing."""
    d = space.dist

    def defect(a, b, c, e):
        sums = np.sort(np.stack([d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c]]), axis=0)
        return (sums[2] - sums[1]) / 2

    m = _maximize(space, 4, defect, policy, "delta")
    a, b, c, e = m.witness
    sums = [d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c]]
    order = [(a, b, c, e), (a, c, b, e), (a, e, b, c)][int(np.argmax(sums))]
    return Measurement(m.value, order, m.exhaustive, m.checked)


def geodesic_set(space: CoarseSpace, a: int, b: int, tolerance: float = DEFAULT_TOLERANCE) -> frozenset:
    d = space.dist
    excess = d[a] + d[b] - d[a, b]
    hit = excess == 0 if space.is_integral else np.abs(excess) <= tolerance
    return frozenset(np.flatnonzero(hit).tolist())


def hausdorff(space: CoarseSpace, first, second):
    first, second = sorted(first), sorted(second)
    if not first or not second:
        raise ValueError("Hausdorff distance needs two nonempty sets")
    block = space.dist[np.ix_(first, second)]
    return _num(max(block.min(axis=1).max(), block.min(axis=0).max()))


def counterexample_row(n: int, margin: int = 1) -> dict:
    """Distances and Hausdorff gaps around a_n, b_n in the weighted-column space."""
    from .spaces import gamma_path, sec5_endpoints, sec5_space

    space = sec5_space(n, margin)
    a_lab, b_lab = sec5_endpoints(n)
    a, b = space.index(a_lab), space.index(b_lab)
    gamma = gamma_path(n)
    image = {space.index(p) for p in gamma.points}
    ivl = interval_points(space, a, b)
    dist = _num(space.dist[a, b])
    return {
        "n": n,
        "d_ab": dist,
        "gamma_length": gamma.length,
        "geodesic": gamma.length == dist,
        "hausdorff_gamma_interval": hausdorff(space, image, ivl),
        "hausdorff_geodesics_interval": hausdorff(space, geodesic_set(space, a, b), ivl),
    }


# --- full report ---------------------------------------------------------------

def verify_space(space: CoarseSpace, policy: ScanPolicy = ScanPolicy(), five_subsets: int = 10) -> dict:
    """Measure the simplified axioms and compare them with the ledger built from measured inputs."""
    report: dict = {"points": len(space)}
    m12 = check_m1_m2(space, policy)
    fit = fit_affine_control(space, "one-variable", policy)
    k4 = kappa4(space, policy)
    k5 = five_point_defect(space, policy)
    hs = {p: empirical_H(space, p, policy, None if p < 5 else five_subsets) for p in (3, 4, 5)}
    K, H0 = (_num(x) for x in fit.best())
    ledger = ConstantLedger(K, H0, {p: m.value for p, m in hs.items()})
    report["m1"] = m12["m1"].to_json(space)
    report["m2"] = m12["m2"].to_json(space)
    report["kappa0"] = _num(m12["kappa0"])
    report["affine_control"] = fit.to_json()
    report["kappa4"] = k4.to_json(space)
    report["five_point_defect"] = k5.to_json(space)
    report["H"] = {str(p): m.to_json(space) for p, m in hs.items()}
    report["ledger"] = ledger.to_json()
    checks = {
        "M1/M2 within kappa0": m12["kappa0"] <= ledger.kappa0,
        "C1' affine control": fit.feasible(K, H0),
        "C2' 4-point within kappa4": k4.value <= ledger.kappa4,
        "5-point within kappa5": k5.value <= ledger.kappa5,
    }
    report["checks"] = checks
    report["ok"] = all(checks.values())
    return report
