"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Oracles here are deliberately naive (plain loops over labels and distances)
so they do not share code paths with the vectorised scans they check.
"""
import csv
import itertools
import json
import time

import numpy as np
import pytest

from medianlab.cli import main
from medianlab.ledger import ConstantLedger
from medianlab.median import identity_defects, median_cube, rank, rank_bruteforce
from medianlab.rules import TableRule
from medianlab.space import CoarseSpace
from medianlab.spaces import grid_space, path_tree, product_space, sec5_space, star_tree
from medianlab.terms import equivalent, et_classes, free_median_algebra, parse_term, rewrite_path
from medianlab.verify import (
    ScanPolicy,
    check_m1_m2,
    coarse_interval,
    corner_search,
    empirical_H,
    fit_affine_control,
    five_point_defect,
    gromov_delta,
    interval_dichotomy,
    interval_points,
    kappa4,
    thin_interval_lambda,
)

from conftest import cached_grid, cached_subdivided, tree_fixtures


def cli_json(capsys, *argv):
    assert main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def test_criterion_1_counterexample(capsys, record):
    start = time.perf_counter()
    res = cli_json(capsys, "counterexample", "--n", "1-16", "--margin", "1")["results"]
    elapsed = time.perf_counter() - start
    bad = [
        r["n"] for r in res["rows"]
        if not (r["gamma_length"] == r["d_ab"] == 3 * (r["n"] + 1) and r["geodesic"]
                and r["hausdorff_gamma_interval"] == r["n"] + 1)
    ]
    ok = [r["n"] for r in res["rows"]] == list(range(1, 17)) and not bad and elapsed < 30
    record(1, ok, f"n=1..16 d_H = n+1, bad rows {bad}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_free_algebras(record):
    start = time.perf_counter()
    sizes = [len(free_median_algebra(p)[0]) for p in (1, 2, 3, 4)]
    reports = [et_classes(p) for p in (1, 2, 3)]
    pairs = [
        ("<<a1 a2 a3> a1 a4>", "<a1 <a1 a2 a3> a4>"),
        ("<a1 a2 <a1 a2 a4>>", "<a1 a2 a4>"),
        ("<<a1 a2 a3> a2 a4>", "<a1 a2 <a3 a2 a4>>"),
        ("<a1 <a2 a3 a4> a1>", "a1"),
    ]
    spot = all(
        equivalent(parse_term(x, 4), parse_term(y, 4), 4) and rewrite_path(parse_term(x, 4), parse_term(y, 4), p=4)
        for x, y in pairs
    )
    spot = spot and not equivalent(parse_term("<a1 a2 a3>", 4), parse_term("<a1 a2 a4>", 4), 4)
    alg4 = free_median_algebra(4)[0]
    ranks = (rank(alg4), rank_bruteforce(alg4))
    elapsed = time.perf_counter() - start
    closure = [r.canonical_classes for r in reports]
    agree = all(r.agree for r in reports) and closure == sizes[:3]
    ok = sizes == [1, 2, 4, 12] and agree and spot and ranks == (3, 3) and elapsed < 10
    record(2, ok, f"sizes {sizes}, ET classes {[r.et_classes for r in reports]}, rank {ranks}, {elapsed:.1f}s")
    assert ok


def test_criterion_3_identity_suite(record):
    start = time.perf_counter()
    fixtures = {
        "free(4)": free_median_algebra(4)[0],
        "cube(3)": median_cube(3),
        "grid 6x6": grid_space(5).as_algebra(),
    }
    defects = {name: identity_defects(alg, 3) for name, alg in fixtures.items()}
    elapsed = time.perf_counter() - start
    nonzero = {name: {k: v for k, v in d.items() if v} for name, d in defects.items()}
    ok = not any(nonzero.values()) and elapsed < 120
    record(3, ok, f"{len(next(iter(defects.values())))} identities x {len(fixtures)} fixtures, "
                  f"nonzero {nonzero}, {elapsed:.1f}s")
    assert ok


def test_criterion_4_ledger(capsys, record):
    led = ConstantLedger(1, 0, {3: 1, 4: 2, 5: 1})
    res = cli_json(capsys, "report", "--K", "1", "--H0", "0", "--H3", "1", "--H4", "2", "--H5", "1")["results"]
    rho2 = led.rho_n(2)
    values = (led.kappa0, led.kappa4, led.kappa5, rho2.slope, rho2.offset, led.C_n(2), led.D_n(2))
    cli_values = (res["kappa0"], res["kappa4"], res["kappa5"], res["rho_n"]["2"]["slope"],
                  res["rho_n"]["2"]["offset"], res["C_n"]["2"], res["D_n"]["2"])
    ok = values == cli_values == (8, 8, 5, 2, 0, 10, 20)
    record(4, ok, f"kappa0,kappa4,kappa5,rho2,C2,D2 = {values}")
    assert ok


def test_criterion_5_rank_dichotomy(tmp_path, capsys, record):
    start = time.perf_counter()
    path = tmp_path / "rank.csv"
    res = cli_json(capsys, "rank-scan", "--family", "grid", "--windows", "4-12", "--k", "2,3", "--csv", str(path))
    with path.open() as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    two = {int(r["window"]): float(r["separation"]) for r in rows if r["k"] == "2"}
    three = [float(r["separation"]) for r in rows if r["k"] == "3"]
    slope = res["results"]["fits"]["2"]["slope"]
    trees = [corner_search(t, k).separation for t in tree_fixtures() for k in (2, 3)]
    elapsed = time.perf_counter() - start
    ok = (
        two == {w: float(w) for w in range(4, 13)}
        and abs(slope - 1) <= 0.01
        and three == [0.0] * 9
        and not any(trees)
        and elapsed < 300
    )
    record(5, ok, f"k=2 slope {slope}, k=3 max {max(three)}, trees max {max(trees)}, {elapsed:.1f}s")
    assert ok


def brute_delta(space):
    d = space.dist
    best = 0
    for a, b, c, e in itertools.combinations(range(len(space)), 4):
        s = sorted([d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c]])
        best = max(best, (s[2] - s[1]) / 2)
    return best


def geodesic_interval(space, a, b):
    d = space.dist
    return [y for y in range(len(space)) if d[a, y] + d[y, b] == d[a, b]]


def brute_thin(space):
    d = space.dist
    n = len(space)
    ivl = {(a, b): geodesic_interval(space, a, b) for a in range(n) for b in range(n)}
    best = 0
    for (a, b), members in ivl.items():
        for x in members:
            union = set(ivl[a, x]) | set(ivl[x, b])
            best = max(best, max(min(d[y, u] for u in union) for y in members))
    return int(best)


def test_criterion_6_hyperbolicity(record):
    grids = {n: gromov_delta(cached_grid(n)) for n in (2, 4, 6)}
    corner_ok = all(
        sorted(cached_grid(n).labels[i] for i in m.witness) == sorted([(0, 0), (n, n), (n, 0), (0, n)])
        for n, m in grids.items()
    )
    deltas = {n: m.value for n, m in grids.items()}
    brute = {n: brute_delta(cached_grid(n)) for n in (2, 4, 6)}
    tree_delta = [(gromov_delta(t).value, brute_delta(t)) for t in tree_fixtures()]
    thin = {n: (thin_interval_lambda(cached_grid(n)).value, brute_thin(cached_grid(n))) for n in (2, 4)}
    tree_thin = [(thin_interval_lambda(t).value, brute_thin(t)) for t in tree_fixtures()]
    ok = (
        deltas == brute == {2: 2, 4: 4, 6: 6}
        and corner_ok
        and all(x == y == 0 for x, y in tree_delta)
        and thin == {2: (2, 2), 4: (4, 4)}
        and all(x == y == 0 for x, y in tree_thin)
    )
    record(6, ok, f"grid delta {deltas}, thin {thin}, trees delta/thin all 0: "
                  f"{all(x == 0 for x, _ in tree_delta + tree_thin)}")
    assert ok


def test_criterion_7_subdivided_stability(record):
    start = time.perf_counter()
    policy = ScanPolicy()
    rows = {}
    for n in (4, 8, 12):
        s = cached_subdivided(n)
        fit = fit_affine_control(s, policy=policy)
        K, H0 = fit.best()
        h4 = empirical_H(s, 4, policy)
        ledger = ConstantLedger(K, H0, {4: h4.value})
        rows[n] = {
            "kappa0": check_m1_m2(s, policy)["kappa0"],
            "kappa4": kappa4(s, policy).value,
            "five_point": five_point_defect(s, policy).value,
            "H4": h4.value,
            "ledger_kappa4": ledger.kappa4,
        }
    elapsed = time.perf_counter() - start
    stable = all(rows[n][k] == rows[4][k] for n in (8, 12) for k in ("kappa4", "five_point", "H4"))
    finite = all(np.isfinite(r[k]) for r in rows.values() for k in ("kappa4", "five_point", "H4"))
    bounded = all(r["kappa4"] <= r["ledger_kappa4"] for r in rows.values())
    ok = all(r["kappa0"] == 0 for r in rows.values()) and stable and finite and bounded and elapsed < 600
    summary = {n: (r["kappa0"], r["kappa4"], r["five_point"], r["H4"], float(r["ledger_kappa4"])) for n, r in rows.items()}
    record(7, ok, f"(kappa0, kappa4, five-point, H4, ledger kappa4) {summary}, {elapsed:.1f}s")
    assert ok


def hamming_cube(k):
    cube = median_cube(k)
    bits = np.array([[int(c) for c in format(i, f"0{k}b")] for i in range(1 << k)])
    dist = np.abs(bits[:, None, :] - bits[None, :, :]).sum(axis=2)
    return CoarseSpace(tuple(range(1 << k)), dist, TableRule(cube.table), f"cube({k})")


def exact_fixtures():
    return [grid_space(4), sec5_space(2), hamming_cube(3), product_space(path_tree(2), star_tree(3)), *tree_fixtures()]


def test_criterion_8_interval_dichotomy(record):
    mismatches = {}
    for space in exact_fixtures():
        n = len(space)
        mismatches[space.name] = sum(
            interval_points(space, a, b) != coarse_interval(space, a, b, 0) for a in range(n) for b in range(n)
        )
    exact_ok = not any(mismatches.values())
    s = cached_subdivided(8)
    report = interval_dichotomy(s, 0, ScanPolicy(sample_cap=len(s)))
    witness = report.to_json(s)["witness"]
    found = report.differing_pairs > 0 and witness is not None
    ok = exact_ok and found
    record(8, ok, f"exact fixtures differing pairs {sum(mismatches.values())}; subdivided n=8 "
                  f"differing {report.differing_pairs}/{report.pairs_checked} "
                  f"({'exhaustive' if report.exhaustive else 'sampled'})")
    assert exact_ok, mismatches
    # The floor operator returns a vertex lying in its own interval, so the two
    # notions agree on this space; this half is expected to fail (see README).
    assert found, "no pair with [a,b] != [a,b]_0 on the subdivided window"
