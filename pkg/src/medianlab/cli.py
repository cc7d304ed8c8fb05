"""Command-line entry point: ``medianlab <command> [options]``.

Exit codes: 0 success, 1 input error, 2 resource limit.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import re
import sys
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .ledger import ConstantLedger
from .limits import LimitExceeded
from .median import rank
from .space import CoarseSpace, SpaceFormatError, load_space
from .spaces import (
    gamma_path,
    grid_space,
    path_tree,
    product_space,
    sec5_space,
    shifted_grid,
    spider_tree,
    star_tree,
    subdivided_sec5,
)
from .terms import free_median_algebra, serialize
from .verify import (
    ScanPolicy,
    corner_search,
    counterexample_row,
    gromov_delta,
    interval_dichotomy,
    thin_interval_lambda,
    verify_space,
)

CSV_VERSION = 1


class InputError(Exception):
    """Bad command-line input (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_RANGE = re.compile(r"^(\d+)-(\d+)(?::(\d+))?$")


def parse_range(text: str) -> list:
    """'4-12', '4-12:2' or '1,3,5' -> list of ints."""
    m = _RANGE.match(text)
    if m:
        lo, hi, step = int(m[1]), int(m[2]), int(m[3] or 1)
        if step < 1 or hi < lo:
            raise InputError(f"empty range {text!r}")
        return list(range(lo, hi + 1, step))
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse range {text!r}") from exc


BUILTINS = {
    "grid": lambda n: grid_space(n),
    "sec5": lambda n: sec5_space(n),
    "subdivided": lambda n: subdivided_sec5(n),
    "shifted": lambda n: shifted_grid(n),
    "path": lambda n: path_tree(n),
    "star": lambda n: star_tree(n),
    "tripod": lambda n: spider_tree(3, n),
    "gridpath": lambda n: product_space(path_tree(n), path_tree(n)),
}


def builtin_space(name: str, size: int) -> CoarseSpace:
    if name not in BUILTINS:
        raise InputError(f"unknown space family {name!r} (choose from {', '.join(BUILTINS)})")
    try:
        return BUILTINS[name](size)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def resolve_space(arg: str) -> tuple:
    """A JSON file path, or ``family:size`` for a built-in constructor. Returns (space, digest)."""
    path = Path(arg)
    if path.is_file():
        try:
            space = load_space(path)
        except OSError as exc:
            raise InputError(str(exc)) from exc
        return space, hashlib.sha256(path.read_bytes()).hexdigest()
    if ":" in arg:
        name, size = arg.split(":", 1)
        try:
            n = int(size)
        except ValueError as exc:
            raise InputError(f"bad size in {arg!r}") from exc
        return builtin_space(name, n), hashlib.sha256(f"builtin:{name}:{n}".encode()).hexdigest()
    raise InputError(f"{arg!r} is neither a file nor a family:size builtin")


def number(text: str):
    """argparse type: int when integral, else float."""
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    return int(value) if value.is_integer() else value


class RunReport:
    def __init__(self, argv: list, seed: int):
        self.payload = {"command": argv, "seed": seed, "version": __version__}
        self.timings: dict = {}

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        yield
        self.timings[name] = round(time.perf_counter() - start, 4)

    def to_json(self) -> str:
        body = dict(self.payload)
        body["timings"] = self.timings
        return json.dumps(body, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def atomic_write(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_csv(path: str | None, columns: list, rows: list, kind: str) -> str:
    buf = io.StringIO()
    buf.write(f"# medianlab {kind} csv v{CSV_VERSION}\n")
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k) for k in columns})
    text = buf.getvalue()
    if path:
        atomic_write(path, text)
    return text


def growth_fit(xs, ys) -> dict:
    """Least-squares line through (x, y); descriptive only."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if len(xs) < 2:
        return {"slope": None, "intercept": None, "r2": None, "growth": "insufficient"}
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    total = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if total == 0 else 1 - float(np.sum(resid**2)) / total
    growth = "bounded" if abs(slope) < 0.05 else "linear"
    return {"slope": round(float(slope), 6), "intercept": round(float(intercept), 6), "r2": round(r2, 6), "growth": growth}


# --- commands ------------------------------------------------------------------

def cmd_free_algebra(args, report: RunReport) -> None:
    try:
        with report.phase("construct"):
            alg, theta = free_median_algebra(args.p)
    except LimitExceeded:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    with report.phase("rank"):
        r = rank(alg)
    report.payload["results"] = {
        "p": args.p,
        "elements": len(alg),
        "rank": r,
        "theta": [serialize(t) for t in theta],
        "algebra": alg.to_json(),
    }


def _policy(args) -> ScanPolicy:
    return ScanPolicy(seed=args.seed, sample_cap=args.sample_cap)


def cmd_verify(args, report: RunReport) -> None:
    space, digest = resolve_space(args.space)
    report.payload["input_digest"] = digest
    policy = _policy(args)
    with report.phase("axioms"):
        results = verify_space(space, policy)
    with report.phase("intervals"):
        results["interval_dichotomy"] = interval_dichotomy(space, 0, policy).to_json(space)
    report.payload["results"] = results


RANK_COLUMNS = ["family", "window", "k", "lambda", "separation", "lambda_defect", "anchor", "opposite", "legs"]


def cmd_rank_scan(args, report: RunReport) -> None:
    policy = _policy(args)
    rows = []
    for w in parse_range(args.windows):
        space = builtin_space(args.family, w)
        for k in parse_range(args.k):
            if k < 2:
                raise InputError("k must be at least 2")
            with report.phase(f"window {w} k {k}"):
                cert = corner_search(space, k, args.lam, policy)
            c = cert.to_json(space)
            rows.append({
                "family": args.family, "window": w, "k": k, "lambda": args.lam,
                "separation": c["separation"], "lambda_defect": c["lambda_defect"],
                "anchor": json.dumps(c["anchor"]), "opposite": json.dumps(c["opposite"]), "legs": json.dumps(c["legs"]),
            })
    fits = {}
    for k in sorted({r["k"] for r in rows}):
        sel = [r for r in rows if r["k"] == k]
        fits[str(k)] = growth_fit([r["window"] for r in sel], [r["separation"] for r in sel])
    write_csv(args.csv, RANK_COLUMNS, rows, "rank-scan")
    spec = f"{args.family}|{args.windows}|{args.k}|{args.lam}"
    report.payload["input_digest"] = hashlib.sha256(spec.encode()).hexdigest()
    report.payload["results"] = {"rows": rows, "fits": fits}


COUNTER_COLUMNS = ["n", "d_ab", "gamma_length", "geodesic", "hausdorff_gamma_interval", "hausdorff_geodesics_interval"]


def cmd_counterexample(args, report: RunReport) -> None:
    rows = []
    for n in parse_range(args.n):
        if n < 0:
            raise InputError("n must be nonnegative")
        with report.phase(f"n {n}"):
            rows.append(counterexample_row(n, args.margin))
    write_csv(args.csv, COUNTER_COLUMNS, rows, "counterexample")
    report.payload["results"] = {
        "margin": args.margin,
        "rows": rows,
        "hausdorff_equals_n_plus_1": all(r["hausdorff_gamma_interval"] == r["n"] + 1 for r in rows),
        "all_geodesic": all(r["geodesic"] for r in rows),
    }


def cmd_delta(args, report: RunReport) -> None:
    space, digest = resolve_space(args.space)
    report.payload["input_digest"] = digest
    policy = _policy(args)
    with report.phase("delta"):
        delta = gromov_delta(space, policy)
    results = {"gromov_delta": delta.to_json(space)}
    if args.thin:
        with report.phase("thin"):
            results["thin_interval_lambda"] = thin_interval_lambda(space, policy).to_json(space)
    report.payload["results"] = results


def cmd_report(args, report: RunReport) -> None:
    H = {p: v for p, v in ((3, args.H3), (4, args.H4), (5, args.H5)) if v is not None}
    ledger = ConstantLedger(args.K, args.H0, H, args.depth)
    out = ledger.to_json()
    if args.zeta is not None and 4 in H:
        out["zeta_prime"] = ledger.zeta_prime(args.zeta)
    report.payload["results"] = out


def cmd_space(args, report: RunReport) -> None:
    """Emit constructor output: a space JSON, or the gamma path for ``gamma:n``."""
    if args.spec.startswith("gamma:"):
        try:
            n = int(args.spec.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad size in {args.spec!r}") from exc
        report.payload["results"] = gamma_path(n).to_json()
    else:
        space, _ = resolve_space(args.spec)
        report.payload["results"] = space.to_json()


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for sampled scans (default 0)")
    common.add_argument("--sample-cap", type=int, default=150, help="largest N scanned exhaustively (default 150)")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="CSV output path for scan families")
    common.add_argument("--tolerance", type=float, default=1e-9, help="absolute tolerance for floating metrics")

    parser = _Parser(prog="medianlab", description="Median algebra and coarse median toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("free-algebra", parents=[common], help="free median algebra on p generators")
    p.add_argument("p", type=int)
    p.set_defaults(func=cmd_free_algebra)

    p = sub.add_parser("verify", parents=[common], help="measure coarse median axioms of a space")
    p.add_argument("space", help="space JSON file or family:size builtin")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rank-scan", parents=[common], help="corner certificates across windows")
    p.add_argument("--family", default="grid", choices=sorted(BUILTINS))
    p.add_argument("--windows", default="4-12")
    p.add_argument("--k", default="2,3")
    p.add_argument("--lam", type=number, default=0)
    p.set_defaults(func=cmd_rank_scan)

    p = sub.add_parser("counterexample", parents=[common], help="geodesics versus intervals in the weighted grid")
    p.add_argument("--n", default="1-16")
    p.add_argument("--margin", type=int, default=1)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("delta", parents=[common], help="Gromov four-point delta")
    p.add_argument("space")
    p.add_argument("--thin", action="store_true", help="also compute the thin-interval constant")
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("report", parents=[common], help="constant ledger from K, H0 and H(p)")
    p.add_argument("--K", type=number, required=True)
    p.add_argument("--H0", type=number, required=True)
    p.add_argument("--H3", type=number)
    p.add_argument("--H4", type=number)
    p.add_argument("--H5", type=number)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--zeta", type=number)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("space", parents=[common], help="emit a built-in space (family:size) or gamma:n path as JSON")
    p.add_argument("spec")
    p.set_defaults(func=cmd_space)
    return parser


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    report = RunReport(argv, args.seed)
    try:
        args.func(args, report)
    except LimitExceeded as exc:
        print(f"medianlab: limit exceeded: {exc}", file=sys.stderr)
        return 2
    except (InputError, SpaceFormatError, ValueError, OSError) as exc:
        print(f"medianlab: input error: {exc}", file=sys.stderr)
        return 1
    text = report.to_json()
    if args.out:
        atomic_write(args.out, text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
