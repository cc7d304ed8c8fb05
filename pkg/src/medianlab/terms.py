"""Formal ternary expressions and the free median algebra.

A term is either a positive ``int`` (the variable ``a<i>``) or a 3-tuple of
terms.  Tuples make terms immutable, hashable and cheap to build, which the
rewriting searches rely on.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence, Union

import numpy as np

from .limits import LimitExceeded
from .median import FiniteMedianAlgebra, closure

Term = Union[int, tuple]

RULES = ("I-expand", "I-contract", "II-permute", "III-assoc-left", "III-assoc-right", "IV-descend")
DEFAULT_MAX_P = 5
_PERMS = [p for p in itertools.permutations(range(3)) if p != (0, 1, 2)]


class TermSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def node(a: Term, b: Term, c: Term) -> tuple:
    return (a, b, c)


def is_var(t: Term) -> bool:
    return isinstance(t, int)


def serialize(t: Term) -> str:
    if is_var(t):
        return f"a{t}"
    return "<" + " ".join(serialize(c) for c in t) + ">"


_TOKEN = re.compile(r"<|>|a[0-9]+| +")


def parse_term(text: str, p: int) -> Term:
    """Parse ``term := a<digits> | "<" term SP term SP term ">"``."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.group(), pos))
        pos = m.end()

    i = 0

    def skip_spaces() -> bool:
        nonlocal i
        skipped = False
        while i < len(tokens) and tokens[i][0].startswith(" "):
            i += 1
            skipped = True
        return skipped

    def parse() -> Term:
        nonlocal i
        if i >= len(tokens):
            raise TermSyntaxError("unexpected end of input", len(text))
        tok, at = tokens[i]
        if tok.startswith("a"):
            index = int(tok[1:])
            if index < 1 or index > p:
                raise TermSyntaxError(f"unknown variable {tok} for alphabet size {p}", at)
            i += 1
            return index
        if tok != "<":
            raise TermSyntaxError(f"expected a term, found {tok!r}", at)
        i += 1
        skip_spaces()
        children = [parse()]
        for _ in range(2):
            if not skip_spaces():
                if i < len(tokens) and tokens[i][0] == ">":
                    raise TermSyntaxError("bracket closes after fewer than three terms", tokens[i][1])
                where = tokens[i][1] if i < len(tokens) else len(text)
                raise TermSyntaxError("expected a space between terms", where)
            children.append(parse())
        skip_spaces()
        if i >= len(tokens):
            raise TermSyntaxError("unbalanced brackets", len(text))
        if tokens[i][0] != ">":
            raise TermSyntaxError("bracket holds more than three terms", tokens[i][1])
        i += 1
        return tuple(children)

    skip_spaces()
    term = parse()
    skip_spaces()
    if i != len(tokens):
        raise TermSyntaxError("trailing input after term", tokens[i][1])
    return term


@lru_cache(maxsize=1 << 20)
def complexity(t: Term) -> int:
    if is_var(t):
        return 0
    return 1 + max(complexity(c) for c in t)


def size(t: Term) -> int:
    if is_var(t):
        return 1
    return 1 + sum(size(c) for c in t)


def variables(t: Term) -> set:
    if is_var(t):
        return {t}
    return set().union(*(variables(c) for c in t))


def terms_up_to(p: int, max_complexity: int) -> list:
    """All terms over ``a1..ap`` with complexity at most ``max_complexity``."""
    level = list(range(1, p + 1))
    for _ in range(max_complexity):
        level = list(range(1, p + 1)) + [t for t in itertools.product(level, repeat=3)]
    return level


@dataclass(frozen=True)
class RewriteStep:
    """One elementary transformation.

    ``position`` is the path (a run of first-child indices) to the rewritten
    subterm.  For IV-descend steps ``inner`` is the rule applied there.  ``arg``
    is the permutation for II-permute and the partner term for I-expand.
    """

    source: Term
    target: Term
    rule: str
    position: tuple = ()
    inner: str | None = None
    arg: object = None

    @property
    def base_rule(self) -> str:
        return self.inner if self.rule == "IV-descend" else self.rule


def _apply_local(t: Term, rule: str, arg) -> Term:
    if rule == "I-expand":
        return (t, t, arg)
    if is_var(t):
        raise ValueError(f"{rule} does not apply to a variable")
    if rule == "I-contract":
        if t[0] != t[1]:
            raise ValueError("I-contract needs equal first and second children")
        return t[0]
    if rule == "II-permute":
        return tuple(t[k] for k in arg)
    if rule == "III-assoc-right":
        inner = t[0]
        if is_var(inner) or inner[1] != t[1]:
            raise ValueError("III-assoc-right needs <<x y z> y w>")
        return (inner[0], inner[1], (inner[2], inner[1], t[2]))
    if rule == "III-assoc-left":
        inner = t[2]
        if is_var(inner) or inner[1] != t[1]:
            raise ValueError("III-assoc-left needs <x y <z y w>>")
        return ((t[0], t[1], inner[0]), t[1], inner[2])
    raise ValueError(f"unknown rule {rule}")


def apply_step(step: RewriteStep) -> Term:
    """Re-apply ``step`` to its source."""

    def go(t: Term, depth: int) -> Term:
        if depth == len(step.position):
            return _apply_local(t, step.base_rule, step.arg)
        if is_var(t) or step.position[depth] != 0:
            raise ValueError("rewrite position does not exist")
        return (go(t[0], depth + 1), t[1], t[2])

    return go(step.source, 0)


def _local_moves(t: Term, partners: Sequence[Term], partner_bound: int) -> Iterator[tuple]:
    for psi in partners:
        yield (t, t, psi), "I-expand", psi
    if is_var(t):
        return
    if t[0] == t[1] and complexity(t[2]) <= partner_bound:
        yield t[0], "I-contract", None
    seen = {t}
    for perm in _PERMS:
        target = (t[perm[0]], t[perm[1]], t[perm[2]])
        if target not in seen:
            seen.add(target)
            yield target, "II-permute", perm
    if not is_var(t[0]) and t[0][1] == t[1]:
        yield _apply_local(t, "III-assoc-right", None), "III-assoc-right", None
    if not is_var(t[2]) and t[2][1] == t[1]:
        yield _apply_local(t, "III-assoc-left", None), "III-assoc-left", None


def _moves(t: Term, partners, partner_bound) -> Iterator[tuple]:
    """Yield (target, rule, position, inner, arg) for every elementary transformation of ``t``."""
    for target, rule, arg in _local_moves(t, partners, partner_bound):
        yield target, rule, (), None, arg
    if not is_var(t):
        for child, rule, pos, inner, arg in _moves(t[0], partners, partner_bound):
            yield (child, t[1], t[2]), "IV-descend", (0,) + pos, inner or rule, arg


@lru_cache(maxsize=64)
def _partners(p: int, partner_bound: int) -> tuple:
    return tuple(terms_up_to(p, partner_bound))


def elementary_neighbors(t: Term, partner_bound: int = 1, p: int | None = None) -> set:
    """Every single elementary transformation of ``t``.

    Type I partners range over all terms of complexity <= ``partner_bound`` on
    ``a1..ap`` (``p`` defaults to the largest variable in ``t``).  Contractions
    are only offered when the discarded child is within the same bound, so the
    returned relation is symmetric.
    """
    p = p if p is not None else max(variables(t))
    partners = _partners(p, partner_bound)
    return {
        RewriteStep(t, target, rule, pos, inner, arg)
        for target, rule, pos, inner, arg in _moves(t, partners, partner_bound)
    }


def evaluate(t: Term, assignment: Sequence, op: Callable):
    """Realise ``t`` with variable i sent to ``assignment[i-1]`` and brackets to ``op``."""
    cache: dict = {}

    def go(s: Term):
        if is_var(s):
            return assignment[s - 1]
        key = id(s)
        if key not in cache:
            cache[key] = op(go(s[0]), go(s[1]), go(s[2]))
        return cache[key]

    return go(t)


def majority(x: int, y: int, z: int) -> int:
    return (x & y) | (x & z) | (y & z)


def generator_bits(i: int, p: int) -> int:
    """Universal generator i (1-based): bit S is set iff i belongs to the subset S."""
    return sum(1 << s for s in range(1 << p) if s >> (i - 1) & 1)


def canonical_form(t: Term, p: int) -> int:
    """Evaluation of ``t`` in the 2^p-coordinate majority cube.

    The result is an int whose bit S (for S a subset of {1..p} read as a
    bitmask) is the coordinate at S.  Two terms are median-equivalent iff
    their canonical forms agree.
    """
    if max(variables(t)) > p:
        raise ValueError(f"term uses variables beyond a{p}")
    gens = [generator_bits(i, p) for i in range(1, p + 1)]
    return evaluate(t, gens, majority)


def canonical_vector(bits: int, p: int) -> tuple:
    return tuple((bits >> s) & 1 for s in range(1 << p))


def equivalent(t1: Term, t2: Term, p: int) -> bool:
    return canonical_form(t1, p) == canonical_form(t2, p)


def _path_steps(chain: list, partners, partner_bound) -> list:
    steps = []
    for src, dst in zip(chain, chain[1:]):
        for target, rule, pos, inner, arg in _moves(src, partners, partner_bound):
            if target == dst:
                steps.append(RewriteStep(src, dst, rule, pos, inner, arg))
                break
        else:  # pragma: no cover - symmetric relation guarantees a step
            raise AssertionError("missing reverse step")
    return steps


def rewrite_path(
    t1: Term,
    t2: Term,
    complexity_cap: int = 4,
    partner_bound: int = 1,
    p: int | None = None,
    max_nodes: int = 500_000,
) -> list | None:
    """Chain of elementary transformations from ``t1`` to ``t2``, or ``None``.

    Bidirectional breadth-first search over terms of complexity at most
    ``complexity_cap``; the returned chain is a shortest one within that cap.
    ``None`` means the bounded search gave up, not that the terms differ.
    """
    if t1 == t2:
        return []
    p = p if p is not None else max(variables(t1) | variables(t2))
    partners = _partners(p, partner_bound)
    if complexity(t1) > complexity_cap or complexity(t2) > complexity_cap:
        return None
    parents = ({t1: None}, {t2: None})
    frontiers = ([t1], [t2])
    seen = 2
    while frontiers[0] and frontiers[1]:
        side = 0 if len(frontiers[0]) <= len(frontiers[1]) else 1
        mine, other = parents[side], parents[1 - side]
        nxt = []
        meet = None
        for t in frontiers[side]:
            for target, *_ in _moves(t, partners, partner_bound):
                if target in mine or complexity(target) > complexity_cap:
                    continue
                mine[target] = t
                nxt.append(target)
                seen += 1
                if target in other:
                    meet = target
                    break
            if meet is not None or seen > max_nodes:
                break
        if meet is not None:
            chain = []
            x = meet
            while x is not None:
                chain.append(x)
                x = parents[0][x]
            chain.reverse()
            x = parents[1][meet]
            while x is not None:
                chain.append(x)
                x = parents[1][x]
            return _path_steps(chain, partners, partner_bound)
        if seen > max_nodes:
            return None
        frontiers = (nxt, frontiers[1]) if side == 0 else (frontiers[0], nxt)
    return None


@dataclass
class EtClassReport:
    p: int
    terms: int
    et_classes: int
    canonical_classes: int
    merged_by_search: int
    unresolved: int

    @property
    def agree(self) -> bool:
        return self.unresolved == 0 and self.et_classes == self.canonical_classes


def et_classes(
    p: int,
    max_complexity: int = 2,
    complexity_cap: int = 4,
    partner_bound: int = 1,
    max_nodes: int = 200_000,
) -> EtClassReport:
    """Partition all terms of complexity <= ``max_complexity`` by elementary transformations.

    Classes are first merged along transformations that stay inside the term
    set; remaining components with equal canonical form are joined by
    bounded rewrite searches.  Soundness (no merge across canonical classes)
    is asserted along the way.
    """
    terms = terms_up_to(p, max_complexity)
    index = {t: i for i, t in enumerate(terms)}
    canon = [canonical_form(t, p) for t in terms]
    parent = list(range(len(terms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    partners = _partners(p, partner_bound)
    for i, t in enumerate(terms):
        for target, *_ in _moves(t, partners, partner_bound):
            j = index.get(target)
            if j is None:
                continue
            if canon[i] != canon[j]:
                raise AssertionError(f"unsound step {serialize(t)} -> {serialize(target)}")
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    roots = sorted({find(i) for i in range(len(terms))})
    merged = 0
    unresolved = 0
    by_class: dict = {}
    for r in roots:
        by_class.setdefault(canon[r], []).append(r)
    for group in by_class.values():
        anchor = group[0]
        for r in group[1:]:
            path = rewrite_path(terms[anchor], terms[r], complexity_cap, partner_bound, p, max_nodes)
            if path is None:
                unresolved += 1
            else:
                parent[find(r)] = find(anchor)
                merged += 1
    et = len({find(i) for i in range(len(terms))})
    return EtClassReport(p, len(terms), et, len(by_class), merged, unresolved)


def _theta_levels(p: int):
    """Minimal-complexity representatives, ties by node count then serialised form.

    Returns ``(order, reps)`` where ``reps[bits] = (complexity, size, text, term)``.
    """
    gens = [generator_bits(i, p) for i in range(1, p + 1)]
    best = {g: (1, f"a{i}", i) for i, g in enumerate(gens, start=1)}
    reps = {g: (0, 1, f"a{i}", i) for i, g in enumerate(gens, start=1)}
    level = 0
    while True:
        level += 1
        values = list(best)
        new_best = dict(best)
        for x, y, z in itertools.product(values, repeat=3):
            v = majority(x, y, z)
            bx, by, bz = best[x], best[y], best[z]
            total = 1 + bx[0] + by[0] + bz[0]
            cur = new_best.get(v)
            if cur is not None and total > cur[0]:
                continue
            text = f"<{bx[1]} {by[1]} {bz[1]}>"
            if cur is None or total < cur[0] or text < cur[1]:
                new_best[v] = (total, text, (bx[2], by[2], bz[2]))
        fresh = [v for v in new_best if v not in reps]
        for v in fresh:
            total, text, term = new_best[v]
            reps[v] = (level, total, text, term)
        best = new_best
        if not fresh:
            return reps


def free_median_algebra(p: int, max_p: int = DEFAULT_MAX_P, force: bool = False):
    """Free median algebra on ``p`` generators and its representative terms.

    Elements are the median closure of the universal generators in the
    2^p-coordinate majority cube, ordered by representative (complexity, node
    count, text); generators come first.  Returns ``(algebra, theta)`` with
    ``theta[i]`` a term evaluating to element ``i``.
    """
    if p < 1:
        raise ValueError("p must be positive")
    if p > max_p and not force:
        raise LimitExceeded(f"free median algebra on {p} generators exceeds the limit p <= {max_p}")
    gens = [generator_bits(i, p) for i in range(1, p + 1)]
    members = closure(gens, majority)
    reps = _theta_levels(p)
    if set(reps) != set(members):
        raise AssertionError("representative search and closure disagree")
    order = sorted(members, key=lambda v: reps[v][:3])
    pos = {v: i for i, v in enumerate(order)}
    width = 1 << p
    labels = tuple("".join(str((v >> s) & 1) for s in range(width)) for v in order)
    n = len(order)
    table = np.empty((n, n, n), dtype=np.int64)
    for i, j, k in itertools.product(range(n), repeat=3):
        table[i, j, k] = pos[majority(order[i], order[j], order[k])]
    theta = [reps[v][3] for v in order]
    return FiniteMedianAlgebra.from_table(labels, table), theta
