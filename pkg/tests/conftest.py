import functools

import pytest

from medianlab.spaces import grid_space, path_tree, sec5_space, shifted_grid, spider_tree, star_tree, subdivided_sec5

ACCEPTANCE_LINES: list = []


@pytest.fixture
def record():
    """Collect one summary line per acceptance criterion."""

    def add(number, passed, detail=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def cached_grid(side):
    return grid_space(side)


@functools.lru_cache(maxsize=None)
def cached_sec5(n):
    return sec5_space(n)


@functools.lru_cache(maxsize=None)
def cached_subdivided(n):
    return subdivided_sec5(n)


@functools.lru_cache(maxsize=None)
def cached_shifted(side):
    return shifted_grid(side)


def tree_fixtures():
    return [path_tree(5), star_tree(4), spider_tree(3, 3), spider_tree(4, 2)]
