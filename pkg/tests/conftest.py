import numpy as np
import pytest

from superiorization.geometry import Ball, Box, Halfspace, Hyperplane

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Collects one pass/fail line per acceptance criterion for the summary."""

    def add(label, ok, detail=""):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        return ok

    return add


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_set(rng, kind, n):
    if kind == "halfspace":
        return Halfspace(rng.standard_normal(n), rng.standard_normal())
    if kind == "hyperplane":
        return Hyperplane(rng.standard_normal(n), rng.standard_normal())
    if kind == "ball":
        return Ball(rng.standard_normal(n), rng.uniform(0.1, 2.0))
    lo = rng.standard_normal(n)
    return Box(lo, lo + rng.uniform(0.0, 2.0, n))


def random_member(rng, s, n):
    """A random point of ``s`` (projection of a random point, so a member by construction)."""
    return s.project(3 * rng.standard_normal(n))


KINDS = ("halfspace", "hyperplane", "ball", "box")
