from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from codinggap.instance import UnicastInstance

settings.register_profile("repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def single_edge() -> UnicastInstance:
    return UnicastInstance.build([("s", "t", 1)], [("s", "t", 1)])


@pytest.fixture
def butterfly() -> UnicastInstance:
    """Two crossing sessions sharing one middle edge, with side edges s1-t2 and s2-t1."""
    return UnicastInstance.build(
        [("s1", "a"), ("s2", "a"), ("a", "b"), ("b", "t1"), ("b", "t2"), ("s1", "t2"), ("s2", "t1")],
        [("s1", "t1"), ("s2", "t2")],
    )


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion; all lines are
    repeated in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'} {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
