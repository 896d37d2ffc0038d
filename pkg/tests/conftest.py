import functools
from pathlib import Path

import pytest

from wittenhodge import generate_mesh, load_problem

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES = {}


@functools.lru_cache(maxsize=None)
def _problem(kind, items):
    return load_problem(generate_mesh(kind, **dict(items)))


def problem_for(kind, **params):
    """Cached problem per generator call; bundles are cached on the problem."""
    return _problem(kind, tuple(sorted(params.items())))


@pytest.fixture(scope="session")
def small_disk():
    return problem_for("disk", rings=4, sectors=16)


@pytest.fixture(scope="session")
def small_annulus():
    return problem_for("annulus", inner=1.0, outer=2.0, rings=4, sectors=16)


@pytest.fixture(scope="session")
def small_sphere():
    return problem_for("sphere", bands=8, sectors=16)


@pytest.fixture(scope="session")
def small_torus():
    return problem_for("torus", sectors=16, tube=12)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
