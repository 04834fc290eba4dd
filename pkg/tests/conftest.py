import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from harmsec.chart import DEFAULT_FD

# geometry evaluations are slow-ish; keep example counts modest and deadlines off
settings.register_profile("repo", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture
def fd():
    return DEFAULT_FD


def sample(obj, count=20, seed=42, fd=DEFAULT_FD):
    """Seeded sample points for anything that carries a chart."""
    chart = getattr(obj, "chart", None)
    if chart is None and hasattr(obj, "structure"):
        chart = obj.structure.chart
    if chart is None and hasattr(obj, "total"):
        chart = obj.total.chart
    if chart is None:
        chart = obj
    return chart.sample_points(count, seed, fd)


def fro(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
