import numpy as np
import pytest

from mch import make_grid


@pytest.fixture
def unit_grid():
    """``L = pi`` so that wavenumbers are the integers."""
    return make_grid(np.pi, 16)


@pytest.fixture
def wide_grid():
    return make_grid(20 * np.pi, 1024)


ACCEPTANCE_LINES: dict[str, list[str]] = {}


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion; returns ``ok``."""

    def _report(criterion: int, ok: bool, detail: str) -> bool:
        line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.setdefault(request.node.nodeid, []).append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    lines = [ln for v in ACCEPTANCE_LINES.values() for ln in v]
    for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
        terminalreporter.write_line(line)
