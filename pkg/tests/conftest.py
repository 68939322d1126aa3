import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mythos import data_path, load_kb  # noqa: E402

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def data():
    return data_path()


@pytest.fixture
def example():
    def load(name, source="background"):
        return load_kb(data_path("examples", f"{name}.krss"), source)
    return load


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
