import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mwrc.specio import load_spec  # noqa: E402


@pytest.fixture(scope="session")
def counterexample():
    return load_spec("sec4c.json")


@pytest.fixture(scope="session")
def xor_example():
    return load_spec("sec6b.json")


@pytest.fixture(scope="session")
def toy():
    return load_spec("toy_case3.json")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# --- acceptance report ----------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    prev = _CRITERIA.get(number)
    status = "PASS" if rep.passed else "FAIL"
    if prev is not None and prev[1] == "FAIL":
        status = "FAIL"
    detail = getattr(item, "criterion_detail", "")
    _CRITERIA[number] = (title, status, detail or (prev[2] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[number]
        line = f"criterion {number}: {status}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))


@pytest.fixture
def detail(request):
    """Attach a short measured summary to the acceptance line of this test."""
    def note(text: str):
        request.node.criterion_detail = text
    return note
