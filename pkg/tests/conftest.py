import numpy as np
import pytest

from wavefuse.wavelet import make_filter_bank


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def bank():
    return make_filter_bank("db2")


ACCEPTANCE_LINES = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, title)`` then fill ``.detail``."""
    entry = {}

    def declare(number, title):
        entry.update(number=number, title=title, detail="")
        return entry

    yield declare
    if entry:
        rep = getattr(request.node, "rep_call", None)
        status = "PASS" if rep is not None and rep.passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {entry['number']}: {entry['title']}"
                                + (f" ({entry['detail']})" if entry["detail"] else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
