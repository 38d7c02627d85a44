import pytest

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def acceptance_report(request):
    """Callable ``(number, ok, detail) -> ok`` that records one line per criterion."""
    lines = request.config.stash[_LINES_KEY]

    def record(number, ok, detail, status=None):
        status = status or ("PASS" if ok else "FAIL")
        lines.append((number, f"criterion {number:>2}: {status}  {detail}"))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
