import pytest

_VERDICTS: dict[int, tuple[bool, str, str]] = {}


@pytest.fixture
def verdict():
    """Record the outcome of an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _VERDICTS[number] = (bool(ok), title, detail)
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, title, detail = _VERDICTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{number:>2}] {title}: {detail}")
