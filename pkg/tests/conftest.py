import pytest

_criterion_lines = []


@pytest.fixture
def criterion_report():
    """Record one pass/fail line per acceptance criterion.

    Lines are echoed in a terminal summary section so they survive output
    capture in any pytest invocation.
    """

    def _report(number: int, name: str, ok: bool, elapsed: float, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        tail = f" [{detail}]" if detail else ""
        line = f"ACCEPT {number:02d} {name}: {status} ({elapsed:.1f}s){tail}"
        _criterion_lines.append(line)
        print(line)
        assert ok, f"criterion {number} ({name}) failed{tail}"

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
