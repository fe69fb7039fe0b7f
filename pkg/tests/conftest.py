import pytest

# (criterion label, passed, detail) appended by tests/test_acceptance.py
ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    def record(label: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        print(line)
        ACCEPTANCE.append((label, ok, detail))
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(ACCEPTANCE, key=lambda r: _key(r[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))


def _key(label: str):
    head = label.split()[0]
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 0, head)
