import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# criterion label -> list of (part, passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}
CRITERIA = [str(i) for i in range(1, 10)]


@pytest.fixture
def record():
    def _record(part, passed, detail):
        ACCEPTANCE.setdefault(part.rstrip("abcd"), []).append((part, bool(passed), detail))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in CRITERIA:
        parts = ACCEPTANCE.get(c)
        if not parts:
            tr.write_line(f"criterion {c}: NOT RUN")
            continue
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {'pass' if p else 'FAIL'} ({d})" for name, p, d in parts)
        tr.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'} - {detail}")
