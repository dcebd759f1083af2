from __future__ import annotations

import pytest

N_CRITERIA = 12
_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record ``(passed, detail)`` for an acceptance criterion."""
    store = request.config.stash.setdefault(_RESULTS, {})

    def record(number: int, passed: bool, detail: str) -> bool:
        store[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_RESULTS, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n in store:
            ok, detail = store[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: NO RESULT  (deselected, or raised before reporting)")
