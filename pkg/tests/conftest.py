import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("pkg", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pkg")

# acceptance criterion -> list of (label, passed); printed after the run
ACCEPTANCE: dict = {}


def record(criterion: int, label: str, passed: bool) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed)))
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {label}")
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        items = ACCEPTANCE[crit]
        ok = all(p for _, p in items)
        detail = "; ".join(f"{lab}={'ok' if p else 'FAIL'}" for lab, p in items)
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
