from collections import OrderedDict

import pytest

# criterion number -> list of (label, passed, detail)
ACCEPTANCE = OrderedDict()


@pytest.fixture
def criterion():
    def record(number, label, passed, detail=""):
        ACCEPTANCE.setdefault(number, []).append((label, bool(passed), detail))
        status = "PASS" if passed else "FAIL"
        print(f"\n[criterion {number}] {status} {label}: {detail}")
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        failed = [label for label, ok, _ in checks if not ok]
        status = "PASS" if not failed else "FAIL"
        extra = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(
            f"criterion {number}: {status} [{len(checks) - len(failed)}/{len(checks)} checks]{extra}")
