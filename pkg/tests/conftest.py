import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from coneradon.phantom import Bump, PhantomSpec  # noqa: E402

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_record():
    """Callable ``record(criterion, ok, detail)`` collected for the end-of-run summary."""

    def record(criterion, ok, detail):
        prev = _ACCEPTANCE.get(criterion)
        if prev is not None:
            ok = ok and prev[0]
            detail = f"{prev[1]}; {detail}"
        _ACCEPTANCE[criterion] = (bool(ok), detail)
        print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(str(k).split(".")[0]), str(k))):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def ref2():
    return PhantomSpec(2, (Bump("mollifier", (0.0, 2.0), 1.0, 1.0),))


@pytest.fixture(scope="session")
def ref3():
    return PhantomSpec(3, (Bump("mollifier", (0.0, 0.0, 2.0), 1.0, 1.0),))
