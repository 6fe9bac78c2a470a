import time
from contextlib import contextmanager

import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's verdict and timing.

    ``with criterion(3, "title", budget=5.0) as info:`` runs the checks;
    ``info["detail"]`` is echoed on the summary line. Exceeding ``budget``
    seconds fails the criterion.
    """

    @contextmanager
    def run(number, title, budget=None):
        info = {"detail": ""}
        start = time.perf_counter()
        try:
            yield info
        except BaseException as exc:
            _ACCEPTANCE[number] = ("FAIL", title, f"{info['detail']} {type(exc).__name__}: {exc}".strip())
            raise
        elapsed = time.perf_counter() - start
        detail = f"{info['detail']} [{elapsed:.2f} s]".strip()
        if budget is not None and elapsed >= budget:
            _ACCEPTANCE[number] = ("FAIL", title, f"{detail} exceeds {budget} s")
            raise AssertionError(f"criterion {number} took {elapsed:.2f} s, budget {budget} s")
        _ACCEPTANCE[number] = ("PASS", title, detail)
        print(f"criterion {number}: PASS {title} {detail}")

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        verdict, title, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}  {detail}")
