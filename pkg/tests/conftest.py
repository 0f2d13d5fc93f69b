import numpy as np
import pytest

from npmixer import tensor as T


@pytest.fixture(autouse=True)
def _float64_fresh_tape():
    T.set_default_dtype(np.float64)
    T.reset_tape()
    yield
    T.set_default_dtype(np.float64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria record their sub-checks here; one summary line is printed per criterion
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        ok = all(passed for _, passed, _ in checks)
        parts = "; ".join(f"{name}: {'ok' if passed else 'FAILED'} ({detail})"
                          for name, passed, detail in checks)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} | {parts}")
