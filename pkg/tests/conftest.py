import functools

import pytest

from nfsieve.field_data import load_field

DEMO_FIELDS = ["q_sqrt2", "q_i", "cubic_x3m2", "q_zeta5"]
ALL_FIELDS = ["q_sqrt2", "q_sqrt5", "q_sqrt5_x2m5", "q_i", "q_sqrt_m5", "cubic_x3m2", "q_zeta5"]


@functools.lru_cache(maxsize=None)
def field(name):
    return load_field(name)


@pytest.fixture(scope="session")
def get_field():
    return field


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(key: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("abc")), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
