import pytest

from sigmasite import GroupParams, build_presheaf, build_site, make_protocol

ACCEPTANCE_LINES = []


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> bool:
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


SMALL = GroupParams(23, 11, 2)
MEDIUM = GroupParams(47, 23, 2)


@pytest.fixture(scope="session")
def schnorr_small():
    pr = make_protocol("schnorr", SMALL)
    statement, witness = pr.keygen(3)
    return pr, statement, witness


@pytest.fixture(scope="session")
def small_site(schnorr_small):
    pr, statement, _ = schnorr_small
    return build_site(pr, statement)


@pytest.fixture(scope="session")
def small_sheaf(schnorr_small, small_site):
    pr, statement, witness = schnorr_small
    return build_presheaf(pr, statement, witness, small_site)
