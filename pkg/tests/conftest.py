import pytest

from mvpremium.market import black_scholes_example, two_asset_example


@pytest.fixture(scope="session")
def bs():
    return black_scholes_example()


@pytest.fixture(scope="session")
def two():
    return two_asset_example()


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
