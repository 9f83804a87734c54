import pytest

from liqhorizon import FirmValueParams, ImpactParams, model3


@pytest.fixture(scope="session")
def params():
    return ImpactParams()


@pytest.fixture(scope="session")
def firm():
    return FirmValueParams()


@pytest.fixture(scope="session")
def surface(params, firm):
    return model3.solve_value_surface(params, firm, model3.make_grid(params, firm))


def pytest_terminal_summary(terminalreporter):
    from tests_support import acceptance_lines

    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
