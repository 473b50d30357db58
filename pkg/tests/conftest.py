import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fraclap", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fraclap")

_CRITERIA: dict[str, str] = {}


@pytest.fixture(scope="session")
def criterion_log():
    """Collects one verdict line per acceptance criterion."""
    return _CRITERIA


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_CRITERIA, key=lambda k: int(k.split()[0])):
            terminalreporter.write_line(_CRITERIA[key])
