import numpy as np
import pytest

from geophase.experiments import preset_system
from geophase.pulse import QuantumState

_LINES: list[tuple[int, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def random_state(rng: np.random.Generator, dim: int = 4) -> QuantumState:
    """Full-rank random density matrix from a Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return QuantumState(rho / np.trace(rho))


@pytest.fixture
def make_state():
    return random_state


@pytest.fixture
def phase_system():
    return preset_system("phase")


@pytest.fixture
def algo_system():
    return preset_system("algorithms")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def detail(request):
    """Callable that stores a one-line summary for the criterion's report line."""
    request.node.criterion_detail = ""

    def record(text: str) -> None:
        request.node.criterion_detail = text
        print(text)

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    status = "PASS" if report.passed else "FAIL"
    info = getattr(item, "criterion_detail", "")
    if report.failed and call.excinfo is not None:
        info = f"{info} | {call.excinfo.typename}: {str(call.excinfo.value).splitlines()[0][:160]}"
    _LINES.append((number, f"{status} criterion {number}: {title}  [{info.strip(' |')}]"))


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
