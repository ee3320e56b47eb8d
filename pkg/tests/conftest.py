import numpy as np
import pytest

from rydberg_qelm.data import default_data_dir, load_mnist, write_bundled_mnist


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def mnist_dir():
    """Directory with MNIST IDX files, built from the mlxtend sample if absent."""
    d = default_data_dir()
    try:
        load_mnist(d)
    except FileNotFoundError:
        try:
            write_bundled_mnist(d)
        except FileNotFoundError as exc:
            pytest.skip(str(exc))
    return d


# one PASS/FAIL line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
