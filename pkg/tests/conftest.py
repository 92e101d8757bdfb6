import numpy as np
import pytest

from qdiffmap.dataset import DataSet


def random_dataset(n, d=2, seed=0, spread=1.0):
    rng = np.random.default_rng(seed)
    return DataSet(spread * rng.standard_normal((n, d)), name=f"random_n{n}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criterion -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}: {detail}")
