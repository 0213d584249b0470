import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helpers import FixtureServer  # noqa: E402

from allowlistforge import kernels  # noqa: E402

DATA = Path(__file__).parent / "data"

BACKENDS = [pytest.param(kernels.pure, id="pure")]
if kernels.compiled is not None:
    BACKENDS.append(pytest.param(kernels.compiled, id="compiled"))


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def server():
    srv = FixtureServer().start()
    try:
        yield srv
    finally:
        srv.stop()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
