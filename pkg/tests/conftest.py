import os
import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message="The TBB threading layer")

from rotpatch import _contour  # noqa: E402


@pytest.fixture(params=["numpy", "numba"])
def backend(request):
    prev = _contour.BACKEND
    _contour.use_backend(request.param)
    yield request.param
    _contour.use_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(int(os.environ.get("ROTPATCH_TEST_SEED", "1234")))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE", None)
    if lines:
        terminalreporter.section("acceptance")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
