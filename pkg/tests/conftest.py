import importlib

import numpy as np
import pytest

from polarsw import _pykernels
from polarsw.polar_core import CodeSpec

try:
    _ck = importlib.import_module("polarsw._ckernels")
except ImportError:
    _ck = None

KERNELS = [pytest.param(_pykernels, id="python")]
if _ck is not None:
    KERNELS.append(pytest.param(_ck, id="cython"))


@pytest.fixture(params=KERNELS)
def kern(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spec(rng, n, K=None, design_p=0.1, l_crc=0):
    N = 1 << n
    if K is None:
        K = int(rng.integers(1, N))
    info = np.sort(rng.choice(N, K, replace=False))
    return CodeSpec(n=n, K=K, info_set=tuple(info.tolist()), design_p=design_p, l_crc=l_crc)


def matrix_oracle(n):
    """B_N F^{(x)n} built from scratch: Kronecker power, then rows in bit-reversed order."""
    N = 1 << n
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, F)
    rev = [int(format(i, f"0{n}b")[::-1], 2) if n else 0 for i in range(N)]
    B = np.zeros((N, N), dtype=np.uint8)
    B[np.arange(N), rev] = 1
    return (B.astype(int) @ G.astype(int)) % 2


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
