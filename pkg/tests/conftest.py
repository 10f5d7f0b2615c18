import numpy as np
import pytest

from qtlib.quat import Quaternion
from qtlib.qmat import QMatrix

ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}")


# -- scalar-arithmetic oracles, independent of the split complex storage ------

def to_qlist(A: QMatrix):
    return [[A[i, j] for j in range(A.cols)] for i in range(A.rows)]


def naive_matmul(A, B):
    """Product of lists of Quaternion rows using only Hamilton products."""
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = Quaternion()
            for t in range(k):
                s = s + A[i][t] * B[t][j]
            row.append(s)
        out.append(row)
    return out


def qlist_close(A, B, atol):
    return all(a.isclose(b, atol) for ra, rb in zip(A, B) for a, b in zip(ra, rb))


# sizes (m, q): the q = 5 series spans n = 225..2500 for the scaling fit; (375, 3) is n = 1125 at q = 3
SPEED_SIZES = [(45, 5), (100, 5), (200, 5), (375, 3), (500, 5)]


@pytest.fixture(scope="session")
def speed_bench():
    """Best-of-3 structured vs dense inverse timings, shared by the scaling and speed tests."""
    from qtlib.solve import bench

    rows = bench(SPEED_SIZES, trials=3, seed=0, tikhonov=False)
    out = {}
    for (m, q), (s, d) in zip(SPEED_SIZES, zip(rows[::2], rows[1::2])):
        out[(m, q)] = {"structured": s, "dense": d}
    return out
