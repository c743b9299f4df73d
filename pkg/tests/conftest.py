import numpy as np
import pytest

from mimix import validate_dataset

_REPORT = []


@pytest.fixture
def report():
    """Collects one status line per acceptance criterion for the run summary."""
    return _REPORT.append


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)


def random_mixed_dataset(rng, n=None, max_dim=3, duplicate_frac=None):
    """Random table mixing continuous columns, integer columns and repeated rows."""
    n = n or int(rng.integers(8, 300))
    dx, dy = int(rng.integers(1, max_dim + 1)), int(rng.integers(1, max_dim + 1))
    cols = []
    for _ in range(dx + dy):
        kind = rng.integers(3)
        if kind == 0:
            cols.append(rng.normal(size=n))
        elif kind == 1:
            cols.append(rng.integers(0, 4, size=n).astype(float))
        else:
            cols.append(np.round(rng.uniform(-2, 2, size=n) * 4) / 4)
    table = np.column_stack(cols)
    frac = rng.uniform(0.1, 0.5) if duplicate_frac is None else duplicate_frac
    n_dup = int(frac * n)
    if n_dup:
        src = rng.integers(0, n, size=n_dup)
        dst = rng.choice(n, size=n_dup, replace=False)
        table[dst] = table[src]
    return validate_dataset(table[:, :dx], table[:, dx:])


def dyadic_dataset(rng, n=None):
    """Values on a 2^-10 grid inside [-8, 8]: shifts by integers stay exact."""
    n = n or int(rng.integers(20, 200))
    dx, dy = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    grid = np.round(rng.normal(scale=2.0, size=(n, dx + dy)) * 1024) / 1024
    grid[:, 0] = np.round(grid[:, 0])  # one coarse column gives ties and atoms
    n_dup = n // 5
    grid[rng.choice(n, n_dup, replace=False)] = grid[rng.integers(0, n, n_dup)]
    return validate_dataset(grid[:, :dx], grid[:, dx:])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
