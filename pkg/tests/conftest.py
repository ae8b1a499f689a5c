import numpy as np
import pytest

from minoria.dataset import Dataset

TOY = np.array([[0.5, 1.5], [1.0, 0.75], [2.0, 1.0]])
DIAG = np.array([np.sqrt(0.5), np.sqrt(0.5)])


@pytest.fixture
def toy():
    return Dataset(features=TOY.copy())


@pytest.fixture
def toy_loss():
    return Dataset(features=TOY.copy(), loss=np.array([0.0, 0.0, 1.0]))


def random_positive(rng, n, d=2, low=0.5, high=10.0):
    return rng.uniform(low, high, size=(n, d))


def planted_loss_2d(rng, n):
    """Positive 2-D points; rows far out along a random direction carry loss 1."""
    X = random_positive(rng, n)
    theta = rng.uniform(0, np.pi / 2)
    proj = X @ np.array([np.cos(theta), np.sin(theta)])
    loss = (proj > np.quantile(proj, 0.8)).astype(float)
    flip = rng.uniform(size=n) < 0.1
    loss[flip] = 1 - loss[flip]
    return Dataset(features=X, loss=loss)


ACCEPTANCE_LOG = []


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    ACCEPTANCE_LOG.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LOG, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
