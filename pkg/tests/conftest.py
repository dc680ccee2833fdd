import numpy as np
import pytest

from shm import appendix
from shm.train import KernelSpec, TrainConfig, TrainingSet, train


def random_psd(rng, n, rank=None):
    a = rng.standard_normal((n, rank or n))
    return a @ a.T


def separable_set(rng, with_threshold=True, max_n=8, max_m=3, max_z=3):
    """Random training set that a hyperplane family separates.

    Labels come from the sign of a random ``x^T W y + w0^T x + b``; examples
    too close to the surface are redrawn so the hard-margin dual stays
    well scaled. ``with_threshold=False`` uses ``b = 0``.
    """
    while True:
        m = int(rng.integers(1, max_m + 1))
        z = int(rng.integers(1, max_z + 1))
        n = int(rng.integers(max(m + 1, 3), max_n + 1))
        x = rng.standard_normal((m, n))
        if np.linalg.cond(x @ x.T) > 1e4:
            continue
        y = rng.standard_normal((z, n))
        w = rng.standard_normal((m, z))
        w0 = rng.standard_normal(m)
        b = rng.standard_normal() if with_threshold else 0.0
        h = np.einsum("ji,jk,ki->i", x, w, y) + w0 @ x + b
        if np.min(np.abs(h)) < 0.1 * np.max(np.abs(h)):
            continue
        d = np.where(h > 0, 1.0, -1.0)
        if abs(d.sum()) == n:
            continue
        return TrainingSet(x, y, d)


@pytest.fixture(scope="session")
def appendix_set():
    return appendix.training_set()


@pytest.fixture(scope="session")
def appendix_model(appendix_set):
    return train(appendix_set, KernelSpec.linear(), TrainConfig(qp_mode="script"))


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
