import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qcoherence.qmatrix import QubitState, from_pure
from qcoherence.sampling import ginibre_mixed, haar_pure, worked_example


@pytest.fixture
def example_rho():
    return from_pure(worked_example())


@pytest.fixture
def bell():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return QubitState(np.outer(v, v.conj()))


def random_states(count, n, seed=11):
    """Alternating Haar pure and full-rank Ginibre states."""
    for i in range(count):
        if i % 2:
            yield ginibre_mixed(n, 2**n, seed, i)
        else:
            yield from_pure(haar_pure(n, seed, i))
