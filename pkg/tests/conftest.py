import numpy as np
import pytest

from nhje.model import DriveProtocol


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def detuned():
    return DriveProtocol.sin_detuning(0.12, 0.5, 26.7)
