import numpy as np
import pytest

from src.core.poly_core import MultiPoly


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def produto_bidisco():
    """(1 + z1)(1 + z2) expandido"""
    return MultiPoly(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1})


@pytest.fixture
def z1z2():
    return MultiPoly(2, {(1, 1): 1})


@pytest.fixture
def um_mais_z():
    return MultiPoly.from_coeffs_1d([1, 1])
