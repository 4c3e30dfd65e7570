from fractions import Fraction

import numpy as np
import pytest

from g2torus.services.ansatz import balanced_scenario
from g2torus.services.fibered_calculus import BetaTriple, Torus4

# one anti-self-dual class in each hyperbolic plane of H²(T⁴)
UNIT_PERIODS = [
    [1, -1, 0, 0, 0, 0],
    [0, 0, 1, -1, 0, 0],
    [0, 0, 0, 0, 1, -1],
]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def small_torus() -> Torus4:
    return Torus4((1.0, 1.0, 1.0, 1.0), 8)


@pytest.fixture
def unit_beta(small_torus) -> BetaTriple:
    return BetaTriple.from_periods(small_torus, UNIT_PERIODS)


@pytest.fixture
def balanced(small_torus, unit_beta):
    return balanced_scenario(small_torus, unit_beta, t_squared=Fraction(1))
