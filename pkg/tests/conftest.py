"""Pytest configuration and fixtures."""

import itertools
import random
import sys
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import config  # noqa: E402
from rootdatum import direct_sum, element_from_word, general_linear, special_linear_2, torus  # noqa: E402


def pytest_addoption(parser):
    parser.addoption(
        "--seed",
        action="store",
        type=int,
        default=None,
        help="Seed for randomized tests (defaults to KEMPF_SEED)",
    )


@pytest.fixture
def seed(request):
    """Seed shared by every randomized test."""
    value = request.config.getoption("--seed")
    return config.DEFAULT_SEED if value is None else value


@pytest.fixture
def rng(seed):
    return random.Random(seed)


@pytest.fixture
def a2():
    """GL_3 ambient datum: Z^3, roots e_i - e_j, gram I."""
    return general_linear(3)


@pytest.fixture
def a1():
    """Rank-one SL_2."""
    return special_linear_2()


@pytest.fixture
def a1xa1():
    return direct_sum(special_linear_2(), special_linear_2())


@pytest.fixture
def toy_plane():
    """Q^2 with a single root pair along the second axis; its reflection is y -> -y."""
    return direct_sum(torus(1), special_linear_2())


@pytest.fixture
def swap12(a2):
    """The transposition (1 2) as a Weyl element."""
    return element_from_word(a2, [0])


@pytest.fixture
def swap13(a2):
    return element_from_word(a2, [0, 1, 0])


@pytest.fixture
def box():
    """Integer points with max-norm at most bound, as tuples."""
    def points(dim, bound):
        return itertools.product(range(-bound, bound + 1), repeat=dim)
    return points
