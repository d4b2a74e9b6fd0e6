import numpy as np
import pytest

from app.domains import BallDomain, BoxDomain, SimplexDomain, random_halfspace_domain


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def unit_ball():
    return BallDomain(dimension=2, radius=1.0)


@pytest.fixture
def halfspace_domain():
    return random_halfspace_domain(3, 9, np.random.default_rng(7))


@pytest.fixture
def standard_domains(halfspace_domain):
    """One domain of every kind, all in R^3."""
    return [
        BallDomain(dimension=3, radius=1.0),
        BoxDomain(dimension=3, lower=np.full(3, -0.5), upper=np.array([0.5, 1.0, 0.25])),
        SimplexDomain(dimension=3, scale=1.0),
        halfspace_domain,
    ]
