from fractions import Fraction

import pytest

from tin_gdof.model import NetworkSpec, User


def pimac(a11_1, a11_2, a22, a12_1, a12_2, a21) -> NetworkSpec:
    """2-cell network: a 2-user cell interfering with a single-user cell."""
    return NetworkSpec.from_alpha(
        2,
        [2, 1],
        {
            (User(1, 1), 1): Fraction(a11_1),
            (User(1, 1), 2): Fraction(a12_1),
            (User(1, 2), 1): Fraction(a11_2),
            (User(1, 2), 2): Fraction(a12_2),
            (User(2, 1), 2): Fraction(a22),
            (User(2, 1), 1): Fraction(a21),
        },
    )


@pytest.fixture
def pimac_nonconvex() -> NetworkSpec:
    """Instance whose region union is not convex; the reversed order matters."""
    return pimac("1.0", "1.2", "1.0", "0.1", "0.5", "0.2")


@pytest.fixture
def pimac_optimal() -> NetworkSpec:
    """Instance satisfying the optimality (hence convexity) conditions."""
    return pimac("1.0", "1.5", "1.0", "0.3", "0.4", "0.2")


@pytest.fixture
def pimac_convex_only() -> NetworkSpec:
    """Instance satisfying the convexity conditions but not the optimality ones."""
    return pimac("1.0", "1.5", "1.0", "0.3", "0.7", "0.2")
