"""Shared fixtures: uniform circle samples at the standard resolutions."""

import numpy as np
import pytest

from singint.manifold import build_circle, to_space


def circle_space(n, radius=1.0):
    return to_space(build_circle(n, radius))


@pytest.fixture(scope="session")
def circle_64():
    return circle_space(64)


@pytest.fixture(scope="session")
def circle_256():
    return circle_space(256)


@pytest.fixture(scope="session")
def circle_512():
    return circle_space(512)


@pytest.fixture(scope="session")
def circle_1024():
    return circle_space(1024)


def random_space(rng, n_points=None, dim=2):
    """Small random cloud with random positive weights, X = Y = all."""
    n = int(n_points if n_points is not None else rng.integers(3, 7))
    coords = rng.normal(size=(n, dim))
    weights = rng.uniform(0.5, 1.5, size=n)
    from singint.space import DiscreteSpace

    return DiscreteSpace.from_coords(coords, weights, np.arange(n), np.arange(n))
