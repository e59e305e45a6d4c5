import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20_2608)


def sample_stokes_ball(rng, n=1):
    """Uniform draws from the closed unit ball (valid Stokes vectors)."""
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = rng.random(n) ** (1.0 / 3.0)
    return v * r[:, None]


def sample_density(rng):
    from spamtomo import density_from_stokes

    return density_from_stokes(sample_stokes_ball(rng, 1)[0])


def sample_invertible(rng, max_tries=100):
    """A comfortably invertible random 3x3 matrix."""
    for _ in range(max_tries):
        g = rng.standard_normal((3, 3))
        if abs(np.linalg.det(g)) > 0.05:
            return g
    raise RuntimeError("no invertible draw found")
