import numpy as np
import pytest

from landau import GaussianComponent, InitialDatumSpec, build_grid, sample_datum
from landau.grid import ScalarField


def random_mixture_spec(rng, L, max_components=3):
    """A seeded Gaussian-mixture spec that fits comfortably inside the box."""
    comps = []
    for _ in range(rng.integers(1, max_components + 1)):
        comps.append(GaussianComponent(
            rho=float(rng.uniform(0.2, 2.0)),
            u=tuple(rng.uniform(-L / 3.0, L / 3.0, size=3)),
            T=float(rng.uniform(0.3, 1.2)),
        ))
    return InitialDatumSpec(kind="gaussian_mixture", components=tuple(comps))


def random_mixture(rng, grid, max_components=3):
    return sample_datum(random_mixture_spec(rng, grid.L, max_components), grid)


def random_field(rng, grid, positive=False):
    """Unstructured random field (not a distribution) for algebraic laws."""
    values = rng.standard_normal((grid.N,) * 3)
    if positive:
        values = np.abs(values) + 0.01
    return ScalarField(grid, values)


@pytest.fixture(scope="session")
def grid16():
    return build_grid(16, 4.0)


@pytest.fixture(scope="session")
def maxwellian16(grid16):
    return sample_datum(InitialDatumSpec(kind="maxwellian"), grid16)
