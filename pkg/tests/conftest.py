import math

import numpy as np
import pytest

from flbarron.grid import FreqFunction, make_tensor_grid
from flbarron.potentials import HamiltonianSpec, PotentialSpec, PotentialTerm


@pytest.fixture
def grid_1d():
    return make_tensor_grid(1, 8.0, 129)


@pytest.fixture
def gauss_rhs(grid_1d):
    r = grid_1d.radius_mesh()
    return FreqFunction(grid_1d, np.exp(-math.pi * r * r))


@pytest.fixture
def free_ham_1d():
    return HamiltonianSpec(PotentialSpec(1, 1), (1.0,))


@pytest.fixture
def gaussian_ham_1d():
    pot = PotentialSpec(1, 1, additive=PotentialTerm("gaussian", {"kappa": 0.05}))
    return HamiltonianSpec(pot, (1.0,))


@pytest.fixture
def coulomb_pair_spec():
    return PotentialSpec(3, 2, pairwise=[(1, 2, PotentialTerm("coulomb"))])


def random_complex(grid, seed):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    r = grid.radius_mesh()
    return FreqFunction(grid, np.where(r <= 0.8 * grid.extent, vals, 0.0))
