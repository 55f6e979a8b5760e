"""Frequency-space toolkit for many-particle Schrodinger operators in
Barron / Fourier-Lebesgue spaces: norms, certified constants, operator
application, Neumann solves, and sharpness experiments."""

__version__ = "0.1.0"

from .errors import ToolkitError  # noqa: F401
from .grid import (  # noqa: F401
    FreqFunction,
    FreqGrid,
    RadialProfile,
    make_radial_grid,
    make_tensor_grid,
    radial_integral,
    sample_profile,
)
from .spaces import SpaceIndex, SplitIndex, fl_norm, split_norm  # noqa: F401
from .potentials import (  # noqa: F401
    HamiltonianSpec,
    PotentialSpec,
    PotentialTerm,
    fourier_transform,
    sharp_example_potential,
)
