# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

from utils_spde.spectral.basis import (  # noqa: F401
    Provenance,
    SpectralBasis,
    build_basis,
    exact_basis_interval,
    numeric_basis,
)
from utils_spde.spectral.grid import Grid1D  # noqa: F401
