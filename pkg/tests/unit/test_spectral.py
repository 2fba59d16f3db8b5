# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

import numpy as np
import pandas as pd
import pytest

from utils_spde.common.exceptions import InvalidArgument, PropertyViolation
from utils_spde.spectral.basis import (
    Provenance,
    SpectralBasis,
    build_basis,
    exact_basis_interval,
    export_basis_csv,
    numeric_basis,
)
from utils_spde.spectral.checks import (
    check_eigenvalue_growth,
    check_first_eigenfunction_bound,
    check_spectral_gap,
)
from utils_spde.spectral.fractional import (
    fractional_constant,
    fractional_laplacian_matrix,
    killing_rates,
    second_difference_matrix,
)
from utils_spde.spectral.grid import Grid1D


def test_grid_nodes():
    grid = Grid1D(8)
    assert grid.h * grid.n_cells == 2.0
    assert np.all(np.diff(grid.nodes) > 0)
    assert np.array_equal(grid.nodes, -grid.nodes[::-1])
    assert grid.index_of(grid.nodes[3]) == 3
    with pytest.raises(InvalidArgument):
        grid.index_of(0.0)
    with pytest.raises(InvalidArgument):
        Grid1D(1)
    assert grid.region_mask(0.5).sum() == 4


def test_exact_eigenvalues(exact_basis):
    assert exact_basis.mu[0] == pytest.approx((np.pi / 2) ** 2, rel=1e-12)
    assert exact_basis.mu[2] == pytest.approx((3 * np.pi / 2) ** 2, rel=1e-12)
    assert exact_basis.mu[0] == pytest.approx(2.4674011, abs=1e-7)
    assert exact_basis.provenance == Provenance.EXACT
    assert exact_basis.orthonormality_residual() <= 1e-10


def test_exact_basis_midpoint():
    basis = exact_basis_interval(4, Grid1D(9))
    assert basis.phi[0][4] == pytest.approx(1.0, abs=1e-15)
    assert basis.phi[0][0] < 0.2


def test_exact_basis_arguments(grid64):
    with pytest.raises(InvalidArgument):
        exact_basis_interval(0, grid64)
    with pytest.raises(InvalidArgument):
        exact_basis_interval(64, grid64)


def test_basis_is_read_only(exact_basis):
    with pytest.raises(ValueError):
        exact_basis.mu[0] = 1.0


def test_basis_rejects_negative_first_mode(grid64):
    with pytest.raises(PropertyViolation):
        SpectralBasis(2.0, grid64, [1.0, 2.0], -np.ones((2, 64)), "numeric")


def test_project_synthesize(exact_basis):
    coefficients = np.zeros(32)
    coefficients[[0, 4]] = [1.0, -0.5]
    values = exact_basis.synthesize(coefficients)
    np.testing.assert_allclose(exact_basis.project(values), coefficients, atol=1e-12)


def test_truncated(exact_basis):
    basis = exact_basis.truncated(5)
    assert basis.n_modes == 5
    with pytest.raises(InvalidArgument):
        exact_basis.truncated(0)


def test_second_difference_eigenvalues():
    grid = Grid1D(64)
    basis = numeric_basis(second_difference_matrix(grid), 8, grid)
    n = np.arange(1, 9)
    expected = 4.0 * np.sin(n * np.pi / (2 * 64)) ** 2 / grid.h ** 2
    np.testing.assert_allclose(basis.mu, expected, rtol=1e-9)
    exact = exact_basis_interval(8, grid)
    np.testing.assert_allclose(basis.phi, exact.phi, atol=1e-8)
    assert basis.orthonormality_residual() <= 1e-10


def test_second_difference_converges():
    grid = Grid1D(512)
    basis = numeric_basis(second_difference_matrix(grid), 4, grid)
    assert basis.mu[0] == pytest.approx((np.pi / 2) ** 2, rel=5e-3)


def test_second_difference_order():
    n = np.arange(1, 9)
    errors = []
    for n_cells in (64, 128, 256):
        grid = Grid1D(n_cells)
        mu = numeric_basis(second_difference_matrix(grid), 8, grid).mu
        errors.append(np.abs(mu - (n * np.pi / 2) ** 2))
    for coarse, fine in zip(errors[:-1], errors[1:]):
        order = np.log2(coarse / fine)
        assert np.all((order > 1.7) & (order < 2.3))


def test_fractional_constant():
    assert fractional_constant(1.5) == pytest.approx(0.29921, abs=1e-4)
    assert fractional_constant(1.999) < 0.01
    with pytest.raises(InvalidArgument):
        fractional_constant(2.0)


def test_fractional_matrix_structure():
    grid = Grid1D(64)
    A = fractional_laplacian_matrix(grid, 1.5)
    assert np.max(np.abs(A - A.T)) == 0
    assert np.all(killing_rates(A) > 0)
    off = A - np.diag(np.diag(A))
    assert np.all(off[~np.eye(64, dtype=bool)] > 0)
    with pytest.raises(InvalidArgument):
        fractional_laplacian_matrix(grid, 2.0)


def test_fractional_diagonal_monotone_in_alpha():
    grid = Grid1D(128)
    k = grid.nearest_index(0.0)
    diagonal = [-fractional_laplacian_matrix(grid, a)[k, k] for a in (1.2, 1.5, 1.8)]
    assert diagonal[0] < diagonal[1] < diagonal[2]


def test_fractional_consistency_near_two():
    grid = Grid1D(256)
    basis = numeric_basis(fractional_laplacian_matrix(grid, 1.99), 4, grid, alpha=1.99)
    assert basis.mu[0] == pytest.approx((np.pi / 2) ** 2, rel=0.1)


def test_numeric_fractional_basis(fractional_basis):
    assert fractional_basis.provenance == Provenance.NUMERIC
    assert fractional_basis.orthonormality_residual() <= 1e-6
    assert np.all(fractional_basis.phi[0] > 0)
    np.testing.assert_allclose(fractional_basis.phi[0], fractional_basis.phi[0][::-1], atol=1e-8)
    assert check_spectral_gap(fractional_basis) > 0.1


def test_numeric_basis_rejects_asymmetric():
    grid = Grid1D(8)
    matrix = -np.eye(8)
    matrix[0, 1] = 0.5
    with pytest.raises(InvalidArgument):
        numeric_basis(matrix, 2, grid)


def test_build_basis_dispatch(grid64):
    assert build_basis(2.0, grid64, 8).provenance == Provenance.EXACT
    assert build_basis(1.5, grid64, 8).provenance == Provenance.NUMERIC


def test_growth_exact(exact_basis):
    fit = check_eigenvalue_growth(exact_basis)
    assert fit.exponent == pytest.approx(2.0, abs=1e-10)
    assert fit.c_low == pytest.approx((np.pi / 2) ** 2, rel=1e-10)
    assert fit.c_high == pytest.approx((np.pi / 2) ** 2, rel=1e-10)
    with pytest.raises(InvalidArgument):
        check_eigenvalue_growth(exact_basis.truncated(8))


def test_growth_fractional(fractional_basis):
    fit = check_eigenvalue_growth(fractional_basis)
    assert fit.exponent == pytest.approx(1.5, rel=0.05)
    assert 0 < fit.c_low <= fit.c_high


def test_first_eigenfunction_bound(exact_basis, fractional_basis):
    assert check_first_eigenfunction_bound(exact_basis).c_fit <= np.pi
    assert np.isfinite(check_first_eigenfunction_bound(fractional_basis).c_fit)
    assert check_first_eigenfunction_bound(fractional_basis).c_fit < 10


def test_export_basis_csv(tmp, small_exact_basis):
    path = export_basis_csv(small_exact_basis, tmp + "/basis.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns[:3]) == ["n", "mu", "phi_at_node_0"]
    assert len(frame) == 16
    assert frame["mu"].iloc[0] == pytest.approx((np.pi / 2) ** 2)
