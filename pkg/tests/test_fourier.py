import numpy as np
import pytest

from core.errors import TailError
from core.fourier import dft_halfline_density
from core.grid import Grid1D


@pytest.fixture
def gaussian():
    grid = Grid1D.symmetric(8.0, 1.0 / 32.0)
    return grid, np.exp(-np.pi * grid.nodes**2)


def test_discrete_parseval_is_exact(gaussian):
    grid, values = gaussian
    density = dft_halfline_density(values, grid)
    shifted = values - values[0]
    assert density.integrate() == pytest.approx(grid.spacing * np.sum(shifted**2), rel=1e-12)


def test_transform_matches_the_continuum(gaussian):
    # the transform of exp(-pi x^2) is exp(-pi xi^2)
    grid, values = gaussian
    density = dft_halfline_density(values, grid)
    low = density.freqs < 2.0
    np.testing.assert_allclose(
        density.density[low], np.exp(-2.0 * np.pi * density.freqs[low] ** 2), atol=1e-10
    )


def test_vector_samples_sum_their_components(gaussian):
    grid, values = gaussian
    single = dft_halfline_density(values, grid)
    double = dft_halfline_density(np.column_stack([values, values]), grid)
    np.testing.assert_allclose(double.density, 2.0 * single.density)


def test_min_length_sets_the_resolution(gaussian):
    grid, values = gaussian
    density = dft_halfline_density(values, grid, min_length=1000.0)
    assert density.dxi <= 1e-3


def test_unequal_ends_are_rejected():
    grid = Grid1D(0.0, 1.0, 33)
    with pytest.raises(TailError):
        dft_halfline_density(grid.nodes, grid)


def test_annulus_selects_a_dyadic_band(gaussian):
    grid, values = gaussian
    density = dft_halfline_density(values, grid)
    band = density.freqs[density.annulus(-1)]
    assert band.min() >= 0.5
    assert band.max() < 1.0
