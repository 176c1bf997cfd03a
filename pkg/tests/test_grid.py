import math

import numpy as np
import pytest

from core.errors import EvaluationError, GridError
from core.grid import (
    Grid1D,
    cumquad,
    fit_line,
    observed_order,
    quad,
    richardson,
    simpson_weights,
)


def test_symmetric_grid_has_zero_in_the_middle():
    grid = Grid1D.symmetric(1.0, 0.25)
    assert grid.n == 9
    assert grid.nodes[4] == 0.0
    assert grid.spacing == pytest.approx(0.25)


def test_refined_halves_the_spacing():
    grid = Grid1D(0.0, 2.0, 5)
    fine = grid.refined()
    assert fine.n == 9
    assert fine.spacing == pytest.approx(0.5 * grid.spacing)
    np.testing.assert_allclose(fine.nodes[::2], grid.nodes)


@pytest.mark.parametrize(("x_min", "x_max", "n"), [(0.0, 1.0, 1), (1.0, 1.0, 5), (2.0, 1.0, 5)])
def test_invalid_grids_are_rejected(x_min, x_max, n):
    with pytest.raises(GridError):
        Grid1D(x_min, x_max, n)


def test_index_of_only_accepts_nodes():
    grid = Grid1D.symmetric(1.0, 0.25)
    assert grid.index_of(0.5) == 6
    assert grid.index_of(0.1) is None
    assert grid.index_of(3.0) is None


def test_locate_flags_aligned_points():
    grid = Grid1D.symmetric(1.0, 0.25)
    index, aligned = grid.locate([-1.0, 0.3, 0.75])
    assert index.tolist() == [0, 5, 7]
    assert aligned.tolist() == [True, False, True]


def test_simpson_quadrature_of_sine():
    assert quad(np.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-9)


def test_quadrature_keeps_vector_shape():
    result = quad(lambda x: np.column_stack([x, x**2]), 0.0, 1.0, n=64)
    np.testing.assert_allclose(result, [0.5, 1.0 / 3.0], rtol=1e-12)


def test_quadrature_needs_enough_intervals():
    with pytest.raises(GridError):
        quad(np.sin, 0.0, 1.0, n=4)


def test_non_finite_integrand_is_reported():
    with np.errstate(divide="ignore"), pytest.raises(EvaluationError):
        quad(lambda x: 1.0 / x, -1.0, 1.0, n=16)


def test_cumulative_integral_of_cosine():
    grid = Grid1D(0.0, 0.5 * math.pi, 65)
    np.testing.assert_allclose(cumquad(np.cos, 0.0, grid), np.sin(grid.nodes), atol=1e-7)


def test_cumulative_integral_must_start_at_the_grid():
    with pytest.raises(GridError):
        cumquad(np.cos, 0.1, Grid1D(0.0, 1.0, 9))


def test_simpson_weights_integrate_constants():
    assert simpson_weights(9, 0.25).sum() == pytest.approx(2.0)
    assert simpson_weights(8, 0.25).sum() == pytest.approx(1.75)


def test_richardson_removes_the_quadratic_term():
    # 1 + 4 h^2 at h = 0.1 and h = 0.05
    assert richardson(1.04, 1.01) == pytest.approx(1.0)


def test_fit_line_recovers_an_exact_line():
    x = np.linspace(0.0, 3.0, 7)
    fit = fit_line(x, 2.0 * x + 1.0)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points == 7


def test_fit_line_of_a_constant():
    fit = fit_line([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])
    assert fit.slope == 0.0
    assert fit.r_squared == 1.0


def test_fit_line_needs_two_points():
    with pytest.raises(GridError):
        fit_line([1.0], [1.0])


def test_observed_order():
    steps = [0.1, 0.05, 0.025]
    assert observed_order(steps, [h**2 for h in steps]) == pytest.approx(2.0)
    assert math.isnan(observed_order(steps, [0.0, 0.0, 0.0]))
