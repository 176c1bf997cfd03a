from dataclasses import replace

import numpy as np
import pytest

from core.bump import BumpComponent, mollifier_derivatives
from core.data import (
    DataSpec,
    build_initial_data,
    circle_bump,
    cubic_witness,
    make_bump_pair,
    smallness_check,
    truncation_bound,
)
from core.errors import DataSpecError, DegenerateBumpError, SupportLeakError
from core.fields import e1
from core.grid import Grid1D


def test_mollifier_vanishes_outside_the_unit_interval():
    table = mollifier_derivatives([-2.0, -1.0, 0.0, 1.0, 1.5], 3)
    assert table.shape == (4, 5)
    assert table[0, 2] == pytest.approx(np.exp(-1.0))
    assert not table[:, [0, 1, 3, 4]].any()


@pytest.mark.parametrize("k", [1, 2, 3])
def test_exact_derivatives_match_finite_differences(k):
    h = BumpComponent(1.0)
    x = np.linspace(-0.8, 0.8, 17)
    step = 1e-5
    numeric = (h.derivative(x + step, k - 1) - h.derivative(x - step, k - 1)) / (2.0 * step)
    np.testing.assert_allclose(h.derivative(x, k), numeric, rtol=1e-5, atol=1e-6)


def test_pair_is_a_derivative_pair(pair):
    h2, h3 = pair.components
    x = np.linspace(-1.0, 1.0, 101)
    np.testing.assert_allclose(h2(x), h3.derivative(x))
    assert pair.metadata["cubic_witness"] != 0.0


def test_pair_is_supported_in_the_interval(pair):
    x = np.concatenate([np.linspace(-3.0, -1.0, 50), np.linspace(1.0, 3.0, 50)])
    assert pair.support_defect(x) == 0.0


def test_even_bump_is_degenerate():
    with pytest.raises(DegenerateBumpError):
        make_bump_pair(1.0, "even")


def test_cubic_witness_is_well_above_its_floor(pair):
    value, scale = cubic_witness(pair.components[1])
    assert abs(value) > 1e-3 * scale


def test_unknown_shape_is_rejected():
    with pytest.raises(DataSpecError):
        make_bump_pair(1.0, "square")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"eps": 0.6},
        {"m": 1},
        {"truncation": -1},
    ],
)
def test_data_spec_validation(kwargs):
    params = {"C": 1.0, "eps": 0.3, "m": 3, "truncation": None} | kwargs
    with pytest.raises(DataSpecError):
        DataSpec.canonical(**params)


def test_bump_must_fit_the_target(pair):
    with pytest.raises(DataSpecError):
        DataSpec(1.0, 0.3, 4, pair)


def test_circle_target_needs_a_scalar_phase():
    spec = DataSpec(1.0, 0.3, 2, circle_bump(1.0))
    assert spec.bump.target_dim == 1


def test_initial_data_lie_on_the_sphere(spec3):
    f = build_initial_data(spec3)
    assert f.unit_defect() <= 1e-14
    assert f.support == (-1.0, 1.0)
    outside = np.abs(f.x) >= 1.0
    assert np.array_equal(f.values[outside], np.tile(e1(3), (int(outside.sum()), 1)))
    assert not f.velocity.any()


def test_zero_amplitude_gives_the_constant_map():
    f = build_initial_data(DataSpec.canonical(1.0, 0.0, 3))
    assert np.array_equal(f.values, np.tile(e1(3), (f.grid.n, 1)))


def test_long_truncation_matches_the_closed_form():
    exact = build_initial_data(DataSpec.canonical(1.0, 0.3, 3))
    series = build_initial_data(DataSpec.canonical(1.0, 0.3, 3, truncation=20))
    np.testing.assert_allclose(series.values, exact.values, atol=1e-14)


def test_truncation_bound_covers_the_sphere_defect():
    spec = DataSpec.canonical(1.0, 0.3, 3, truncation=2)
    f = build_initial_data(spec)
    bound = truncation_bound(spec)
    assert 0.0 < f.unit_defect() <= 1.01 * bound


def test_shifted_and_scaled_data():
    spec = DataSpec.canonical(1.0, 0.3, 3)
    grid = Grid1D.symmetric(4.0, 1.0 / 64.0)
    f = build_initial_data(spec, grid, center=2.0, scale=0.5)
    assert f.support == (1.5, 2.5)
    assert f.support_defect() == 0.0


def test_smallness_check_passes_on_canonical_data(spec3):
    f = build_initial_data(spec3)
    report = smallness_check(f, spec3.eps, spec3.bump)
    assert report.passed
    assert report.support_leak == 0.0
    assert report.to_dict()["passed"] is True


def test_smallness_check_catches_a_leak(spec3):
    f = build_initial_data(spec3)
    narrow = replace(f, support=(-0.5, 0.5))
    with pytest.raises(SupportLeakError):
        smallness_check(narrow, spec3.eps, spec3.bump)
