import numpy as np
import pytest

from core.data import DataSpec, build_initial_data
from core.errors import ConfigError, DataSpecError, GridError
from core.evolve import (
    circle_exact,
    circle_phase,
    evolve,
    evolve_slice,
    march_null_lattice,
    pohlmeyer_residual,
)
from core.fields import e1
from core.grid import Grid1D

H = 1.0 / 64.0


@pytest.fixture(scope="module")
def run3(spec3):
    return evolve(spec3, 2.0, H, slice_times=[1.0])


def test_slices_stay_on_the_sphere(run3):
    assert len(run3.slices) == 2
    for s in run3.slices:
        assert s.unit_defect() <= 1e-12
    assert run3.max_raw_defect < 0.1
    assert run3.steps == 128


def test_data_do_not_travel_faster_than_light(run3):
    for s in run3.slices:
        outside = np.abs(s.x) > 1.0 + abs(s.time) + 2.0 * H
        assert outside.any()
        assert np.array_equal(s.values[outside], np.tile(e1(3), (int(outside.sum()), 1)))
        s.validate()


def test_backward_evolution_mirrors_forward(spec3):
    forward = evolve(spec3, 0.5, H)
    backward = evolve(spec3, -0.5, H)
    assert backward.final.time == pytest.approx(-0.5)
    assert np.array_equal(forward.final.values, backward.final.values)
    np.testing.assert_allclose(forward.final.velocity, -backward.final.velocity)


def test_zero_amplitude_stays_constant():
    ev = evolve(DataSpec.canonical(1.0, 0.0, 3), 0.5, H)
    assert np.array_equal(ev.final.values, np.tile(e1(3), (ev.final.grid.n, 1)))


@pytest.mark.parametrize("h_step", [0.0, -0.1, 2.0])
def test_step_must_lie_in_range(spec3, h_step):
    with pytest.raises(GridError):
        evolve(spec3, 1.0, h_step)


def test_final_time_must_be_on_the_lattice(spec3):
    with pytest.raises(GridError):
        evolve(spec3, 0.3, H)


def test_slice_times_keep_the_sign(spec3):
    with pytest.raises(ConfigError):
        evolve(spec3, 1.0, H, slice_times=[-0.5])


def test_circle_target_matches_the_exact_solution(spec2):
    theta = circle_phase(spec2)
    errors = []
    for h in (1.0 / 32.0, 1.0 / 64.0):
        ev = evolve(spec2, 1.0, h)
        exact = circle_exact(theta, 1.0, ev.final.grid)
        errors.append(float(np.max(np.abs(ev.final.values - exact.values))))
    assert 0.0 < errors[1] < 0.5 * errors[0]


def test_circle_phase_needs_a_circle(spec3):
    with pytest.raises(DataSpecError):
        circle_phase(spec3)


def test_conservation_residual_is_second_order(spec3):
    residuals = []
    for h in (1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0):
        ev = evolve(spec3, 1.0, h, slice_times=[0.5])
        assert ev.monitors is not None
        residuals.append(pohlmeyer_residual(ev).residual)
    for coarse, fine in zip(residuals, residuals[1:]):
        assert 3.2 <= coarse / fine <= 4.8


def test_monitors_need_two_slices(spec3):
    ev = evolve(spec3, 0.5, H)
    assert ev.monitors is None
    with pytest.raises(ConfigError):
        pohlmeyer_residual(ev)


def test_null_lattice_is_time_symmetric(spec3):
    march = march_null_lattice(spec3, 1.0 / 32.0)
    field_ = march.field
    assert field_ is not None
    assert field_.symmetry_defect() == 0.0
    np.testing.assert_array_equal(field_.corner(), march.alpha)
    norms = np.linalg.norm(field_.values, axis=2)
    np.testing.assert_allclose(norms, 1.0, atol=1e-13)


def test_null_lattice_agrees_with_the_leapfrog(spec3):
    march = march_null_lattice(spec3, 1.0 / 32.0, store=False)
    ev = evolve(spec3, 1.0, 1.0 / 64.0)
    middle = ev.final.grid.index_of(0.0)
    np.testing.assert_allclose(march.alpha, ev.final.values[middle], atol=1e-3)


def test_null_lattice_needs_a_whole_number_of_cells(spec3):
    with pytest.raises(GridError):
        march_null_lattice(spec3, 0.3)


def test_grid_must_hold_the_light_cone(spec3):
    initial = build_initial_data(spec3, Grid1D.symmetric(1.5, H))
    with pytest.raises(GridError):
        evolve_slice(initial, 1.0)
    with pytest.raises(GridError):
        evolve_slice(initial, -1.0)
    assert evolve_slice(initial, 0.25).final.unit_defect() <= 1e-12
